// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/dsp.hpp"
#include "eepn/signal.hpp"

#include <cstdint>
#include <optional>

namespace eepn {

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s

/// Standard single-mode fiber span, dispersion only.
struct FiberSpec {
    double dispersion_ps_nm_km = 23.0;
    double length_km = 6600.0;
    double wavelength_nm = 1550.0;

    void validate() const;

    /// D*L*lambda^2/c in s^2: group-delay difference per Hz of frequency offset.
    [[nodiscard]] double delay_slope() const;
    /// Group-delay spread across a band of the given width (seconds).
    [[nodiscard]] double group_delay_spread(double bandwidth_hz) const { return delay_slope() * bandwidth_hz; }
    /// CD memory expressed in symbols of the given rate (spread over one symbol-rate bandwidth).
    [[nodiscard]] double memory_symbols(double symbol_rate) const { return group_delay_spread(symbol_rate) * symbol_rate; }
};

/// H(f) = exp(+j*pi*lambda^2*D*L*f^2/c).
[[nodiscard]] cplx cd_response_at(const FiberSpec& fiber, double f_hz);

[[nodiscard]] CVec cd_response(const FiberSpec& fiber, const FrequencyGrid& grid);
/// Exact conjugate of cd_response.
[[nodiscard]] CVec cdc_response(const FiberSpec& fiber, const FrequencyGrid& grid);

/// CD (or CDC when `compensate`) as an overlap-save response at the given sample rate.
/// The declared memory covers the group-delay spread of the whole simulated band.
[[nodiscard]] FrequencyResponse dispersion_filter(const FiberSpec& fiber, double sample_rate, bool compensate);

/// Complex circular AWGN with per-sample variance reference_power / 10^(snr_db/10).
/// Without an explicit reference, the mean power of `signal` is used. snr_db = +inf disables noise.
[[nodiscard]] ComplexSignal add_awgn(const ComplexSignal& signal, double snr_db, std::optional<double> reference_power,
                                     std::uint64_t seed);

} // namespace eepn
