// SPDX-License-Identifier: Apache-2.0
#include "eepn/channel.hpp"

#include "eepn/errors.hpp"
#include "eepn/rng.hpp"

#include <cmath>
#include <numbers>

namespace eepn {

void FiberSpec::validate() const
{
    detail::require(length_km >= 0.0 && std::isfinite(length_km), "fiber length must be >= 0");
    detail::require(wavelength_nm > 0.0 && std::isfinite(wavelength_nm), "wavelength must be > 0");
    detail::require(std::isfinite(dispersion_ps_nm_km), "dispersion must be finite");
}

double FiberSpec::delay_slope() const
{
    const double d_si = dispersion_ps_nm_km * 1e-6; // ps/(nm km) -> s/m^2
    const double lambda = wavelength_nm * 1e-9;
    return d_si * (length_km * 1e3) * lambda * lambda / kSpeedOfLight;
}

cplx cd_response_at(const FiberSpec& fiber, double f_hz)
{
    return std::polar(1.0, std::numbers::pi * fiber.delay_slope() * f_hz * f_hz);
}

CVec cd_response(const FiberSpec& fiber, const FrequencyGrid& grid)
{
    fiber.validate();
    CVec h(grid.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        h[i] = cd_response_at(fiber, grid[i]);
    }
    return h;
}

CVec cdc_response(const FiberSpec& fiber, const FrequencyGrid& grid)
{
    CVec h = cd_response(fiber, grid);
    for (auto& v : h) {
        v = std::conj(v);
    }
    return h;
}

FrequencyResponse dispersion_filter(const FiberSpec& fiber, double sample_rate, bool compensate)
{
    fiber.validate();
    detail::require(sample_rate > 0.0, "sample_rate must be > 0");
    const double coeff = std::numbers::pi * fiber.delay_slope() * (compensate ? -1.0 : 1.0);
    const double spread = std::abs(fiber.group_delay_spread(sample_rate)) * sample_rate;
    FrequencyResponse r;
    r.at = [coeff](double f) { return std::polar(1.0, coeff * f * f); };
    r.memory_samples = static_cast<std::size_t>(std::ceil(spread)) + 1;
    return r;
}

ComplexSignal add_awgn(const ComplexSignal& signal, double snr_db, std::optional<double> reference_power,
                       std::uint64_t seed)
{
    detail::require(!signal.empty(), "cannot add noise to an empty signal");
    if (std::isinf(snr_db) && snr_db > 0) {
        return signal;
    }
    detail::require(std::isfinite(snr_db), "snr_db must be finite (or +inf to disable noise)");
    const double p_ref = reference_power.value_or(signal.mean_power());
    detail::require(p_ref >= 0.0 && std::isfinite(p_ref), "reference power must be finite and >= 0");

    const double variance = p_ref / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(variance / 2.0);
    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVec out = signal.samples();
    for (auto& s : out) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += cplx{sigma * re, sigma * im};
    }
    return {std::move(out), signal.sample_rate()};
}

} // namespace eepn
