// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace eepn {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

/// Uniformly sampled complex baseband waveform.
class ComplexSignal {
public:
    ComplexSignal() = default;
    ComplexSignal(CVec samples, double sample_rate);

    [[nodiscard]] const CVec& samples() const noexcept { return samples_; }
    [[nodiscard]] CVec& samples() noexcept { return samples_; }
    [[nodiscard]] double sample_rate() const noexcept { return sample_rate_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }

    /// Mean of |s[k]|^2.
    [[nodiscard]] double mean_power() const;
    /// Sum of |s[k]|^2.
    [[nodiscard]] double energy() const;

private:
    CVec samples_;
    double sample_rate_ = 1.0;
};

/// Frequency of FFT bin k for an n-point transform at sample rate fs.
/// Bins k < n/2 map to k*fs/n, the rest to (k-n)*fs/n.
[[nodiscard]] inline double fft_bin_frequency(std::size_t k, std::size_t n, double fs) noexcept
{
    const auto ki = static_cast<double>(k);
    const auto ni = static_cast<double>(n);
    return (k < n / 2 ? ki : ki - ni) * fs / ni;
}

/// Discrete frequency axis with uniform spacing sample_rate / transform_length.
class FrequencyGrid {
public:
    /// Frequencies in FFT bin order.
    static FrequencyGrid fft_ordered(std::size_t n, double sample_rate);
    /// Same bins sorted ascending, starting at -floor(n/2)*df.
    static FrequencyGrid centered(std::size_t n, double sample_rate);

    [[nodiscard]] std::span<const double> frequencies() const noexcept { return freqs_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return freqs_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return freqs_.size(); }
    [[nodiscard]] double resolution() const noexcept { return resolution_; }
    [[nodiscard]] double sample_rate() const noexcept { return sample_rate_; }
    [[nodiscard]] bool monotone() const noexcept { return monotone_; }

    /// Keep only bins with |f| <= limit_hz (order preserved).
    [[nodiscard]] FrequencyGrid restricted(double limit_hz) const;
    /// Indices into this grid of the bins kept by restricted(limit_hz).
    [[nodiscard]] std::vector<std::size_t> indices_within(double limit_hz) const;

private:
    std::vector<double> freqs_;
    double resolution_ = 0.0;
    double sample_rate_ = 0.0;
    bool monotone_ = false;
};

/// FIR filter; taps[nominal_delay] is the time origin.
struct FirFilter {
    CVec taps;
    std::size_t nominal_delay = 0;

    /// Filter whose origin is the middle tap.
    static FirFilter centered(CVec taps);

    [[nodiscard]] std::size_t size() const noexcept { return taps.size(); }
    /// Frequency response at normalized frequency nu (cycles per sample), referenced to the origin.
    [[nodiscard]] cplx response(double nu) const;
    [[nodiscard]] double energy() const;
};

} // namespace eepn
