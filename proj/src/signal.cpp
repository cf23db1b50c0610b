// SPDX-License-Identifier: Apache-2.0
#include "eepn/signal.hpp"

#include "eepn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace eepn {

ComplexSignal::ComplexSignal(CVec samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate)
{
    detail::require(sample_rate > 0.0 && std::isfinite(sample_rate), "sample_rate must be positive and finite");
}

double ComplexSignal::energy() const
{
    return std::accumulate(samples_.begin(), samples_.end(), 0.0,
                           [](double acc, const cplx& s) { return acc + std::norm(s); });
}

double ComplexSignal::mean_power() const
{
    detail::require(!samples_.empty(), "mean_power of an empty signal");
    return energy() / static_cast<double>(samples_.size());
}

FrequencyGrid FrequencyGrid::fft_ordered(std::size_t n, double sample_rate)
{
    detail::require(n > 0, "frequency grid needs at least one bin");
    detail::require(sample_rate > 0.0, "sample_rate must be positive");
    FrequencyGrid g;
    g.freqs_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        g.freqs_[k] = fft_bin_frequency(k, n, sample_rate);
    }
    g.resolution_ = sample_rate / static_cast<double>(n);
    g.sample_rate_ = sample_rate;
    g.monotone_ = n == 1;
    return g;
}

FrequencyGrid FrequencyGrid::centered(std::size_t n, double sample_rate)
{
    FrequencyGrid g = fft_ordered(n, sample_rate);
    std::sort(g.freqs_.begin(), g.freqs_.end());
    g.monotone_ = true;
    return g;
}

std::vector<std::size_t> FrequencyGrid::indices_within(double limit_hz) const
{
    std::vector<std::size_t> idx;
    // half a bin of slack so that a limit sitting exactly on a bin keeps it
    const double lim = limit_hz + 1e-9 * resolution_;
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
        if (std::abs(freqs_[i]) <= lim) {
            idx.push_back(i);
        }
    }
    return idx;
}

FrequencyGrid FrequencyGrid::restricted(double limit_hz) const
{
    FrequencyGrid g;
    for (auto i : indices_within(limit_hz)) {
        g.freqs_.push_back(freqs_[i]);
    }
    g.resolution_ = resolution_;
    g.sample_rate_ = sample_rate_;
    g.monotone_ = monotone_;
    return g;
}

FirFilter FirFilter::centered(CVec taps)
{
    FirFilter f;
    f.nominal_delay = taps.empty() ? 0 : (taps.size() - 1) / 2;
    f.taps = std::move(taps);
    return f;
}

cplx FirFilter::response(double nu) const
{
    cplx acc{0.0, 0.0};
    for (std::size_t m = 0; m < taps.size(); ++m) {
        const double n = static_cast<double>(m) - static_cast<double>(nominal_delay);
        acc += taps[m] * std::polar(1.0, -2.0 * std::numbers::pi * nu * n);
    }
    return acc;
}

double FirFilter::energy() const
{
    return std::accumulate(taps.begin(), taps.end(), 0.0, [](double acc, const cplx& t) { return acc + std::norm(t); });
}

} // namespace eepn
