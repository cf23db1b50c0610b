// SPDX-License-Identifier: Apache-2.0
#include "eepn/dsp.hpp"

#include "eepn/errors.hpp"
#include "eepn/fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace eepn {

namespace {

constexpr double kPi = std::numbers::pi;

double rrc_value(double t, double beta)
{
    if (std::abs(t) < 1e-12) {
        return 1.0 - beta + 4.0 * beta / kPi;
    }
    if (beta > 0.0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
        const double a = kPi / (4.0 * beta);
        return beta / std::numbers::sqrt2 * ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
    const double den = kPi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
    return num / den;
}

// Overlap-save core. `bins` is the N-point response; the kernel it represents must lie within
// [-half, half] samples around the origin.
CVec overlap_save(std::span<const cplx> x, std::span<const cplx> bins, std::size_t half)
{
    const std::size_t n_fft = bins.size();
    const std::size_t step = n_fft - 2 * half;
    const auto len = static_cast<std::ptrdiff_t>(x.size());
    CVec y(x.size());
    Fft plan(n_fft);
    auto buf = plan.buffer();
    const double scale = 1.0 / static_cast<double>(n_fft);

    for (std::size_t start = 0; start < x.size(); start += step) {
        const auto origin = static_cast<std::ptrdiff_t>(start) - static_cast<std::ptrdiff_t>(half);
        for (std::size_t j = 0; j < n_fft; ++j) {
            const auto src = origin + static_cast<std::ptrdiff_t>(j);
            buf[j] = (src >= 0 && src < len) ? x[static_cast<std::size_t>(src)] : cplx{};
        }
        plan.forward();
        for (std::size_t j = 0; j < n_fft; ++j) {
            buf[j] *= bins[j];
        }
        plan.inverse();
        const std::size_t count = std::min(step, x.size() - start);
        for (std::size_t j = 0; j < count; ++j) {
            y[start + j] = buf[half + j] * scale;
        }
    }
    return y;
}

} // namespace

FirFilter rrc_taps(double rolloff, int span_symbols, int samples_per_symbol)
{
    detail::require(rolloff >= 0.0 && rolloff <= 1.0, "rolloff must lie in [0, 1]");
    detail::require(span_symbols >= 8, "RRC span must be at least 8 symbols");
    detail::require(samples_per_symbol >= 1, "samples_per_symbol must be >= 1");

    const int half = span_symbols * samples_per_symbol / 2;
    CVec taps(static_cast<std::size_t>(2 * half + 1));
    double energy = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double v = rrc_value(static_cast<double>(i) / samples_per_symbol, rolloff);
        taps[static_cast<std::size_t>(i + half)] = v;
        energy += v * v;
    }
    const double norm = 1.0 / std::sqrt(energy);
    for (auto& t : taps) {
        t *= norm;
    }
    return FirFilter::centered(std::move(taps));
}

OverlapSave overlap_save_for(std::size_t memory_samples)
{
    const std::size_t overlap = memory_samples + (memory_samples % 2);
    const std::size_t fft_size = std::max<std::size_t>(1024, std::bit_ceil(4 * std::max<std::size_t>(overlap, 1)));
    return {fft_size, overlap};
}

ComplexSignal apply_frequency_response(const ComplexSignal& signal, const ResponseFn& response)
{
    detail::require(!signal.empty(), "cannot filter an empty signal");
    const std::size_t n = signal.size();
    const double fs = signal.sample_rate();
    Fft plan(n);
    auto buf = plan.buffer();
    std::copy(signal.samples().begin(), signal.samples().end(), buf.begin());
    plan.forward();
    for (std::size_t k = 0; k < n; ++k) {
        buf[k] *= response(fft_bin_frequency(k, n, fs));
    }
    plan.inverse();
    CVec out(buf.begin(), buf.end());
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : out) {
        v *= scale;
    }
    return {std::move(out), fs};
}

ComplexSignal apply_frequency_response(const ComplexSignal& signal, const FrequencyResponse& response,
                                       const OverlapSave& blocks)
{
    detail::require(!signal.empty(), "cannot filter an empty signal");
    if (blocks.overlap < response.memory_samples) {
        throw ConfigurationError("overlap-save overlap (" + std::to_string(blocks.overlap) +
                                 ") shorter than the filter memory (" + std::to_string(response.memory_samples) + ")");
    }
    if (blocks.overlap % 2 != 0 || blocks.fft_size <= blocks.overlap) {
        throw ConfigurationError("overlap-save needs an even overlap smaller than the FFT length");
    }
    const double fs = signal.sample_rate();
    CVec bins(blocks.fft_size);
    for (std::size_t k = 0; k < bins.size(); ++k) {
        bins[k] = response.at(fft_bin_frequency(k, bins.size(), fs));
    }
    return {overlap_save(signal.samples(), bins, blocks.overlap / 2), fs};
}

CVec filter_same(std::span<const cplx> x, const FirFilter& filter)
{
    detail::require(!filter.taps.empty(), "empty filter");
    const std::size_t n_taps = filter.taps.size();
    const std::size_t delay = filter.nominal_delay;
    if (n_taps <= 96 || x.size() < 4 * n_taps) {
        const auto len = static_cast<std::ptrdiff_t>(x.size());
        CVec y(x.size());
        for (std::ptrdiff_t n = 0; n < len; ++n) {
            cplx acc{};
            for (std::size_t m = 0; m < n_taps; ++m) {
                const auto src = n + static_cast<std::ptrdiff_t>(delay) - static_cast<std::ptrdiff_t>(m);
                if (src >= 0 && src < len) {
                    acc += filter.taps[m] * x[static_cast<std::size_t>(src)];
                }
            }
            y[static_cast<std::size_t>(n)] = acc;
        }
        return y;
    }
    const std::size_t half = std::max(delay, n_taps - 1 - delay);
    const std::size_t n_fft = std::max<std::size_t>(1024, std::bit_ceil(8 * half));
    CVec kernel(n_fft);
    for (std::size_t m = 0; m < n_taps; ++m) {
        const auto lag = static_cast<std::ptrdiff_t>(m) - static_cast<std::ptrdiff_t>(delay);
        kernel[static_cast<std::size_t>((lag + static_cast<std::ptrdiff_t>(n_fft)) % static_cast<std::ptrdiff_t>(n_fft))] =
            filter.taps[m];
    }
    return overlap_save(x, fft(kernel), half);
}

ComplexSignal resample(const ComplexSignal& signal, int factor_up, int factor_down, std::size_t offset)
{
    detail::require(factor_up >= 1 && factor_down >= 1, "resampling factors must be >= 1");
    const auto up = static_cast<std::size_t>(factor_up);
    const auto down = static_cast<std::size_t>(factor_down);
    detail::require(offset < down, "decimation offset must be smaller than factor_down");
    const std::size_t n_up = signal.size() * up;
    CVec out;
    out.reserve(n_up / down + 1);
    for (std::size_t i = offset; i < n_up; i += down) {
        out.push_back(i % up == 0 ? signal.samples()[i / up] : cplx{});
    }
    return {std::move(out), signal.sample_rate() * factor_up / factor_down};
}

} // namespace eepn
