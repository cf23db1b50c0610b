// SPDX-License-Identifier: Apache-2.0
#include "eepn/transceiver.hpp"

#include "eepn/dsp.hpp"
#include "eepn/errors.hpp"
#include "eepn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace eepn {

Constellation parse_constellation(std::string_view name)
{
    if (name == "qpsk" || name == "QPSK") {
        return Constellation::Qpsk;
    }
    if (name == "16qam" || name == "16QAM" || name == "qam16") {
        return Constellation::Qam16;
    }
    if (name == "64qam" || name == "64QAM" || name == "qam64") {
        return Constellation::Qam64;
    }
    throw ParameterError("unknown constellation '" + std::string(name) + "'");
}

std::string to_string(Constellation c)
{
    switch (c) {
    case Constellation::Qpsk:
        return "qpsk";
    case Constellation::Qam16:
        return "16qam";
    case Constellation::Qam64:
        return "64qam";
    }
    return "?";
}

ConstellationMap::ConstellationMap(Constellation c) : format_(c)
{
    switch (c) {
    case Constellation::Qpsk:
        levels_ = 2;
        break;
    case Constellation::Qam16:
        levels_ = 4;
        break;
    case Constellation::Qam64:
        levels_ = 8;
        break;
    }
    const int m = levels_ * levels_;
    scale_ = std::sqrt(3.0 / (2.0 * (m - 1)));
    for (int i = 0; i < levels_; ++i) {
        for (int q = 0; q < levels_; ++q) {
            points_.emplace_back((2 * i - levels_ + 1) * scale_, (2 * q - levels_ + 1) * scale_);
        }
    }
}

cplx ConstellationMap::slice(cplx z) const noexcept
{
    const double top = levels_ - 1;
    auto axis = [&](double v) {
        // odd integer grid ... -3, -1, 1, 3 ...
        double u = 2.0 * std::floor(v / scale_ / 2.0) + 1.0;
        return std::clamp(u, -top, top) * scale_;
    };
    return {axis(z.real()), axis(z.imag())};
}

SymbolSequence generate_symbols(std::size_t n, Constellation format, double symbol_rate, std::uint64_t seed)
{
    detail::require(n >= 1, "need at least one symbol");
    detail::require(symbol_rate > 0.0, "symbol_rate must be > 0");
    const ConstellationMap map(format);
    Rng rng = make_rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, map.points().size() - 1);
    SymbolSequence seq;
    seq.symbol_rate = symbol_rate;
    seq.constellation = format;
    seq.symbols.resize(n);
    for (auto& s : seq.symbols) {
        s = map.points()[pick(rng)];
    }
    return seq;
}

namespace {

CVec shape_stream(const CVec& symbols, const FirFilter& rrc, int sps)
{
    CVec up(symbols.size() * static_cast<std::size_t>(sps));
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        up[k * static_cast<std::size_t>(sps)] = symbols[k];
    }
    CVec out = filter_same(up, rrc);
    const double gain = std::sqrt(static_cast<double>(sps));
    for (auto& v : out) {
        v *= gain;
    }
    return out;
}

CVec matched_stream(std::span<const cplx> samples, const FirFilter& rrc, int sps, std::size_t phase)
{
    const CVec filtered = filter_same(samples, rrc);
    const double gain = 1.0 / std::sqrt(static_cast<double>(sps));
    CVec out;
    out.reserve(filtered.size() / static_cast<std::size_t>(sps) + 1);
    for (std::size_t i = phase; i < filtered.size(); i += static_cast<std::size_t>(sps)) {
        out.push_back(filtered[i] * gain);
    }
    return out;
}

void mix(CVec& samples, double freq_hz, double sample_rate)
{
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
    for (std::size_t n = 0; n < samples.size(); ++n) {
        // phase argument reduced per sample to keep it accurate for long signals
        samples[n] *= std::polar(1.0, std::remainder(w * static_cast<double>(n), 2.0 * std::numbers::pi));
    }
}

int integer_ratio(double num, double den, const char* what)
{
    const double r = num / den;
    const double rounded = std::round(r);
    if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) {
        throw ConfigurationError(std::string(what) + " must be an integer ratio");
    }
    return static_cast<int>(rounded);
}

} // namespace

ComplexSignal sc_modulate(const SymbolSequence& symbols, double rolloff, int sps, int span_symbols)
{
    detail::require(symbols.size() > 0, "no symbols to modulate");
    const FirFilter rrc = rrc_taps(rolloff, span_symbols, sps);
    return {shape_stream(symbols.symbols, rrc, sps), symbols.symbol_rate * sps};
}

SymbolSequence matched_filter_and_downsample(const ComplexSignal& signal, double rolloff, int sps,
                                             std::size_t timing_phase, Constellation format, int span_symbols)
{
    detail::require(timing_phase < static_cast<std::size_t>(sps), "timing_phase must be < sps");
    const FirFilter rrc = rrc_taps(rolloff, span_symbols, sps);
    SymbolSequence out;
    out.symbols = matched_stream(signal.samples(), rrc, sps, timing_phase);
    out.symbol_rate = signal.sample_rate() / sps;
    out.constellation = format;
    return out;
}

ComplexSignal matched_filter(const ComplexSignal& signal, double rolloff, int sps, int span_symbols)
{
    const FirFilter rrc = rrc_taps(rolloff, span_symbols, sps);
    CVec out = filter_same(signal.samples(), rrc);
    const double gain = 1.0 / std::sqrt(static_cast<double>(sps));
    for (auto& v : out) {
        v *= gain;
    }
    return ComplexSignal(std::move(out), signal.sample_rate());
}

McConfig McConfig::contiguous(std::size_t n, double total_rate, double rolloff)
{
    detail::require(n >= 1, "n_subcarriers must be >= 1");
    McConfig c;
    c.n_subcarriers = n;
    c.per_subcarrier_rate = total_rate / static_cast<double>(n);
    c.subcarrier_spacing = (1.0 + rolloff) * c.per_subcarrier_rate;
    return c;
}

void McConfig::validate() const
{
    detail::require(n_subcarriers >= 1, "n_subcarriers must be >= 1");
    detail::require(per_subcarrier_rate > 0.0, "per_subcarrier_rate must be > 0");
    detail::require(subcarrier_spacing >= 0.0, "subcarrier_spacing must be >= 0");
}

double McConfig::center(std::size_t i) const noexcept
{
    return (static_cast<double>(i) - static_cast<double>(n_subcarriers - 1) / 2.0) * subcarrier_spacing;
}

double McConfig::occupied_bandwidth(double rolloff) const noexcept
{
    return static_cast<double>(n_subcarriers - 1) * subcarrier_spacing + (1.0 + rolloff) * per_subcarrier_rate;
}

std::vector<SymbolSequence> split_round_robin(const SymbolSequence& symbols, std::size_t n)
{
    detail::require(n >= 1, "need at least one stream");
    detail::require(symbols.size() % n == 0, "symbol count must be divisible by the number of subcarriers");
    std::vector<SymbolSequence> streams(n);
    for (std::size_t i = 0; i < n; ++i) {
        streams[i].symbol_rate = symbols.symbol_rate / static_cast<double>(n);
        streams[i].constellation = symbols.constellation;
        streams[i].symbols.reserve(symbols.size() / n);
    }
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        streams[k % n].symbols.push_back(symbols.symbols[k]);
    }
    return streams;
}

SymbolSequence interleave_round_robin(const std::vector<SymbolSequence>& streams)
{
    detail::require(!streams.empty(), "no streams to interleave");
    const std::size_t n = streams.size();
    const std::size_t len = streams.front().size();
    for (const auto& s : streams) {
        detail::require(s.size() == len, "streams must have equal length");
    }
    SymbolSequence out;
    out.symbol_rate = streams.front().symbol_rate * static_cast<double>(n);
    out.constellation = streams.front().constellation;
    out.symbols.resize(n * len);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < len; ++k) {
            out.symbols[k * n + i] = streams[i].symbols[k];
        }
    }
    return out;
}

ComplexSignal mc_modulate(const SymbolSequence& symbols, const McConfig& cfg, double rolloff, int sps_aggregate,
                          int span_symbols)
{
    cfg.validate();
    detail::require(sps_aggregate >= 1, "sps must be >= 1");
    const double fs = symbols.symbol_rate * sps_aggregate;
    if (std::abs(cfg.aggregate_rate() - symbols.symbol_rate) > 1e-9 * symbols.symbol_rate) {
        throw ConfigurationError("subcarrier rates do not add up to the symbol rate");
    }
    if (cfg.occupied_bandwidth(rolloff) > fs * (1.0 + 1e-12)) {
        throw ConfigurationError("multi-carrier occupied bandwidth exceeds the simulation bandwidth");
    }
    const int sps_sub = integer_ratio(fs, cfg.per_subcarrier_rate, "sample rate / subcarrier rate");
    const FirFilter rrc = rrc_taps(rolloff, span_symbols, sps_sub);
    const auto streams = split_round_robin(symbols, cfg.n_subcarriers);

    CVec total(symbols.size() * static_cast<std::size_t>(sps_aggregate));
    const double norm = 1.0 / std::sqrt(static_cast<double>(cfg.n_subcarriers));
    for (std::size_t i = 0; i < cfg.n_subcarriers; ++i) {
        CVec wave = shape_stream(streams[i].symbols, rrc, sps_sub);
        if (cfg.center(i) != 0.0) {
            mix(wave, cfg.center(i), fs);
        }
        for (std::size_t n = 0; n < total.size(); ++n) {
            total[n] += wave[n] * norm;
        }
    }
    return {std::move(total), fs};
}

std::vector<SymbolSequence> mc_demodulate(const ComplexSignal& signal, const McConfig& cfg, double rolloff,
                                          Constellation format, int span_symbols)
{
    cfg.validate();
    const double fs = signal.sample_rate();
    const int sps_sub = integer_ratio(fs, cfg.per_subcarrier_rate, "sample rate / subcarrier rate");
    if (signal.size() % static_cast<std::size_t>(sps_sub) != 0) {
        throw ParameterError("signal length is not a whole number of subcarrier symbols");
    }
    const FirFilter rrc = rrc_taps(rolloff, span_symbols, sps_sub);
    const double gain = std::sqrt(static_cast<double>(cfg.n_subcarriers));

    std::vector<SymbolSequence> out(cfg.n_subcarriers);
    for (std::size_t i = 0; i < cfg.n_subcarriers; ++i) {
        CVec base = signal.samples();
        if (cfg.center(i) != 0.0) {
            mix(base, -cfg.center(i), fs);
        }
        out[i].symbols = matched_stream(base, rrc, sps_sub, 0);
        for (auto& v : out[i].symbols) {
            v *= gain;
        }
        out[i].symbol_rate = cfg.per_subcarrier_rate;
        out[i].constellation = format;
    }
    return out;
}

void BpsConfig::validate() const
{
    detail::require(n_test_phases >= 2, "BPS needs at least two test phases");
    detail::require(window_symbols >= 3 && window_symbols % 2 == 1, "BPS window must be odd and >= 3");
    detail::require(phase_range > 0.0, "BPS phase range must be > 0");
}

BpsResult bps(const SymbolSequence& symbols, const BpsConfig& cfg)
{
    cfg.validate();
    const std::size_t n = symbols.size();
    const auto window = static_cast<std::size_t>(cfg.window_symbols);
    detail::require(window <= n, "BPS window larger than the symbol sequence");

    const ConstellationMap map(symbols.constellation);
    const auto n_phases = static_cast<std::size_t>(cfg.n_test_phases);
    CVec rotors(n_phases);
    std::vector<double> test_phase(n_phases);
    for (std::size_t b = 0; b < n_phases; ++b) {
        test_phase[b] = -cfg.phase_range / 2.0 + static_cast<double>(b) * cfg.step();
        rotors[b] = std::polar(1.0, -test_phase[b]);
    }

    // ring buffer of per-symbol distances, one row per symbol inside the window
    std::vector<double> ring(window * n_phases, 0.0);
    std::vector<double> sums(n_phases, 0.0);
    auto distances = [&](std::size_t k, double* row) {
        for (std::size_t b = 0; b < n_phases; ++b) {
            row[b] = map.distance2(symbols.symbols[k] * rotors[b]);
        }
    };

    const std::size_t half = window / 2;
    std::vector<double> raw(n);
    std::size_t added = 0; // symbols [0, added) have entered the window
    std::size_t since_refresh = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t hi = std::min(n, k + half + 1); // exclusive upper bound of the window
        while (added < hi) {
            double* row = &ring[(added % window) * n_phases];
            if (added >= window) {
                for (std::size_t b = 0; b < n_phases; ++b) {
                    sums[b] -= row[b];
                }
            }
            distances(added, row);
            for (std::size_t b = 0; b < n_phases; ++b) {
                sums[b] += row[b];
            }
            ++added;
            ++since_refresh;
        }
        if (since_refresh >= 8 * window) {
            // re-accumulate to stop rounding drift of the running sums
            std::fill(sums.begin(), sums.end(), 0.0);
            const std::size_t lo = added > window ? added - window : 0;
            for (std::size_t j = lo; j < added; ++j) {
                const double* row = &ring[(j % window) * n_phases];
                for (std::size_t b = 0; b < n_phases; ++b) {
                    sums[b] += row[b];
                }
            }
            since_refresh = 0;
        }
        // once k - half > 0 the oldest rows are evicted as new ones arrive; before that the window is
        // truncated at the sequence start, and after the end it keeps the last `window` symbols
        const auto best = std::min_element(sums.begin(), sums.end());
        raw[k] = test_phase[static_cast<std::size_t>(best - sums.begin())];
    }

    BpsResult result;
    result.estimate.sample_period = 1.0 / symbols.symbol_rate;
    result.estimate.phases.resize(n);
    const double range = cfg.phase_range;
    double prev = raw[0];
    for (std::size_t k = 0; k < n; ++k) {
        const double unwrapped = raw[k] + range * std::round((prev - raw[k]) / range);
        result.estimate.phases[k] = unwrapped;
        prev = unwrapped;
    }
    result.corrected = symbols;
    for (std::size_t k = 0; k < n; ++k) {
        result.corrected.symbols[k] *= std::polar(1.0, -result.estimate.phases[k]);
    }
    return result;
}

} // namespace eepn
