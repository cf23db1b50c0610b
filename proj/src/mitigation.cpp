// SPDX-License-Identifier: Apache-2.0
#include "eepn/mitigation.hpp"

#include "eepn/errors.hpp"
#include "eepn/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eepn {

namespace {

double tukey(std::size_t m, std::size_t center, double alpha)
{
    if (alpha <= 0.0) {
        return 1.0;
    }
    const double r = std::abs(static_cast<double>(m) - static_cast<double>(center)) / static_cast<double>(center + 1);
    if (r <= 1.0 - alpha) {
        return 1.0;
    }
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (r - (1.0 - alpha)) / alpha));
}

FrequencyPhaseProfile linear_target(const BlockReport& report)
{
    FrequencyPhaseProfile t = report.profile;
    const PolynomialPhase& lin = report.fits.front();
    for (std::size_t i = 0; i < t.size(); ++i) {
        t.phase[i] = lin.evaluate(t.grid[i]);
    }
    return t;
}

} // namespace

ReversalMode parse_reversal_mode(std::string_view name)
{
    if (name == "optimized_timing") {
        return ReversalMode::OptimizedTiming;
    }
    if (name == "higher_order") {
        return ReversalMode::HigherOrder;
    }
    throw ParameterError("unknown reversal mode '" + std::string(name) + "'");
}

std::string to_string(ReversalMode mode)
{
    return mode == ReversalMode::OptimizedTiming ? "optimized_timing" : "higher_order";
}

AllpassFirDesign design_allpass(const FrequencyPhaseProfile& target, std::size_t n_taps, const DesignOptions& opts)
{
    detail::require(n_taps % 2 == 1, "all-pass FIR needs an odd tap count");
    detail::require(target.size() >= 2, "target profile needs at least two bins");
    detail::require(opts.dense_grid >= 2 * n_taps, "dense design grid too small for the tap count");
    detail::require(opts.oversampling >= 1, "design oversampling must be at least 1");
    const double fs = target.symbol_rate * opts.oversampling;
    const std::size_t center = (n_taps - 1) / 2;

    if (target.size() > 1) {
        const double bulk_delay = fit_polynomial(target, 1).per_hz(1) * fs / (2.0 * std::numbers::pi);
        if (std::abs(bulk_delay) > static_cast<double>(center)) {
            throw DesignError("target group delay of " + std::to_string(bulk_delay) +
                              " samples exceeds the capacity of " + std::to_string(n_taps) + " taps");
        }
    }

    const std::size_t dense = opts.dense_grid;
    CVec h(dense);
    for (std::size_t k = 0; k < dense; ++k) {
        h[k] = std::polar(1.0, -target.phase_at(fft_bin_frequency(k, dense, fs)));
    }
    const CVec impulse = ifft(h);

    AllpassFirDesign d;
    d.oversampling = opts.oversampling;
    d.filter.nominal_delay = center;
    d.filter.taps.resize(n_taps);
    for (std::size_t m = 0; m < n_taps; ++m) {
        const std::size_t src = (m + dense - center) % dense;
        d.filter.taps[m] = impulse[src] * tukey(m, center, opts.taper_fraction);
    }

    d.target = target;
    d.achieved = target;
    double ripple = 0.0;
    double se = 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const cplx resp = d.filter.response(target.grid[i] / fs);
        const double err = std::remainder(-std::arg(resp) - target.phase[i], 2.0 * std::numbers::pi);
        d.achieved.phase[i] = target.phase[i] + err;
        ripple = std::max(ripple, std::abs(20.0 * std::log10(std::abs(resp))));
        se += err * err;
        worst = std::max(worst, std::abs(err));
    }
    d.magnitude_ripple_db = ripple;
    d.phase_error_rms = std::sqrt(se / static_cast<double>(target.size()));
    d.phase_error_max = worst;
    return d;
}

AllpassFirDesign design_allpass(const PolynomialPhase& target, const FrequencyPhaseProfile& on, std::size_t n_taps,
                                const DesignOptions& opts)
{
    FrequencyPhaseProfile t = on;
    for (std::size_t i = 0; i < t.size(); ++i) {
        t.phase[i] = target.evaluate(t.grid[i]);
    }
    return design_allpass(t, n_taps, opts);
}

CVec apply_allpass(std::span<const cplx> samples, const AllpassFirDesign& design)
{
    return reverse_block(samples, 0, samples.size(), AllpassFirDesign{design.filter, 1, {}, {}, 0.0, 0.0, 0.0});
}

CVec reverse_block(std::span<const cplx> samples, std::size_t begin, std::size_t end, const AllpassFirDesign& design)
{
    const auto sps = static_cast<std::size_t>(design.oversampling);
    detail::require(begin <= end && end * sps <= samples.size() + sps - 1, "block outside the sequence");
    const auto& taps = design.filter.taps;
    const auto delay = static_cast<std::ptrdiff_t>(design.filter.nominal_delay);
    const auto len = static_cast<std::ptrdiff_t>(samples.size());
    CVec out(end - begin);
    for (std::size_t n = begin; n < end; ++n) {
        const auto at = static_cast<std::ptrdiff_t>(n * sps) + delay;
        cplx acc{};
        for (std::size_t m = 0; m < taps.size(); ++m) {
            const auto src = at - static_cast<std::ptrdiff_t>(m);
            if (src >= 0 && src < len) {
                acc += taps[m] * samples[static_cast<std::size_t>(src)];
            }
        }
        out[n - begin] = acc;
    }
    return out;
}

CVec reverse_block(const SymbolSequence& y, std::size_t begin, std::size_t end, const AllpassFirDesign& design)
{
    detail::require(design.oversampling == 1, "symbol-rate reversal needs a symbol-rate design");
    return reverse_block(std::span<const cplx>(y.symbols), begin, end, design);
}

MitigationResult mitigate(const SymbolSequence& x, const SymbolSequence& y, std::span<const cplx> oversampled,
                          const BlockPartition& partition, ReversalMode mode, std::size_t n_taps,
                          const MitigationOptions& opts)
{
    detail::require(x.size() == y.size(), "reference and received sequences differ in length");
    const auto sps = static_cast<std::size_t>(opts.design.oversampling);
    if (sps == 1 && oversampled.empty()) {
        oversampled = y.symbols;
    }
    if (oversampled.size() != y.size() * sps) {
        throw ConfigurationError("oversampled input must hold " + std::to_string(sps) + " samples per symbol");
    }
    partition.validate();
    detail::require(partition.end() <= y.size(), "partition extends past the sequence");

    MitigationResult result;
    result.mode = mode;
    result.blocks.resize(partition.n_blocks);

    detail::require(opts.passes >= 1, "mitigation needs at least one pass");

    std::vector<FrequencyPhaseProfile> targets(partition.n_blocks);
    for (std::size_t b = 0; b < partition.n_blocks; ++b) {
        auto& blk = result.blocks[b];
        blk.before = analyze_block(x, y, partition, b, opts.analysis);
        targets[b] = mode == ReversalMode::HigherOrder ? blk.before.profile : linear_target(blk.before);
    }

    for (int pass = 0; pass < opts.passes; ++pass) {
        if (pass > 0) {
            for (std::size_t b = 0; b < partition.n_blocks; ++b) {
                const BlockReport now = analyze_block(x, result.corrected, partition, b, opts.analysis);
                const FrequencyPhaseProfile residual =
                    mode == ReversalMode::HigherOrder ? now.profile : linear_target(now);
                for (std::size_t i = 0; i < targets[b].size(); ++i) {
                    targets[b].phase[i] += residual.phase[i];
                }
            }
        }
        std::vector<AllpassFirDesign> designs;
        designs.reserve(partition.n_blocks);
        for (std::size_t b = 0; b < partition.n_blocks; ++b) {
            designs.push_back(design_allpass(targets[b], n_taps, opts.design));
            result.blocks[b].design_ripple_db = designs.back().magnitude_ripple_db;
            result.blocks[b].design_phase_error_rms = designs.back().phase_error_rms;
        }
        // every filter reads its context from the unmodified input
        result.corrected = y;
        const std::size_t bs = partition.block_size;
        for (std::size_t b = 0; b < partition.n_blocks; ++b) {
            const auto lo = partition.block_begin(b);
            const CVec own = reverse_block(oversampled, lo, partition.block_end(b), designs[b]);
            auto out = result.corrected.symbols.begin() + static_cast<std::ptrdiff_t>(lo);
            std::copy(own.begin(), own.end(), out);
            if (!opts.interpolate) {
                continue;
            }
            const std::size_t half = bs / 2;
            if (b > 0) {
                const CVec prev = reverse_block(oversampled, lo, lo + half, designs[b - 1]);
                for (std::size_t k = 0; k < half; ++k) {
                    const double a = (static_cast<double>(half - k) - 0.5) / static_cast<double>(bs);
                    out[static_cast<std::ptrdiff_t>(k)] = (1.0 - a) * own[k] + a * prev[k];
                }
            }
            if (b + 1 < partition.n_blocks) {
                const CVec next = reverse_block(oversampled, lo + half, lo + bs, designs[b + 1]);
                for (std::size_t k = half; k < bs; ++k) {
                    const double a = (static_cast<double>(k - half) + 0.5) / static_cast<double>(bs);
                    out[static_cast<std::ptrdiff_t>(k)] = (1.0 - a) * own[k] + a * next[k - half];
                }
            }
        }
        if (opts.refine_bps && partition.n_blocks > 0) {
            result.corrected = bps(result.corrected, *opts.refine_bps).corrected;
            resolve_phase_ambiguity(x, result.corrected, partition.begin, partition.end(),
                                    ConstellationMap::symmetry());
        }
    }

    for (std::size_t b = 0; b < partition.n_blocks; ++b) {
        auto& blk = result.blocks[b];
        blk.after = analyze_block(x, result.corrected, partition, b, opts.analysis);
        blk.residual_phase_error_rad = residual_phase_error(blk.after.profile);
    }
    return result;
}

} // namespace eepn
