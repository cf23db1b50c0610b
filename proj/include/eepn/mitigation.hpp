// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/analysis.hpp"
#include "eepn/signal.hpp"
#include "eepn/transceiver.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eepn {

/// What the per-block reversal filter undoes.
enum class ReversalMode {
    OptimizedTiming, ///< only the first-order fit of the phase error
    HigherOrder,     ///< the full estimated phase error
};

[[nodiscard]] ReversalMode parse_reversal_mode(std::string_view name);
[[nodiscard]] std::string to_string(ReversalMode mode);

inline constexpr std::size_t kDefaultReversalTaps = 61;

/// FIR approximating H(f) = exp(-j*target(f)), running at oversampling * symbol rate.
struct AllpassFirDesign {
    FirFilter filter;
    int oversampling = 2;
    FrequencyPhaseProfile target;
    FrequencyPhaseProfile achieved; ///< -arg H on the target grid
    double magnitude_ripple_db = 0.0; ///< max |20 log10 |H|| on the target grid
    double phase_error_rms = 0.0;
    double phase_error_max = 0.0;
};

struct DesignOptions {
    int oversampling = 2;          ///< filter sample rate in samples per symbol
    std::size_t dense_grid = 4096;
    double taper_fraction = 0.0;   ///< Tukey taper: share of the half-length that is cosine-tapered
};

/// Frequency-sampling design: the target is sampled on a dense FFT grid (held at its edge values outside
/// the target grid), inverse transformed, centered, truncated to n_taps and tapered.
/// Throws DesignError if the bulk group delay of the target exceeds (n_taps-1)/2 samples.
[[nodiscard]] AllpassFirDesign design_allpass(const FrequencyPhaseProfile& target,
                                              std::size_t n_taps = kDefaultReversalTaps,
                                              const DesignOptions& opts = {});

/// Same, with the polynomial evaluated on the grid (and weights) of `on`.
[[nodiscard]] AllpassFirDesign design_allpass(const PolynomialPhase& target, const FrequencyPhaseProfile& on,
                                              std::size_t n_taps = kDefaultReversalTaps,
                                              const DesignOptions& opts = {});

/// Whole-signal filtering at the design rate, group delay compensated, zero beyond the ends.
[[nodiscard]] CVec apply_allpass(std::span<const cplx> samples, const AllpassFirDesign& design);

/// Reversed symbols [begin, end) from samples taken at design.oversampling per symbol (symbol k at
/// sample k*oversampling). Context outside the block comes from the neighbouring samples; beyond the
/// ends it is zero.
[[nodiscard]] CVec reverse_block(std::span<const cplx> samples, std::size_t begin, std::size_t end,
                                 const AllpassFirDesign& design);

/// Symbol-rate convenience form; the design must have oversampling 1.
[[nodiscard]] CVec reverse_block(const SymbolSequence& y, std::size_t begin, std::size_t end,
                                 const AllpassFirDesign& design);

struct MitigationOptions {
    AnalysisConfig analysis;
    DesignOptions design;
    /// Blind phase search pass over the reversed symbols; nullopt disables it.
    std::optional<BpsConfig> refine_bps;
    /// Estimate-design-reverse rounds; each later round adds the residual it measures to the targets
    /// and filters the original input again.
    int passes = 1;
    /// Blend each symbol's output between its own block's filter and the nearer neighbour's, linearly in
    /// the distance between block centers, so the reversal follows the drift between blocks.
    bool interpolate = true;
};

struct BlockMitigation {
    BlockReport before;
    BlockReport after;
    double design_ripple_db = 0.0;
    double design_phase_error_rms = 0.0;
    double residual_phase_error_rad = 0.0;
};

struct MitigationResult {
    ReversalMode mode = ReversalMode::HigherOrder;
    SymbolSequence corrected;
    std::vector<BlockMitigation> blocks;
};

/// Blockwise estimate -> design -> reverse. Only the known transmit symbols x and the received y are used.
/// The phase error is estimated on y; the filters run on `oversampled`, which holds y at
/// opts.design.oversampling samples per symbol. With oversampling 1 it may be left empty.
[[nodiscard]] MitigationResult mitigate(const SymbolSequence& x, const SymbolSequence& y,
                                        std::span<const cplx> oversampled, const BlockPartition& partition,
                                        ReversalMode mode, std::size_t n_taps = kDefaultReversalTaps,
                                        const MitigationOptions& opts = {});

} // namespace eepn
