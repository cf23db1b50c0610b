// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/signal.hpp"
#include "eepn/transceiver.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace eepn {

/// Contiguous, non-overlapping analysis blocks starting at symbol `begin`.
struct BlockPartition {
    std::size_t block_size = 2048;
    std::size_t n_blocks = 0;
    std::size_t begin = 0;

    /// As many whole blocks as fit in [begin, end).
    static BlockPartition over(std::size_t begin, std::size_t end, std::size_t block_size);

    void validate() const;
    [[nodiscard]] std::size_t block_begin(std::size_t b) const noexcept { return begin + b * block_size; }
    [[nodiscard]] std::size_t block_end(std::size_t b) const noexcept { return block_begin(b) + block_size; }
    [[nodiscard]] std::size_t end() const noexcept { return block_begin(n_blocks); }
};

/// Reported for error-free blocks.
inline constexpr double kSnrCapDb = 80.0;

/// Per-block SNR in dB: mean|x|^2 / mean|x - a*y|^2 with a the least-squares complex scale of the block.
[[nodiscard]] std::vector<double> blockwise_snr(const SymbolSequence& x, const SymbolSequence& y,
                                                const BlockPartition& partition);

/// Same measure over one range of symbols.
[[nodiscard]] double range_snr_db(std::span<const cplx> x, std::span<const cplx> y);

/// Welch cross-spectrum settings. Segments use a periodic raised-cosine (Hann) window.
struct CpsdConfig {
    std::size_t segment = 256;
    std::size_t hop = 128;
    double rolloff = 0.05; ///< bins with |f| > (1+rolloff)*Rs/2 are dropped

    void validate() const;
};

/// Phase error versus frequency.
struct FrequencyPhaseProfile {
    FrequencyGrid grid;         ///< ascending, Hz
    std::vector<double> phase;  ///< rad, unwrapped along frequency
    std::vector<double> weight; ///< |S_yx|
    double symbol_rate = 1.0;

    [[nodiscard]] std::size_t size() const noexcept { return phase.size(); }
    /// Linear interpolation in frequency, clamped to the end values outside the grid.
    [[nodiscard]] double phase_at(double f_hz) const;
    /// Profile with phase[i] - other.phase[i]; grids must match.
    [[nodiscard]] FrequencyPhaseProfile minus(const FrequencyPhaseProfile& other) const;
};

/// Frequency-dependent phase error of y against x over symbols [begin, end).
/// phase(f) = arg(mean_seg Y(f) X*(f)), so y = x passed through exp(j*phase(f)).
/// Unwrapping starts at the highest-weight bin and proceeds outward.
[[nodiscard]] FrequencyPhaseProfile estimate_phase_error(const SymbolSequence& x, const SymbolSequence& y,
                                                         std::size_t begin, std::size_t end,
                                                         const CpsdConfig& cfg = {});

/// Unwrap so neighbours differ by less than pi, anchored at `anchor`.
void unwrap_from(std::vector<double>& phase, std::size_t anchor);

inline constexpr int kMaxFitOrder = 9;

/// phi(f) = sum_k c_k * (f / norm_hz)^k, with norm_hz = Rs/2 so the band maps onto [-1, 1].
struct PolynomialPhase {
    std::vector<double> coefficients;
    double norm_hz = 1.0;
    double residual_rms = 0.0; ///< weighted RMS of the fit residual

    [[nodiscard]] int order() const noexcept { return static_cast<int>(coefficients.size()) - 1; }
    [[nodiscard]] double evaluate(double f_hz) const;
    /// Coefficient k in rad/Hz^k.
    [[nodiscard]] double per_hz(int k) const;
};

/// Weighted least-squares polynomial fit of the profile phase.
[[nodiscard]] PolynomialPhase fit_polynomial(const FrequencyPhaseProfile& profile, int order);

/// Fraction of the weighted phase variance explained by the fit.
[[nodiscard]] double explained_variance(const FrequencyPhaseProfile& profile, const PolynomialPhase& fit);

/// Timing offset in unit intervals from the linear term: (phase change over one symbol-rate bandwidth)/(2*pi).
/// A delayed y (y[k] = x[k-d]) gives -d.
[[nodiscard]] double timing_offset_from_slope(const PolynomialPhase& fit, double symbol_rate);

/// max(phase) - min(phase).
[[nodiscard]] double max_excursion(const FrequencyPhaseProfile& profile);

/// Largest deviation of the order-`order` fit from its weighted mean across the band.
/// Smooths per-bin estimation noise; a constant phase does not count as error.
[[nodiscard]] double residual_phase_error(const FrequencyPhaseProfile& profile, int order = kMaxFitOrder);

/// Lowest order in 1..max_order whose fit explains at least `threshold` of the variance; 0 if none does.
[[nodiscard]] int select_fit_order(const FrequencyPhaseProfile& profile, double threshold = 0.9,
                                   int max_order = kMaxFitOrder);

/// Weighted circular mean of the profile phase over [f_lo, f_hi].
[[nodiscard]] double band_average_phase(const FrequencyPhaseProfile& profile, double f_lo, double f_hi);

/// Rotate all of y by the multiple of `symmetry` that best aligns [begin, end) with x.
/// Returns the removed rotation theta: y is multiplied by exp(-j*theta).
double resolve_phase_ambiguity(const SymbolSequence& x, SymbolSequence& y, std::size_t begin, std::size_t end,
                               double symmetry);

/// Spearman rank correlation (average ranks for ties).
[[nodiscard]] double spearman(std::span<const double> a, std::span<const double> b);

struct AnalysisConfig {
    CpsdConfig cpsd;
    int max_fit_order = kMaxFitOrder;
    double selection_threshold = 0.9;
    double degraded_offset_ui = 0.25;
};

/// Everything reported for one block.
struct BlockReport {
    std::size_t block_index = 0;
    double t_start_ns = 0.0;
    double snr_db = 0.0;
    FrequencyPhaseProfile profile;
    std::vector<PolynomialPhase> fits; ///< fits[k-1] has order k
    double max_excursion_rad = 0.0;
    double timing_offset_ui = 0.0;
    int fit_order_selected = 0;
    bool degraded = false; ///< |timing offset| beyond what symbol-rate reversal handles well
};

[[nodiscard]] BlockReport analyze_block(const SymbolSequence& x, const SymbolSequence& y,
                                        const BlockPartition& partition, std::size_t block,
                                        const AnalysisConfig& cfg = {});

} // namespace eepn
