// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/phase_noise.hpp"
#include "eepn/signal.hpp"

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace eepn {

enum class Constellation { Qpsk, Qam16, Qam64 };

[[nodiscard]] Constellation parse_constellation(std::string_view name);
[[nodiscard]] std::string to_string(Constellation c);

/// Square QAM alphabet normalized to unit average energy.
class ConstellationMap {
public:
    explicit ConstellationMap(Constellation c);

    [[nodiscard]] Constellation format() const noexcept { return format_; }
    [[nodiscard]] const CVec& points() const noexcept { return points_; }
    /// Nearest constellation point to z.
    [[nodiscard]] cplx slice(cplx z) const noexcept;
    /// Squared distance from z to its nearest point.
    [[nodiscard]] double distance2(cplx z) const noexcept { return std::norm(z - slice(z)); }
    /// Rotational symmetry of the alphabet (pi/2 for square QAM).
    [[nodiscard]] static constexpr double symmetry() noexcept { return std::numbers::pi / 2; }

private:
    Constellation format_;
    int levels_;   // points per axis
    double scale_; // amplitude of the innermost level
    CVec points_;
};

struct SymbolSequence {
    CVec symbols;
    double symbol_rate = 1.0; ///< Bd
    Constellation constellation = Constellation::Qam16;

    [[nodiscard]] std::size_t size() const noexcept { return symbols.size(); }
};

/// i.i.d. uniform symbols, deterministic per seed.
[[nodiscard]] SymbolSequence generate_symbols(std::size_t n, Constellation format, double symbol_rate,
                                              std::uint64_t seed);

inline constexpr int kDefaultRrcSpan = 64;

/// Zero-insert by sps and RRC shape. Output power equals symbol power and symbol k sits at sample k*sps
/// (the shaping delay is compensated).
[[nodiscard]] ComplexSignal sc_modulate(const SymbolSequence& symbols, double rolloff, int sps,
                                        int span_symbols = kDefaultRrcSpan);

/// RRC matched filter and decimation by sps starting at timing_phase. Unit gain for an sc_modulate input.
[[nodiscard]] SymbolSequence matched_filter_and_downsample(const ComplexSignal& signal, double rolloff, int sps,
                                                           std::size_t timing_phase, Constellation format,
                                                           int span_symbols = kDefaultRrcSpan);

/// RRC matched filter without decimation, same scaling as matched_filter_and_downsample: sample k*sps of
/// the result is symbol k.
[[nodiscard]] ComplexSignal matched_filter(const ComplexSignal& signal, double rolloff, int sps,
                                           int span_symbols = kDefaultRrcSpan);

/// Digital subcarrier multiplexing layout.
struct McConfig {
    std::size_t n_subcarriers = 8;
    double per_subcarrier_rate = 22.5e9; ///< Bd
    double subcarrier_spacing = 23.625e9; ///< Hz

    /// n contiguous subcarriers sharing total_rate, spaced (1+rolloff)*rate apart.
    static McConfig contiguous(std::size_t n, double total_rate, double rolloff);

    void validate() const;
    [[nodiscard]] double aggregate_rate() const noexcept
    {
        return per_subcarrier_rate * static_cast<double>(n_subcarriers);
    }
    /// Center frequency of subcarrier i: i*spacing - (n-1)*spacing/2.
    [[nodiscard]] double center(std::size_t i) const noexcept;
    /// Outer edge to outer edge: (n-1)*spacing + (1+rolloff)*rate.
    [[nodiscard]] double occupied_bandwidth(double rolloff) const noexcept;
};

/// Round-robin split: stream i gets symbols i, i+n, i+2n, ...
[[nodiscard]] std::vector<SymbolSequence> split_round_robin(const SymbolSequence& symbols, std::size_t n);
/// Inverse of split_round_robin.
[[nodiscard]] SymbolSequence interleave_round_robin(const std::vector<SymbolSequence>& streams);

/// Each stream RRC-shaped at its own rate, shifted to its center and summed; total power equals symbol power.
/// The sample rate is sps_aggregate * aggregate symbol rate.
[[nodiscard]] ComplexSignal mc_modulate(const SymbolSequence& symbols, const McConfig& cfg, double rolloff,
                                        int sps_aggregate = 2, int span_symbols = kDefaultRrcSpan);

/// Per subcarrier: down-shift, matched filter, symbol-rate sampling. Order matches the mc_modulate split.
[[nodiscard]] std::vector<SymbolSequence> mc_demodulate(const ComplexSignal& signal, const McConfig& cfg,
                                                        double rolloff, Constellation format,
                                                        int span_symbols = kDefaultRrcSpan);

/// Blind phase search settings. Test phases are -range/2 + b*range/n_test_phases.
struct BpsConfig {
    int n_test_phases = 64;
    int window_symbols = 1025;
    double phase_range = std::numbers::pi / 2;

    void validate() const;
    [[nodiscard]] double step() const noexcept { return phase_range / n_test_phases; }
};

struct BpsResult {
    SymbolSequence corrected;
    PhaseTrajectory estimate; ///< symbol-rate, unwrapped
};

/// Blind phase search with a centered sliding window and temporal unwrapping:
/// consecutive estimates never differ by more than phase_range/2.
[[nodiscard]] BpsResult bps(const SymbolSequence& symbols, const BpsConfig& cfg);

} // namespace eepn
