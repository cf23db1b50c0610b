// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/analysis.hpp"
#include "eepn/channel.hpp"
#include "eepn/mitigation.hpp"
#include "eepn/phase_noise.hpp"
#include "eepn/transceiver.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eepn {

/// Everything needed to reproduce one simulated transmission.
struct RunConfig {
    double symbol_rate = 180e9;
    double rolloff = 0.05;
    int samples_per_symbol = 2;
    int rrc_span_symbols = kDefaultRrcSpan;
    Constellation constellation = Constellation::Qam16;
    std::size_t n_symbols = std::size_t{1} << 19;
    FiberSpec fiber;
    double linewidth_hz = 70e3;
    double snr_db = 13.0;
    std::optional<McConfig> mc;
    BpsConfig bps;
    int mc_bps_window_symbols = 129; ///< per-subcarrier BPS window
    std::size_t block_size = 2048;
    AnalysisConfig analysis;
    std::vector<ReversalMode> mitigation_modes{ReversalMode::OptimizedTiming, ReversalMode::HigherOrder};
    std::size_t mitigation_taps = kDefaultReversalTaps;
    bool refine_bps = true;
    int refine_window_symbols = 257; ///< BPS window of the pass over the reversed symbols
    int mitigation_passes = 3;
    int design_oversampling = 2;
    std::uint64_t master_seed = 1;

    /// Long-haul single-carrier setup at full scale.
    static RunConfig paper();
    /// 32 GBd over 660 km with the linewidth scaled to keep linewidth * CD memory duration.
    static RunConfig desk();

    /// Throws ConfigurationError on inconsistent settings.
    void validate() const;
    /// Non-fatal problems, e.g. a run too short for its dispersion memory.
    [[nodiscard]] std::vector<std::string> warnings() const;

    [[nodiscard]] double sample_rate() const noexcept { return symbol_rate * samples_per_symbol; }
    /// Symbols excluded from analysis at each end: ceil(CD memory in symbols).
    [[nodiscard]] std::size_t edge_symbols() const;
    [[nodiscard]] BlockPartition partition() const;
    [[nodiscard]] MitigationOptions mitigation_options() const;

    /// Same config with the MC layout filled in (n contiguous subcarriers sharing the rate) or removed.
    [[nodiscard]] RunConfig with_subcarriers(std::size_t n) const;
    [[nodiscard]] RunConfig single_carrier() const;
    /// Linewidth set to zero: the no-EEPN reference sharing data and noise streams.
    [[nodiscard]] RunConfig reference() const;

    /// Canonical key = value text; parse_config(to_text()) round-trips.
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::uint64_t hash() const;
};

struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::string version;
};

struct RunResult {
    RunConfig config;
    Provenance provenance;
    SymbolSequence x;              ///< transmitted
    SymbolSequence y;              ///< received after phase recovery and ambiguity resolution
    CVec y_oversampled;            ///< SC only: y at samples_per_symbol, phase held per symbol
    PhaseTrajectory lo;            ///< LO phase at the simulation sample rate
    PhaseTrajectory bps_estimate;  ///< SC: symbol-rate estimate, ambiguity included
    std::vector<PhaseTrajectory> subcarrier_estimates; ///< MC: one per subcarrier at its own rate
    BlockPartition partition;
    std::vector<BlockReport> blocks;
    double overall_snr_db = 0.0;
    std::vector<MitigationResult> mitigation; ///< one per configured mode, SC only

    [[nodiscard]] std::vector<double> block_snr() const;
    [[nodiscard]] const MitigationResult* mitigation_for(ReversalMode mode) const;
};

struct RunOptions {
    bool analyze_profiles = true; ///< full BlockReports; otherwise only the block SNR is filled in
    bool mitigate = true;
};

[[nodiscard]] RunResult run_sc(const RunConfig& config, const RunOptions& opts = {});
[[nodiscard]] RunResult run_mc(const RunConfig& config, const RunOptions& opts = {});
/// run_mc if config.mc is set, otherwise run_sc.
[[nodiscard]] RunResult run(const RunConfig& config, const RunOptions& opts = {});

/// Per-block penalty: reference SNR minus the run's SNR. Partitions must agree.
[[nodiscard]] std::vector<double> penalties(const std::vector<double>& reference_snr,
                                            const std::vector<double>& snr);

/// Blocks shown as phase profiles: the largest timing offset, the most quadratic and the most
/// high-order shaped one.
struct CharacteristicBlock {
    std::string label;
    std::size_t block_index = 0;
};
[[nodiscard]] std::vector<CharacteristicBlock> characteristic_blocks(const std::vector<BlockReport>& blocks);

/// MC phase estimates against the SC phase-error profile for one block and subcarrier.
struct SubcarrierPhase {
    std::size_t block_index = 0;
    std::size_t subcarrier = 0;
    double center_hz = 0.0;
    double mc_phase_rad = 0.0; ///< block mean of the subcarrier's estimate minus the SC estimate's block mean
    double sc_phase_rad = 0.0; ///< SC profile averaged over the subcarrier's band
};

/// Paired runs with the same seed and partition: sc single-carrier with profiles, mc multi-carrier.
[[nodiscard]] std::vector<SubcarrierPhase> subcarrier_phase_comparison(const RunResult& sc, const RunResult& mc);

enum class Figure { BlockSnr = 2, PhaseProfiles = 3 };

/// Runs what the figure needs and writes its CSV files into out_dir. Returns the written paths.
std::vector<std::filesystem::path> reproduce_figure(const RunConfig& config, Figure which,
                                                    const std::filesystem::path& out_dir);

[[nodiscard]] std::string library_version();

} // namespace eepn
