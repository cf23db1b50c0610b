// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/experiment.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eepn {

/// Columns of blocks.csv. Absent runs leave their columns out; absent mitigation modes write nan.
struct BlockTable {
    const std::vector<BlockReport>* blocks = nullptr;
    const MitigationResult* opt_timing = nullptr;
    const MitigationResult* higher_order = nullptr;
    std::optional<std::vector<double>> reference_snr;
    std::optional<std::vector<double>> mc_snr;
    std::optional<std::vector<double>> mc_reference_snr;
};

[[nodiscard]] BlockTable block_table(const RunResult& sc);

void write_blocks_csv(const std::filesystem::path& path, const BlockTable& table);
/// SC run with its mitigation, plus optional reference and paired MC runs.
void write_blocks_csv(const std::filesystem::path& path, const RunResult& sc, const std::vector<double>& reference_snr,
                      const RunResult* mc, const RunResult* mc_reference);

/// t_ns, phi_rad (LO at the symbol instants), bps_rad for SC, sub{i}_rad for MC; one row every `stride` symbols.
void write_lo_trace_csv(const std::filesystem::path& path, const RunResult& sc, const RunResult* mc,
                        std::size_t stride = 16);

void write_phase_profiles_csv(const std::filesystem::path& path, const RunResult& sc,
                              const std::vector<std::size_t>& block_indices);
void write_characteristic_blocks_csv(const std::filesystem::path& path, const RunResult& sc,
                                     const std::vector<CharacteristicBlock>& chosen);
void write_subcarrier_phases_csv(const std::filesystem::path& path, const std::vector<SubcarrierPhase>& rows,
                                 const std::vector<double>& sc_penalty);

void write_text(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string provenance_line(const Provenance& p);

/// Received symbols kept for re-running the mitigation: x, y and y's oversampled companion.
struct StoredSymbols {
    SymbolSequence x;
    SymbolSequence y;
    CVec oversampled;
    int samples_per_symbol = 1;
};

void write_symbols_csv(const std::filesystem::path& path, const RunResult& result);
[[nodiscard]] StoredSymbols read_symbols_csv(const std::filesystem::path& path);

} // namespace eepn
