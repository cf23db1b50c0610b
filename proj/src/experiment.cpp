// SPDX-License-Identifier: Apache-2.0
#include "eepn/experiment.hpp"

#include "eepn/dsp.hpp"
#include "eepn/errors.hpp"
#include "eepn/report_io.hpp"
#include "eepn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace eepn {

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ComplexSignal through_dispersion(const ComplexSignal& s, const FiberSpec& fiber, bool compensate)
{
    if (fiber.length_km == 0.0 || fiber.dispersion_ps_nm_km == 0.0) {
        return s;
    }
    const FrequencyResponse resp = dispersion_filter(fiber, s.sample_rate(), compensate);
    return apply_frequency_response(s, resp, overlap_save_for(resp.memory_samples));
}

struct Channel {
    SymbolSequence x;
    ComplexSignal received{CVec{}, 1.0};
    PhaseTrajectory lo;
};

// transmit waveform -> CD -> AWGN -> LO phase -> CDC
Channel transmit(const RunConfig& c, bool multi_carrier)
{
    Channel ch;
    ch.x = generate_symbols(c.n_symbols, c.constellation, c.symbol_rate, stream_seed(c.master_seed, "data"));
    ComplexSignal tx = multi_carrier
                           ? mc_modulate(ch.x, *c.mc, c.rolloff, c.samples_per_symbol, c.rrc_span_symbols)
                           : sc_modulate(ch.x, c.rolloff, c.samples_per_symbol, c.rrc_span_symbols);
    const double signal_power = tx.mean_power();
    ComplexSignal sig = through_dispersion(tx, c.fiber, false);
    // noise referenced to the symbol-rate bandwidth: in-band SNR equals snr_db
    sig = add_awgn(sig, c.snr_db, signal_power * c.samples_per_symbol, stream_seed(c.master_seed, "awgn"));
    ch.lo = generate_wiener_phase(sig.size(), c.linewidth_hz, 1.0 / sig.sample_rate(),
                                  stream_seed(c.master_seed, "lo_phase"));
    if (c.linewidth_hz > 0.0) {
        sig = apply_phase(sig, ch.lo);
    }
    ch.received = through_dispersion(sig, c.fiber, true);
    return ch;
}

void analyze(RunResult& r, const RunOptions& opts)
{
    r.partition = r.config.partition();
    const auto snr = blockwise_snr(r.x, r.y, r.partition);
    r.blocks.clear();
    r.blocks.reserve(r.partition.n_blocks);
    for (std::size_t b = 0; b < r.partition.n_blocks; ++b) {
        if (opts.analyze_profiles) {
            r.blocks.push_back(analyze_block(r.x, r.y, r.partition, b, r.config.analysis));
        } else {
            BlockReport br;
            br.block_index = b;
            br.t_start_ns = static_cast<double>(r.partition.block_begin(b)) / r.x.symbol_rate * 1e9;
            br.snr_db = snr[b];
            r.blocks.push_back(std::move(br));
        }
    }
    const auto lo = r.partition.begin;
    const auto len = r.partition.end() - lo;
    r.overall_snr_db = range_snr_db(std::span(r.x.symbols).subspan(lo, len), std::span(r.y.symbols).subspan(lo, len));
}

RunResult prepare(const RunConfig& config)
{
    config.validate();
    RunResult r;
    r.config = config;
    r.provenance = {config.hash(), config.master_seed, library_version()};
    return r;
}

} // namespace

RunConfig RunConfig::paper()
{
    return RunConfig{};
}

RunConfig RunConfig::desk()
{
    RunConfig c;
    const FiberSpec paper_fiber = c.fiber;
    const double paper_rate = c.symbol_rate;
    const double paper_linewidth = c.linewidth_hz;
    c.symbol_rate = 32e9;
    c.fiber.length_km = 660.0;
    // keep linewidth * CD memory duration, the quantity that sets the EEPN strength
    c.linewidth_hz = paper_linewidth * paper_fiber.group_delay_spread(paper_rate) / c.fiber.group_delay_spread(c.symbol_rate);
    c.n_symbols = std::size_t{1} << 16;
    c.bps.window_symbols = 65;
    c.refine_window_symbols = 65;
    c.mc_bps_window_symbols = 33;
    return c;
}

void RunConfig::validate() const
{
    try {
        detail::require(symbol_rate > 0.0 && std::isfinite(symbol_rate), "symbol rate must be positive");
        detail::require(rolloff > 0.0 && rolloff <= 1.0, "rolloff must be in (0, 1]");
        detail::require(samples_per_symbol >= 1, "samples_per_symbol must be >= 1");
        detail::require(rrc_span_symbols >= 8, "rrc_span_symbols must be >= 8");
        detail::require(std::isfinite(snr_db) || snr_db > 0.0, "snr_db must be finite or +inf");
        detail::require(linewidth_hz >= 0.0 && std::isfinite(linewidth_hz), "linewidth must be >= 0");
        fiber.validate();
        bps.validate();
        detail::require(mc_bps_window_symbols >= 3 && mc_bps_window_symbols % 2 == 1,
                        "mc.bps_window_symbols must be odd and >= 3");
        analysis.cpsd.validate();
        detail::require(mitigation_taps % 2 == 1, "mitigation.n_taps must be odd");
        detail::require(mitigation_passes >= 1, "mitigation.passes must be >= 1");
        detail::require(refine_window_symbols >= 3 && refine_window_symbols % 2 == 1,
                        "mitigation.refine_window_symbols must be odd and >= 3");
        detail::require(design_oversampling == 1 || design_oversampling == samples_per_symbol,
                        "mitigation.oversampling must be 1 or samples_per_symbol");
        detail::require(analysis.cpsd.segment <= block_size, "CPSD segment longer than a block");
        if (mc) {
            mc->validate();
            detail::require(n_symbols % mc->n_subcarriers == 0,
                            "n_symbols must be a multiple of mc.n_subcarriers");
            detail::require(static_cast<std::size_t>(mc_bps_window_symbols) <= n_symbols / mc->n_subcarriers,
                            "per-subcarrier BPS window longer than the subcarrier streams");
        }
        detail::require(static_cast<std::size_t>(bps.window_symbols) <= n_symbols, "BPS window longer than the run");
    } catch (const ParameterError& e) {
        throw ConfigurationError(e.what());
    }
    const BlockPartition p = partition();
    if (p.n_blocks == 0) {
        throw ConfigurationError("run too short: no analysis block fits between the discarded edges");
    }
    p.validate();
}

std::vector<std::string> RunConfig::warnings() const
{
    std::vector<std::string> w;
    const double memory = fiber.memory_symbols(symbol_rate);
    if (static_cast<double>(n_symbols) < 4.0 * memory) {
        w.push_back("n_symbols (" + std::to_string(n_symbols) + ") is below 4x the CD memory of " +
                    std::to_string(static_cast<std::size_t>(std::ceil(memory))) + " symbols");
    }
    return w;
}

std::size_t RunConfig::edge_symbols() const
{
    return static_cast<std::size_t>(std::ceil(fiber.memory_symbols(symbol_rate)));
}

MitigationOptions RunConfig::mitigation_options() const
{
    MitigationOptions mo;
    mo.analysis = analysis;
    mo.design.oversampling = design_oversampling;
    mo.passes = mitigation_passes;
    if (refine_bps) {
        mo.refine_bps = bps;
        mo.refine_bps->window_symbols = refine_window_symbols;
    }
    return mo;
}

BlockPartition RunConfig::partition() const
{
    const std::size_t edge = edge_symbols();
    if (2 * edge >= n_symbols) {
        return BlockPartition{block_size, 0, edge};
    }
    return BlockPartition::over(edge, n_symbols - edge, block_size);
}

RunConfig RunConfig::with_subcarriers(std::size_t n) const
{
    RunConfig c = *this;
    c.mc = McConfig::contiguous(n, symbol_rate, rolloff);
    return c;
}

RunConfig RunConfig::single_carrier() const
{
    RunConfig c = *this;
    c.mc.reset();
    return c;
}

RunConfig RunConfig::reference() const
{
    RunConfig c = *this;
    c.linewidth_hz = 0.0;
    return c;
}

std::string RunConfig::to_text() const
{
    std::ostringstream o;
    o << "symbol_rate_gbd = " << num(symbol_rate / 1e9) << '\n'
      << "rolloff = " << num(rolloff) << '\n'
      << "samples_per_symbol = " << samples_per_symbol << '\n'
      << "rrc_span_symbols = " << rrc_span_symbols << '\n'
      << "constellation = " << to_string(constellation) << '\n'
      << "n_symbols = " << n_symbols << '\n'
      << "linewidth_khz = " << num(linewidth_hz / 1e3) << '\n'
      << "snr_db = " << num(snr_db) << '\n'
      << "master_seed = " << master_seed << '\n'
      << "fiber.dispersion_ps_nm_km = " << num(fiber.dispersion_ps_nm_km) << '\n'
      << "fiber.length_km = " << num(fiber.length_km) << '\n'
      << "fiber.wavelength_nm = " << num(fiber.wavelength_nm) << '\n'
      << "mc.enabled = " << (mc ? "true" : "false") << '\n'
      << "mc.n_subcarriers = " << (mc ? mc->n_subcarriers : 8) << '\n'
      << "mc.bps_window_symbols = " << mc_bps_window_symbols << '\n'
      << "bps.test_phases = " << bps.n_test_phases << '\n'
      << "bps.window_symbols = " << bps.window_symbols << '\n'
      << "partition.block_size_symbols = " << block_size << '\n'
      << "analysis.segment_symbols = " << analysis.cpsd.segment << '\n'
      << "analysis.hop_symbols = " << analysis.cpsd.hop << '\n'
      << "analysis.selection_threshold = " << num(analysis.selection_threshold) << '\n'
      << "analysis.degraded_offset_ui = " << num(analysis.degraded_offset_ui) << '\n'
      << "mitigation.modes = ";
    if (mitigation_modes.empty()) {
        o << "none";
    }
    for (std::size_t i = 0; i < mitigation_modes.size(); ++i) {
        o << (i ? "," : "") << to_string(mitigation_modes[i]);
    }
    o << '\n'
      << "mitigation.n_taps = " << mitigation_taps << '\n'
      << "mitigation.refine_bps = " << (refine_bps ? "true" : "false") << '\n'
      << "mitigation.refine_window_symbols = " << refine_window_symbols << '\n'
      << "mitigation.passes = " << mitigation_passes << '\n'
      << "mitigation.oversampling = " << design_oversampling << '\n';
    return o.str();
}

std::uint64_t RunConfig::hash() const
{
    return fnv1a64(to_text());
}

std::vector<double> RunResult::block_snr() const
{
    std::vector<double> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
        out.push_back(b.snr_db);
    }
    return out;
}

const MitigationResult* RunResult::mitigation_for(ReversalMode mode) const
{
    for (const auto& m : mitigation) {
        if (m.mode == mode) {
            return &m;
        }
    }
    return nullptr;
}

RunResult run_sc(const RunConfig& config, const RunOptions& opts)
{
    if (config.mc) {
        throw ConfigurationError("run_sc called with a multi-carrier configuration");
    }
    RunResult r = prepare(config);
    Channel ch = transmit(config, false);
    r.x = std::move(ch.x);
    r.lo = std::move(ch.lo);

    const int sps = config.samples_per_symbol;
    const ComplexSignal mf = matched_filter(ch.received, config.rolloff, sps, config.rrc_span_symbols);
    ch.received = ComplexSignal(CVec{}, 1.0);
    SymbolSequence sampled;
    sampled.symbol_rate = config.symbol_rate;
    sampled.constellation = config.constellation;
    sampled.symbols.resize(config.n_symbols);
    for (std::size_t k = 0; k < config.n_symbols; ++k) {
        sampled.symbols[k] = mf.samples()[k * static_cast<std::size_t>(sps)];
    }

    BpsResult rec = bps(sampled, config.bps);
    r.y = std::move(rec.corrected);
    const BlockPartition part = config.partition();
    const double rotation = resolve_phase_ambiguity(r.x, r.y, part.begin, part.end(), ConstellationMap::symmetry());
    r.bps_estimate = std::move(rec.estimate);
    for (auto& p : r.bps_estimate.phases) {
        p += rotation;
    }

    // oversampled companion with the symbol's phase estimate held across its samples
    r.y_oversampled.resize(config.n_symbols * static_cast<std::size_t>(sps));
    for (std::size_t k = 0; k < config.n_symbols; ++k) {
        const cplx derotate = std::polar(1.0, -r.bps_estimate.phases[k]);
        for (int j = 0; j < sps; ++j) {
            const std::size_t n = k * static_cast<std::size_t>(sps) + static_cast<std::size_t>(j);
            r.y_oversampled[n] = mf.samples()[n] * derotate;
        }
    }

    analyze(r, opts);

    if (opts.mitigate) {
        const MitigationOptions mo = config.mitigation_options();
        const std::span<const cplx> os =
            config.design_oversampling == 1 ? std::span<const cplx>{} : std::span<const cplx>(r.y_oversampled);
        for (const ReversalMode mode : config.mitigation_modes) {
            r.mitigation.push_back(mitigate(r.x, r.y, os, r.partition, mode, config.mitigation_taps, mo));
        }
    }
    return r;
}

RunResult run_mc(const RunConfig& config, const RunOptions& opts)
{
    if (!config.mc) {
        throw ConfigurationError("run_mc needs a multi-carrier configuration");
    }
    RunResult r = prepare(config);
    Channel ch = transmit(config, true);
    r.x = std::move(ch.x);
    r.lo = std::move(ch.lo);

    const McConfig& mc = *config.mc;
    const std::size_t n = mc.n_subcarriers;
    auto streams = mc_demodulate(ch.received, mc, config.rolloff, config.constellation, config.rrc_span_symbols);
    ch.received = ComplexSignal(CVec{}, 1.0);
    const auto reference = split_round_robin(r.x, n);
    const BlockPartition part = config.partition();
    const std::size_t lo = (part.begin + n - 1) / n;
    const std::size_t hi = part.end() / n;

    BpsConfig sub_bps = config.bps;
    sub_bps.window_symbols = config.mc_bps_window_symbols;
    std::vector<SymbolSequence> corrected;
    corrected.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        BpsResult rec = bps(streams[i], sub_bps);
        const double rotation =
            resolve_phase_ambiguity(reference[i], rec.corrected, lo, hi, ConstellationMap::symmetry());
        for (auto& p : rec.estimate.phases) {
            p += rotation;
        }
        r.subcarrier_estimates.push_back(std::move(rec.estimate));
        corrected.push_back(std::move(rec.corrected));
    }
    r.y = interleave_round_robin(corrected);
    r.y.symbol_rate = config.symbol_rate;

    RunOptions o = opts;
    o.mitigate = false;
    analyze(r, o);
    return r;
}

RunResult run(const RunConfig& config, const RunOptions& opts)
{
    return config.mc ? run_mc(config, opts) : run_sc(config, opts);
}

std::vector<double> penalties(const std::vector<double>& reference_snr, const std::vector<double>& snr)
{
    detail::require(reference_snr.size() == snr.size(), "penalty needs equal block counts");
    std::vector<double> p(snr.size());
    for (std::size_t i = 0; i < snr.size(); ++i) {
        p[i] = reference_snr[i] - snr[i];
    }
    return p;
}

std::vector<CharacteristicBlock> characteristic_blocks(const std::vector<BlockReport>& blocks)
{
    std::vector<CharacteristicBlock> out;
    if (blocks.empty() || blocks.front().fits.size() < 3) {
        return out;
    }
    std::size_t linear = 0;
    std::size_t quadratic = 0;
    std::size_t mixed = 0;
    double best_linear = -1.0;
    double best_quadratic = -1.0;
    double best_mixed = -1.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const double ev1 = explained_variance(b.profile, b.fits[0]);
        const double ev2 = explained_variance(b.profile, b.fits[1]);
        if (std::abs(b.timing_offset_ui) > best_linear) {
            best_linear = std::abs(b.timing_offset_ui);
            linear = i;
        }
        // excursion carried by the quadratic term beyond the linear fit
        const double q = b.max_excursion_rad * std::max(0.0, ev2 - ev1);
        if (q > best_quadratic) {
            best_quadratic = q;
            quadratic = i;
        }
        const double m = b.max_excursion_rad * std::max(0.0, 1.0 - ev2);
        if (m > best_mixed) {
            best_mixed = m;
            mixed = i;
        }
    }
    out.push_back({"linear", blocks[linear].block_index});
    out.push_back({"quadratic", blocks[quadratic].block_index});
    out.push_back({"higher_order", blocks[mixed].block_index});
    return out;
}

std::vector<SubcarrierPhase> subcarrier_phase_comparison(const RunResult& sc, const RunResult& mc)
{
    detail::require(!sc.config.mc && mc.config.mc.has_value(), "need one SC and one MC run");
    detail::require(sc.partition.begin == mc.partition.begin && sc.partition.n_blocks == mc.partition.n_blocks &&
                        sc.blocks.size() == sc.partition.n_blocks,
                    "runs must share the partition and the SC run must carry block profiles");
    const McConfig& layout = *mc.config.mc;
    const std::size_t n = layout.n_subcarriers;
    auto circular_mean = [](const std::vector<double>& phases, std::size_t lo, std::size_t hi) {
        cplx acc{};
        for (std::size_t k = lo; k < hi; ++k) {
            acc += std::polar(1.0, phases[k]);
        }
        return std::arg(acc);
    };

    std::vector<SubcarrierPhase> rows;
    for (std::size_t b = 0; b < sc.partition.n_blocks; ++b) {
        const std::size_t lo = sc.partition.block_begin(b);
        const std::size_t hi = sc.partition.block_end(b);
        const double sc_mean = circular_mean(sc.bps_estimate.phases, lo, hi);
        for (std::size_t i = 0; i < n; ++i) {
            SubcarrierPhase row;
            row.block_index = b;
            row.subcarrier = i;
            row.center_hz = layout.center(i);
            const double mc_mean = circular_mean(mc.subcarrier_estimates[i].phases, lo / n, hi / n);
            row.mc_phase_rad = std::remainder(mc_mean - sc_mean, 2.0 * std::numbers::pi);
            const double half = layout.subcarrier_spacing / 2.0;
            row.sc_phase_rad = std::remainder(
                band_average_phase(sc.blocks[b].profile, row.center_hz - half, row.center_hz + half),
                2.0 * std::numbers::pi);
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<std::filesystem::path> reproduce_figure(const RunConfig& config, Figure which,
                                                    const std::filesystem::path& out_dir)
{
    const RunConfig sc_cfg = config.single_carrier();
    sc_cfg.validate();
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;

    const RunResult sc = run_sc(sc_cfg);
    const RunResult sc_ref = run_sc(sc_cfg.reference(), {false, false});

    if (which == Figure::BlockSnr) {
        const RunConfig mc_cfg = config.mc ? config : config.with_subcarriers(8);
        const RunResult mc = run_mc(mc_cfg, {false, false});
        const RunResult mc_ref = run_mc(mc_cfg.reference(), {false, false});
        written.push_back(out_dir / "blocks.csv");
        write_blocks_csv(written.back(), sc, sc_ref.block_snr(), &mc, &mc_ref);
        written.push_back(out_dir / "lo_trace.csv");
        write_lo_trace_csv(written.back(), sc, &mc);
        written.push_back(out_dir / "mc_subcarrier_phases.csv");
        write_subcarrier_phases_csv(written.back(), subcarrier_phase_comparison(sc, mc),
                                    penalties(sc_ref.block_snr(), sc.block_snr()));
    } else {
        written.push_back(out_dir / "blocks.csv");
        write_blocks_csv(written.back(), sc, sc_ref.block_snr(), nullptr, nullptr);
        const auto chosen = characteristic_blocks(sc.blocks);
        written.push_back(out_dir / "characteristic_blocks.csv");
        write_characteristic_blocks_csv(written.back(), sc, chosen);
        std::vector<std::size_t> indices;
        for (const auto& c : chosen) {
            indices.push_back(c.block_index);
        }
        written.push_back(out_dir / "phase_profiles.csv");
        write_phase_profiles_csv(written.back(), sc, indices);
    }
    written.push_back(out_dir / "run_config.txt");
    write_text(written.back(), "# " + provenance_line(sc.provenance) + "\n" + sc_cfg.to_text());
    return written;
}

std::string library_version()
{
    return EEPN_VERSION;
}

} // namespace eepn
