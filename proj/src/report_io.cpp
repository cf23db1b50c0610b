// SPDX-License-Identifier: Apache-2.0
#include "eepn/report_io.hpp"

#include "eepn/errors.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <sstream>

namespace eepn {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : file_(std::fopen(path.c_str(), "w"), &std::fclose)
    {
        if (!file_) {
            throw std::runtime_error("cannot write " + path.string());
        }
    }
    void text(const std::string& s) { field(s.c_str()); }
    void number(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        field(buf);
    }
    void integer(long long v) { field(std::to_string(v).c_str()); }
    void end_row()
    {
        std::fputc('\n', file_.get());
        first_ = true;
    }
    void raw(const std::string& line) { std::fputs(line.c_str(), file_.get()); }

private:
    void field(const char* s)
    {
        if (!first_) {
            std::fputc(',', file_.get());
        }
        std::fputs(s, file_.get());
        first_ = false;
    }
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file_;
    bool first_ = true;
};

void header(CsvWriter& w, std::initializer_list<std::string> names)
{
    for (const auto& n : names) {
        w.text(n);
    }
}

double after_snr(const MitigationResult* m, std::size_t b)
{
    return m ? m->blocks.at(b).after.snr_db : kNan;
}

} // namespace

BlockTable block_table(const RunResult& sc)
{
    BlockTable t;
    t.blocks = &sc.blocks;
    t.opt_timing = sc.mitigation_for(ReversalMode::OptimizedTiming);
    t.higher_order = sc.mitigation_for(ReversalMode::HigherOrder);
    return t;
}

void write_blocks_csv(const std::filesystem::path& path, const BlockTable& t)
{
    detail::require(t.blocks != nullptr, "block table without blocks");
    const auto& blocks = *t.blocks;
    const std::size_t n = blocks.size();
    for (const auto* col : {&t.reference_snr, &t.mc_snr, &t.mc_reference_snr}) {
        detail::require(!col->has_value() || (*col)->size() == n, "block table columns differ in length");
    }
    CsvWriter w(path);
    header(w, {"block_index", "t_start_ns", "snr_db", "snr_db_opt_timing", "snr_db_higher_order", "max_excursion_rad",
               "timing_offset_ui", "fit_order_selected", "residual_phase_error_rad"});
    if (t.reference_snr) {
        header(w, {"snr_db_reference", "penalty_db", "penalty_db_opt_timing", "penalty_db_higher_order"});
    }
    if (t.mc_snr) {
        header(w, {"snr_db_mc"});
    }
    if (t.mc_snr && t.mc_reference_snr) {
        header(w, {"snr_db_mc_reference", "penalty_db_mc"});
    }
    w.end_row();
    for (std::size_t b = 0; b < n; ++b) {
        const auto& r = blocks[b];
        const double ot = after_snr(t.opt_timing, b);
        const double ho = after_snr(t.higher_order, b);
        w.integer(static_cast<long long>(r.block_index));
        w.number(r.t_start_ns);
        w.number(r.snr_db);
        w.number(ot);
        w.number(ho);
        w.number(r.max_excursion_rad);
        w.number(r.timing_offset_ui);
        w.integer(r.fit_order_selected);
        w.number(t.higher_order ? t.higher_order->blocks[b].residual_phase_error_rad : kNan);
        if (t.reference_snr) {
            const double ref = (*t.reference_snr)[b];
            w.number(ref);
            w.number(ref - r.snr_db);
            w.number(ref - ot);
            w.number(ref - ho);
        }
        if (t.mc_snr) {
            w.number((*t.mc_snr)[b]);
        }
        if (t.mc_snr && t.mc_reference_snr) {
            w.number((*t.mc_reference_snr)[b]);
            w.number((*t.mc_reference_snr)[b] - (*t.mc_snr)[b]);
        }
        w.end_row();
    }
}

void write_blocks_csv(const std::filesystem::path& path, const RunResult& sc, const std::vector<double>& reference_snr,
                      const RunResult* mc, const RunResult* mc_reference)
{
    BlockTable t = block_table(sc);
    t.reference_snr = reference_snr;
    if (mc) {
        t.mc_snr = mc->block_snr();
    }
    if (mc_reference) {
        t.mc_reference_snr = mc_reference->block_snr();
    }
    write_blocks_csv(path, t);
}

void write_lo_trace_csv(const std::filesystem::path& path, const RunResult& sc, const RunResult* mc, std::size_t stride)
{
    detail::require(stride >= 1, "stride must be >= 1");
    const auto sps = static_cast<std::size_t>(sc.config.samples_per_symbol);
    const std::size_t n_sub = mc ? mc->subcarrier_estimates.size() : 0;
    CsvWriter w(path);
    header(w, {"t_ns", "phi_rad", "bps_rad"});
    for (std::size_t i = 0; i < n_sub; ++i) {
        w.text("sub" + std::to_string(i) + "_rad");
    }
    w.end_row();
    const double ts = 1.0 / sc.config.symbol_rate;
    for (std::size_t k = 0; k < sc.x.size(); k += stride) {
        w.number(static_cast<double>(k) * ts * 1e9);
        w.number(sc.lo.phases.at(k * sps));
        w.number(sc.bps_estimate.phases.empty() ? kNan : sc.bps_estimate.phases[k]);
        for (std::size_t i = 0; i < n_sub; ++i) {
            // subcarrier symbol j is sent at aggregate symbol time j*n
            const auto& est = mc->subcarrier_estimates[i].phases;
            const std::size_t j = k / n_sub;
            w.number(j < est.size() ? est[j] : kNan);
        }
        w.end_row();
    }
}

void write_phase_profiles_csv(const std::filesystem::path& path, const RunResult& sc,
                              const std::vector<std::size_t>& block_indices)
{
    const MitigationResult* ot = sc.mitigation_for(ReversalMode::OptimizedTiming);
    const MitigationResult* ho = sc.mitigation_for(ReversalMode::HigherOrder);
    CsvWriter w(path);
    header(w, {"block_index", "f_ghz", "phase_rad", "phase_after_opt_timing_rad", "phase_after_higher_order_rad",
               "weight"});
    w.end_row();
    for (const std::size_t b : block_indices) {
        const auto& prof = sc.blocks.at(b).profile;
        for (std::size_t i = 0; i < prof.size(); ++i) {
            w.integer(static_cast<long long>(b));
            w.number(prof.grid[i] * 1e-9);
            w.number(prof.phase[i]);
            w.number(ot ? ot->blocks.at(b).after.profile.phase.at(i) : kNan);
            w.number(ho ? ho->blocks.at(b).after.profile.phase.at(i) : kNan);
            w.number(prof.weight[i]);
            w.end_row();
        }
    }
}

void write_characteristic_blocks_csv(const std::filesystem::path& path, const RunResult& sc,
                                     const std::vector<CharacteristicBlock>& chosen)
{
    CsvWriter w(path);
    header(w, {"label", "block_index", "t_start_ns", "max_excursion_rad", "timing_offset_ui", "fit_order_selected",
               "explained_variance_order1", "explained_variance_order2"});
    w.end_row();
    for (const auto& c : chosen) {
        const auto& b = sc.blocks.at(c.block_index);
        w.text(c.label);
        w.integer(static_cast<long long>(c.block_index));
        w.number(b.t_start_ns);
        w.number(b.max_excursion_rad);
        w.number(b.timing_offset_ui);
        w.integer(b.fit_order_selected);
        w.number(b.fits.size() > 0 ? explained_variance(b.profile, b.fits[0]) : kNan);
        w.number(b.fits.size() > 1 ? explained_variance(b.profile, b.fits[1]) : kNan);
        w.end_row();
    }
}

void write_subcarrier_phases_csv(const std::filesystem::path& path, const std::vector<SubcarrierPhase>& rows,
                                 const std::vector<double>& sc_penalty)
{
    CsvWriter w(path);
    header(w, {"block_index", "subcarrier", "f_center_ghz", "mc_phase_rad", "sc_profile_phase_rad", "difference_rad",
               "sc_penalty_db"});
    w.end_row();
    for (const auto& r : rows) {
        w.integer(static_cast<long long>(r.block_index));
        w.integer(static_cast<long long>(r.subcarrier));
        w.number(r.center_hz * 1e-9);
        w.number(r.mc_phase_rad);
        w.number(r.sc_phase_rad);
        w.number(std::remainder(r.mc_phase_rad - r.sc_phase_rad, 2.0 * std::numbers::pi));
        w.number(r.block_index < sc_penalty.size() ? sc_penalty[r.block_index] : kNan);
        w.end_row();
    }
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

std::string provenance_line(const Provenance& p)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, p.config_hash);
    return "config_hash=" + std::string(buf) + " seed=" + std::to_string(p.master_seed) + " version=" + p.version;
}

void write_symbols_csv(const std::filesystem::path& path, const RunResult& result)
{
    const bool os = !result.y_oversampled.empty();
    const std::size_t sps = os ? static_cast<std::size_t>(result.config.samples_per_symbol) : 1;
    CsvWriter w(path);
    char meta[160];
    std::snprintf(meta, sizeof meta, "# symbol_rate=%.17g constellation=%s samples_per_symbol=%zu ",
                  result.x.symbol_rate, to_string(result.x.constellation).c_str(), os ? sps : std::size_t{0});
    w.raw(meta + provenance_line(result.provenance) + "\n");
    header(w, {"x_re", "x_im", "y_re", "y_im"});
    for (std::size_t j = 0; os && j < sps; ++j) {
        w.text("os" + std::to_string(j) + "_re");
        w.text("os" + std::to_string(j) + "_im");
    }
    w.end_row();
    for (std::size_t k = 0; k < result.x.size(); ++k) {
        w.number(result.x.symbols[k].real());
        w.number(result.x.symbols[k].imag());
        w.number(result.y.symbols[k].real());
        w.number(result.y.symbols[k].imag());
        for (std::size_t j = 0; os && j < sps; ++j) {
            w.number(result.y_oversampled[k * sps + j].real());
            w.number(result.y_oversampled[k * sps + j].imag());
        }
        w.end_row();
    }
}

StoredSymbols read_symbols_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigurationError("cannot read symbols file " + path.string());
    }
    std::string line;
    std::getline(in, line);
    double rate = 0.0;
    char fmt[32] = {};
    std::size_t sps = 0;
    if (std::sscanf(line.c_str(), "# symbol_rate=%lf constellation=%31s samples_per_symbol=%zu", &rate, fmt, &sps) != 3) {
        throw ConfigurationError("symbols file " + path.string() + " lacks its metadata line");
    }
    std::getline(in, line); // column names
    StoredSymbols s;
    s.x.symbol_rate = s.y.symbol_rate = rate;
    s.x.constellation = s.y.constellation = parse_constellation(fmt);
    s.samples_per_symbol = sps == 0 ? 1 : static_cast<int>(sps);
    const std::size_t n_fields = 4 + 2 * sps;
    std::vector<double> v(n_fields);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const char* p = line.c_str();
        for (std::size_t f = 0; f < n_fields; ++f) {
            char* next = nullptr;
            v[f] = std::strtod(p, &next);
            if (next == p) {
                throw ConfigurationError("malformed row in " + path.string());
            }
            p = *next == ',' ? next + 1 : next;
        }
        s.x.symbols.emplace_back(v[0], v[1]);
        s.y.symbols.emplace_back(v[2], v[3]);
        for (std::size_t j = 0; j < sps; ++j) {
            s.oversampled.emplace_back(v[4 + 2 * j], v[5 + 2 * j]);
        }
    }
    return s;
}

} // namespace eepn
