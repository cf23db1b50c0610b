// SPDX-License-Identifier: Apache-2.0
// eepn: simulate, mitigate, reproduce figures, run the acceptance suite.
#include "eepn/acceptance.hpp"
#include "eepn/config_file.hpp"
#include "eepn/errors.hpp"
#include "eepn/experiment.hpp"
#include "eepn/report_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "eepn_out";
    std::string preset = "paper";

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "master seed, overrides the config");
        cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
        cmd->add_option("--preset", preset, "base parameter set")
            ->check(CLI::IsMember({"paper", "desk"}))
            ->capture_default_str();
    }

    [[nodiscard]] eepn::RunConfig config() const
    {
        const eepn::RunConfig base = preset == "desk" ? eepn::RunConfig::desk() : eepn::RunConfig::paper();
        eepn::RunConfig cfg = config_path.empty() ? base : eepn::load_config(config_path, base);
        if (seed) {
            cfg.master_seed = *seed;
        }
        cfg.validate();
        for (const auto& w : cfg.warnings()) {
            std::cerr << "warning: " << w << '\n';
        }
        return cfg;
    }
};

void print_summary(const eepn::RunResult& r, const std::vector<double>& penalty)
{
    std::printf("%s run, %zu symbols, %zu blocks, overall SNR %.3f dB\n", r.config.mc ? "MC" : "SC", r.x.size(),
                r.blocks.size(), r.overall_snr_db);
    if (!penalty.empty()) {
        std::printf("max block penalty %.3f dB\n", *std::max_element(penalty.begin(), penalty.end()));
    }
    for (const auto& m : r.mitigation) {
        double worst = 0.0;
        for (std::size_t b = 0; b < m.blocks.size(); ++b) {
            worst = std::max(worst, r.blocks[b].snr_db + (penalty.empty() ? 0.0 : penalty[b]) - m.blocks[b].after.snr_db);
        }
        std::printf("%s: max block penalty after reversal %.3f dB\n", eepn::to_string(m.mode).c_str(), worst);
    }
}

int simulate(const Common& c)
{
    const auto cfg = c.config();
    const std::filesystem::path out(c.out_dir);
    std::filesystem::create_directories(out);
    const auto r = eepn::run(cfg);
    const auto ref = eepn::run(cfg.reference(), {false, false});
    const auto pen = eepn::penalties(ref.block_snr(), r.block_snr());
    eepn::BlockTable t = eepn::block_table(r);
    t.reference_snr = ref.block_snr();
    eepn::write_blocks_csv(out / "blocks.csv", t);
    if (cfg.mc) {
        eepn::RunResult sc_view = r;
        sc_view.subcarrier_estimates.clear();
        eepn::write_lo_trace_csv(out / "lo_trace.csv", sc_view, &r);
    } else {
        eepn::write_lo_trace_csv(out / "lo_trace.csv", r, nullptr);
        eepn::write_symbols_csv(out / "symbols.csv", r);
    }
    eepn::write_text(out / "run_config.txt", "# " + eepn::provenance_line(r.provenance) + "\n" + cfg.to_text());
    print_summary(r, pen);
    std::printf("wrote %s\n", out.string().c_str());
    return 0;
}

int mitigate(const Common& c, const std::string& symbols_path)
{
    const auto cfg = c.config();
    const auto stored = eepn::read_symbols_csv(symbols_path);
    if (stored.x.size() != cfg.n_symbols) {
        throw eepn::ConfigurationError("symbols file holds " + std::to_string(stored.x.size()) +
                                       " symbols but the config expects " + std::to_string(cfg.n_symbols));
    }
    eepn::MitigationOptions mo = cfg.mitigation_options();
    mo.design.oversampling = stored.oversampled.empty() ? 1 : cfg.design_oversampling;
    if (mo.design.oversampling != 1 && mo.design.oversampling != stored.samples_per_symbol) {
        throw eepn::ConfigurationError("stored samples do not match mitigation.oversampling");
    }
    const auto part = cfg.partition();
    std::vector<eepn::MitigationResult> results;
    for (const auto mode : cfg.mitigation_modes) {
        results.push_back(eepn::mitigate(stored.x, stored.y, stored.oversampled, part, mode, cfg.mitigation_taps, mo));
    }
    if (results.empty()) {
        throw eepn::ConfigurationError("mitigation.modes is empty");
    }
    std::vector<eepn::BlockReport> before;
    for (const auto& b : results.front().blocks) {
        before.push_back(b.before);
    }
    eepn::BlockTable t;
    t.blocks = &before;
    for (const auto& m : results) {
        (m.mode == eepn::ReversalMode::HigherOrder ? t.higher_order : t.opt_timing) = &m;
    }
    const std::filesystem::path out(c.out_dir);
    std::filesystem::create_directories(out);
    eepn::write_blocks_csv(out / "blocks.csv", t);
    for (const auto& m : results) {
        double worst = 0.0;
        for (const auto& b : m.blocks) {
            worst = std::max(worst, b.residual_phase_error_rad);
        }
        std::printf("%s: %zu blocks, largest residual phase error %.4f rad\n", eepn::to_string(m.mode).c_str(),
                    m.blocks.size(), worst);
    }
    std::printf("wrote %s\n", (out / "blocks.csv").string().c_str());
    return 0;
}

int reproduce(const Common& c, int figure)
{
    const auto cfg = c.config();
    const auto files =
        eepn::reproduce_figure(cfg, figure == 2 ? eepn::Figure::BlockSnr : eepn::Figure::PhaseProfiles, c.out_dir);
    for (const auto& f : files) {
        std::printf("wrote %s\n", f.string().c_str());
    }
    return 0;
}

int selftest(const std::vector<int>& only, std::size_t seeds)
{
    eepn::AcceptanceOptions opts;
    opts.only = only;
    opts.n_seeds = seeds;
    opts.on_result = [](const eepn::CriterionResult& r) { std::printf("%s\n", eepn::format_result(r).c_str()); std::fflush(stdout); };
    opts.on_progress = [](const std::string& s) { std::fprintf(stderr, "... %s\n", s.c_str()); };
    const auto results = eepn::run_acceptance(opts);
    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
    std::printf("%zu criteria, %td failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Equalization-enhanced phase noise simulator and analysis toolkit"};
    app.set_version_flag("--version", eepn::library_version());
    app.require_subcommand(1);

    Common common;
    auto* sim = app.add_subcommand("simulate", "run one SC or MC transmission and write block reports");
    common.attach(sim);

    std::string symbols_path;
    auto* mit = app.add_subcommand("mitigate", "re-run analysis and phase reversal on stored symbols");
    common.attach(mit);
    mit->add_option("--symbols", symbols_path, "symbols.csv written by simulate")
        ->required()
        ->check(CLI::ExistingFile);

    int figure = 2;
    auto* rep = app.add_subcommand("reproduce", "write the CSV data behind a figure");
    common.attach(rep);
    rep->add_option("--figure", figure, "2: block SNR and LO traces, 3: phase profiles")
        ->required()
        ->check(CLI::IsMember({2, 3}));

    std::vector<int> only;
    std::size_t seeds = 10;
    auto* self = app.add_subcommand("selftest", "run the acceptance criteria");
    self->add_option("--only", only, "criterion numbers to run")->delimiter(',');
    self->add_option("--seeds", seeds, "seeds for the statistical criteria")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (sim->parsed()) {
            return simulate(common);
        }
        if (mit->parsed()) {
            return mitigate(common, symbols_path);
        }
        if (rep->parsed()) {
            return reproduce(common, figure);
        }
        return selftest(only, seeds);
    } catch (const eepn::ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
