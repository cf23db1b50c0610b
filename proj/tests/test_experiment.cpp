// SPDX-License-Identifier: Apache-2.0
#include "eepn/config_file.hpp"
#include "eepn/errors.hpp"
#include "eepn/experiment.hpp"
#include "eepn/report_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

using namespace eepn;

namespace {

std::size_t count_lines(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) {
        n += (!line.empty() && line[0] != '#') ? 1 : 0;
    }
    return n;
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("eepn_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

double mean(const std::vector<double>& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// desk preset shortened for unit tests
RunConfig small_desk()
{
    RunConfig c = RunConfig::desk();
    c.n_symbols = std::size_t{1} << 15;
    c.fiber.length_km = 200.0;
    return c;
}

} // namespace

TEST_CASE("paper preset geometry")
{
    const RunConfig c = RunConfig::paper();
    CHECK_NOTHROW(c.validate());
    CHECK(c.sample_rate() == doctest::Approx(360e9));
    // 1.216506e-18 s^2 * (180 GBd)^2 = 39 414.8 symbols
    CHECK(c.edge_symbols() == 39415);
    const auto p = c.partition();
    CHECK(p.begin == c.edge_symbols());
    CHECK(p.n_blocks == (c.n_symbols - 2 * c.edge_symbols()) / 2048);
    CHECK(p.n_blocks >= 170);
    CHECK(c.warnings().empty());
}

TEST_CASE("desk preset keeps linewidth times memory duration")
{
    const RunConfig paper = RunConfig::paper();
    const RunConfig desk = RunConfig::desk();
    CHECK_NOTHROW(desk.validate());
    const double a = paper.linewidth_hz * paper.fiber.group_delay_spread(paper.symbol_rate);
    const double b = desk.linewidth_hz * desk.fiber.group_delay_spread(desk.symbol_rate);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK(desk.linewidth_hz == doctest::Approx(3.9375e6).epsilon(1e-3));
    CHECK(desk.partition().n_blocks > 0);
}

TEST_CASE("config text round-trips")
{
    RunConfig c = RunConfig::paper().with_subcarriers(4);
    c.master_seed = 77;
    c.linewidth_hz = 1234.5;
    c.mitigation_modes = {ReversalMode::HigherOrder};
    const RunConfig back = parse_config(c.to_text());
    CHECK(back.to_text() == c.to_text());
    CHECK(back.hash() == c.hash());
    REQUIRE(back.mc);
    CHECK(back.mc->n_subcarriers == 4);
    CHECK(parse_config(RunConfig::desk().to_text()).hash() == RunConfig::desk().hash());
    CHECK(RunConfig::desk().hash() != RunConfig::paper().hash());
}

TEST_CASE("config keys, comments and overrides")
{
    const RunConfig c = parse_config("# comment\n"
                                     "symbol_rate_gbd = 64   # inline\n"
                                     "\n"
                                     "fiber.length_km = 1000\n"
                                     "mc.n_subcarriers = 4\n"
                                     "mitigation.modes = none\n"
                                     "linewidth_khz = 100\n");
    CHECK(c.symbol_rate == 64e9);
    CHECK(c.fiber.length_km == 1000.0);
    CHECK(c.linewidth_hz == 100e3);
    REQUIRE(c.mc);
    CHECK(c.mc->n_subcarriers == 4);
    CHECK(c.mc->per_subcarrier_rate == doctest::Approx(16e9));
    CHECK(c.mitigation_modes.empty());
    CHECK(c.rolloff == RunConfig::paper().rolloff);
    CHECK_FALSE(parse_config("mc.enabled = false\nmc.n_subcarriers = 4\n").mc);
}

TEST_CASE("config errors name the line")
{
    try {
        (void)parse_config("rolloff = 0.1\nnot_a_key = 3\n");
        FAIL("expected ConfigurationError");
    } catch (const ConfigurationError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("not_a_key") != std::string::npos);
    }
    CHECK_THROWS_AS((void)parse_config("rolloff = 0.1\nrolloff = 0.2\n"), ConfigurationError);
    CHECK_THROWS_AS((void)parse_config("rolloff = abc\n"), ConfigurationError);
    CHECK_THROWS_AS((void)parse_config("rolloff 0.1\n"), ConfigurationError);
    CHECK_THROWS_AS((void)parse_config("constellation = 8psk\n"), ConfigurationError);
    CHECK_THROWS_AS((void)load_config("/nonexistent/eepn.cfg"), ConfigurationError);
}

TEST_CASE("validation rejects inconsistent settings")
{
    RunConfig c = RunConfig::paper();
    c.mitigation_taps = 60;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = RunConfig::paper();
    c.block_size = 128;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = RunConfig::paper().with_subcarriers(8);
    c.n_symbols = 1001;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = RunConfig::paper();
    c.linewidth_hz = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c = RunConfig::paper();
    c.n_symbols = 50000;
    CHECK_FALSE(c.warnings().empty());
}

TEST_CASE("runs are deterministic per seed")
{
    RunConfig c = small_desk();
    c.mitigation_modes.clear();
    const auto a = run(c, {false, false});
    const auto b = run(c, {false, false});
    CHECK(a.block_snr() == b.block_snr());
    CHECK(a.provenance.config_hash == c.hash());
    CHECK(a.provenance.master_seed == c.master_seed);
    c.master_seed = 2;
    const auto d = run(c, {false, false});
    CHECK(d.block_snr() != a.block_snr());
    CHECK(d.x.symbols != a.x.symbols);
}

TEST_CASE("reference run shares data and noise, only the LO differs")
{
    RunConfig c = small_desk();
    c.mitigation_modes.clear();
    const auto r = run(c, {false, false});
    const auto ref = run(c.reference(), {false, false});
    CHECK(c.reference().linewidth_hz == 0.0);
    CHECK(r.x.symbols == ref.x.symbols);
    for (double v : ref.lo.phases) {
        CHECK(v == 0.0);
    }
    // without phase noise only AWGN remains: 13 dB within 0.3 dB
    CHECK(mean(ref.block_snr()) == doctest::Approx(13.0).epsilon(0.3 / 13.0));
    const auto pen = penalties(ref.block_snr(), r.block_snr());
    CHECK(pen.size() == r.blocks.size());
    CHECK_THROWS_AS((void)penalties(ref.block_snr(), std::vector<double>{1.0}), ParameterError);
}

TEST_CASE("reversal on a phase-noise-free desk run leaves the SNR unchanged")
{
    const RunConfig c = small_desk().reference();
    const auto r = run(c);
    REQUIRE(r.mitigation.size() == 2);
    for (const auto& m : r.mitigation) {
        REQUIRE(m.blocks.size() == r.blocks.size());
        double before = 0.0;
        double after = 0.0;
        for (const auto& b : m.blocks) {
            before += b.before.snr_db;
            after += b.after.snr_db;
        }
        CHECK(std::abs(after - before) / static_cast<double>(m.blocks.size()) < 0.05);
    }
}

TEST_CASE("desk run: blocks, profiles and characteristic blocks")
{
    const auto r = run(RunConfig::desk());
    CHECK(r.blocks.size() == r.partition.n_blocks);
    CHECK(r.bps_estimate.size() == r.x.size());
    CHECK(r.y_oversampled.size() == 2 * r.x.size());
    for (const auto& b : r.blocks) {
        CHECK(b.profile.size() > 0);
        CHECK(b.fits.size() == kMaxFitOrder);
    }
    const auto chosen = characteristic_blocks(r.blocks);
    REQUIRE(chosen.size() == 3);
    CHECK(chosen[0].label == "linear");
    CHECK(chosen[1].label == "quadratic");
    CHECK(chosen[2].label == "higher_order");
    REQUIRE(r.mitigation_for(ReversalMode::HigherOrder));
    CHECK(r.mitigation_for(ReversalMode::HigherOrder)->blocks.size() == r.blocks.size());
}

TEST_CASE("desk MC run yields one estimate per subcarrier")
{
    const RunConfig c = small_desk().with_subcarriers(8);
    const auto mc = run(c);
    CHECK(mc.subcarrier_estimates.size() == 8);
    CHECK(mc.mitigation.empty());
    CHECK(mc.blocks.size() == mc.partition.n_blocks);
    const auto sc = run(c.single_carrier(), {true, false});
    const auto rows = subcarrier_phase_comparison(sc, mc);
    CHECK(rows.size() == 8 * sc.blocks.size());
}

TEST_CASE("stored symbols round-trip through CSV")
{
    RunConfig c = small_desk();
    c.n_symbols = 4096;
    c.fiber.length_km = 10.0;
    c.mitigation_modes.clear();
    const auto r = run(c, {false, false});
    const auto dir = scratch("symbols");
    write_symbols_csv(dir / "symbols.csv", r);
    const auto s = read_symbols_csv(dir / "symbols.csv");
    REQUIRE(s.x.size() == r.x.size());
    CHECK(s.samples_per_symbol == 2);
    CHECK(s.oversampled.size() == r.y_oversampled.size());
    CHECK(s.x.symbol_rate == r.x.symbol_rate);
    for (std::size_t k = 0; k < r.x.size(); k += 37) {
        CHECK(std::abs(s.y.symbols[k] - r.y.symbols[k]) < 1e-10);
        CHECK(std::abs(s.x.symbols[k] - r.x.symbols[k]) < 1e-10);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("figure reproduction writes one row per block")
{
    const auto dir = scratch("figure");
    const RunConfig c = small_desk();
    const auto files = reproduce_figure(c, Figure::PhaseProfiles, dir);
    for (const auto& f : files) {
        CHECK(std::filesystem::exists(f));
    }
    CHECK(count_lines(dir / "blocks.csv") == c.partition().n_blocks + 1);
    CHECK(count_lines(dir / "characteristic_blocks.csv") == 4);
    const RunConfig back = load_config(dir / "run_config.txt", RunConfig::paper());
    CHECK(back.hash() == c.hash());
    std::filesystem::remove_all(dir);
}
