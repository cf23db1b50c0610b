// SPDX-License-Identifier: Apache-2.0
#include "eepn/analysis.hpp"
#include "eepn/dsp.hpp"
#include "eepn/errors.hpp"
#include "eepn/transceiver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace eepn;

namespace {

constexpr double kPi = std::numbers::pi;

double mse(const CVec& a, const CVec& b, std::size_t begin, std::size_t end)
{
    double acc = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
        acc += std::norm(a[k] - b[k]);
    }
    return acc / static_cast<double>(end - begin);
}

double mean_phase(const CVec& y, const CVec& x, std::size_t begin, std::size_t end)
{
    cplx acc{};
    for (std::size_t k = begin; k < end; ++k) {
        acc += y[k] * std::conj(x[k]);
    }
    return std::arg(acc);
}

} // namespace

TEST_CASE("16-QAM alphabet has unit energy and corner magnitude sqrt(1.8)")
{
    const ConstellationMap m(Constellation::Qam16);
    REQUIRE(m.points().size() == 16);
    double e = 0.0;
    double corner = 0.0;
    for (const auto& p : m.points()) {
        e += std::norm(p);
        corner = std::max(corner, std::abs(p));
    }
    CHECK(e / 16.0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(corner == doctest::Approx(std::sqrt(18.0 / 10.0)).epsilon(1e-14));
    CHECK(corner == doctest::Approx(1.3416).epsilon(1e-4));

    for (auto c : {Constellation::Qpsk, Constellation::Qam64}) {
        const ConstellationMap q(c);
        double eq = 0.0;
        for (const auto& p : q.points()) {
            eq += std::norm(p);
        }
        CHECK(eq / static_cast<double>(q.points().size()) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("slicing returns the nearest point")
{
    const ConstellationMap m(Constellation::Qam16);
    const double a = 1.0 / std::sqrt(10.0);
    CHECK(m.slice({0.9 * a, 1.2 * a}) == cplx{a, a});
    CHECK(m.slice({10.0, -10.0}) == cplx{3 * a, -3 * a});
    CHECK(m.distance2({a, a}) == 0.0);
    CHECK(parse_constellation(to_string(Constellation::Qam64)) == Constellation::Qam64);
    CHECK_THROWS_AS((void)parse_constellation("8psk"), ParameterError);
}

TEST_CASE("generated symbols are deterministic, on the alphabet and near unit power")
{
    const auto a = generate_symbols(20000, Constellation::Qam16, 180e9, 11);
    const auto b = generate_symbols(20000, Constellation::Qam16, 180e9, 11);
    CHECK(a.symbols == b.symbols);
    const ConstellationMap m(Constellation::Qam16);
    double p = 0.0;
    for (const auto& s : a.symbols) {
        CHECK(m.distance2(s) == 0.0);
        p += std::norm(s);
    }
    CHECK(p / 20000.0 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("single symbol modulates to the RRC pulse at its own instant")
{
    SymbolSequence s{CVec(200), 1.0, Constellation::Qam16};
    s.symbols[100] = 1.0;
    const auto tx = sc_modulate(s, 0.05, 2);
    const auto h = rrc_taps(0.05, kDefaultRrcSpan, 2);
    CHECK(tx.size() == 400);
    const std::size_t peak = 200;
    for (int d = -20; d <= 20; ++d) {
        const auto k = static_cast<std::size_t>(static_cast<int>(peak) + d);
        const auto t = static_cast<std::size_t>(h.nominal_delay + d);
        CHECK(std::abs(tx.samples()[k] / tx.samples()[peak] - h.taps[t] / h.taps[h.nominal_delay]) < 1e-12);
    }
}

TEST_CASE("back-to-back SC link returns the symbols")
{
    const auto x = generate_symbols(8192, Constellation::Qam16, 180e9, 3);
    const auto tx = sc_modulate(x, 0.05, 2);
    CHECK(tx.mean_power() == doctest::Approx(1.0).epsilon(0.03));
    const auto y = matched_filter_and_downsample(tx, 0.05, 2, 0, Constellation::Qam16);
    REQUIRE(y.size() == x.size());
    // truncated RRC tails, see the cascade ISI test
    CHECK(mse(y.symbols, x.symbols, 200, 8000) < 1e-4);

    const auto mf = matched_filter(tx, 0.05, 2);
    for (std::size_t k = 0; k < x.size(); k += 97) {
        CHECK(std::abs(mf.samples()[2 * k] - y.symbols[k]) < 1e-12);
    }
}

TEST_CASE("round-robin split and interleave are inverse")
{
    const auto x = generate_symbols(64, Constellation::Qpsk, 8.0, 1);
    const auto streams = split_round_robin(x, 8);
    REQUIRE(streams.size() == 8);
    CHECK(streams[3].symbols[2] == x.symbols[19]);
    CHECK(streams[0].symbol_rate == 1.0);
    CHECK(interleave_round_robin(streams).symbols == x.symbols);
    CHECK_THROWS_AS((void)split_round_robin(generate_symbols(63, Constellation::Qpsk, 1.0, 1), 8), ParameterError);
}

TEST_CASE("contiguous MC layout")
{
    const auto mc = McConfig::contiguous(8, 180e9, 0.05);
    CHECK(mc.per_subcarrier_rate == doctest::Approx(22.5e9));
    CHECK(mc.subcarrier_spacing == doctest::Approx(23.625e9));
    CHECK(mc.center(0) == doctest::Approx(-3.5 * 23.625e9));
    CHECK(mc.center(7) == doctest::Approx(3.5 * 23.625e9));
    CHECK(mc.occupied_bandwidth(0.05) == doctest::Approx(189e9));
}

TEST_CASE("back-to-back MC link returns the symbols")
{
    const auto mc = McConfig::contiguous(8, 180e9, 0.05);
    const auto x = generate_symbols(8 * 4096, Constellation::Qam16, 180e9, 4);
    const auto tx = mc_modulate(x, mc, 0.05, 2);
    CHECK(tx.sample_rate() == doctest::Approx(360e9));
    CHECK(tx.mean_power() == doctest::Approx(1.0).epsilon(0.03));
    const auto streams = mc_demodulate(tx, mc, 0.05, Constellation::Qam16);
    REQUIRE(streams.size() == 8);
    const auto y = interleave_round_robin(streams);
    CHECK(mse(y.symbols, x.symbols, 8 * 200, 8 * 3900) < 1e-4);
}

TEST_CASE("a delay rotates MC subcarriers in proportion to their center frequency")
{
    const auto mc = McConfig::contiguous(8, 180e9, 0.05);
    const auto x = generate_symbols(8 * 2048, Constellation::Qam16, 180e9, 5);
    const auto tx = mc_modulate(x, mc, 0.05, 2);
    const double tau = 0.25 / tx.sample_rate();
    const auto delayed = apply_frequency_response(tx, [&](double f) { return std::polar(1.0, -2.0 * kPi * f * tau); });
    const auto streams = mc_demodulate(delayed, mc, 0.05, Constellation::Qam16);
    const auto ref = split_round_robin(x, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        const double expected = -2.0 * kPi * mc.center(i) * tau;
        CHECK(mean_phase(streams[i].symbols, ref[i].symbols, 100, 1900) == doctest::Approx(expected).epsilon(0.01));
    }
}

TEST_CASE("BPS tracks a slow phase and leaves only the pi/2 ambiguity")
{
    auto x = generate_symbols(20000, Constellation::Qam16, 1.0, 6);
    SymbolSequence y = x;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double phi = 0.3 + 2.0 * std::sin(2.0 * kPi * static_cast<double>(k) / 20000.0);
        y.symbols[k] *= std::polar(1.0, phi);
    }
    BpsConfig cfg;
    cfg.window_symbols = 65;
    const auto r = bps(y, cfg);
    REQUIRE(r.estimate.size() == y.size());
    // unwrapped estimate follows the trajectory up to a constant multiple of pi/2
    const double offset = r.estimate.phases[100] - (0.3 + 2.0 * std::sin(2.0 * kPi * 100.0 / 20000.0));
    const double quadrant = std::round(offset / (kPi / 2));
    CHECK(std::abs(offset - quadrant * kPi / 2) < 0.03);
    for (std::size_t k = 100; k < 19900; k += 50) {
        const double phi = 0.3 + 2.0 * std::sin(2.0 * kPi * static_cast<double>(k) / 20000.0);
        CHECK(std::abs(r.estimate.phases[k] - phi - quadrant * kPi / 2) < 0.03);
    }

    SymbolSequence corrected = r.corrected;
    const double rot = resolve_phase_ambiguity(x, corrected, 100, 19900, ConstellationMap::symmetry());
    CHECK(std::abs(std::remainder(rot + quadrant * kPi / 2, 2 * kPi)) < 1e-12);
    // test-phase quantization: uniform error over one step of pi/128
    CHECK(mse(corrected.symbols, x.symbols, 100, 19900) < std::pow(kPi / 128.0, 2) / 12.0 * 1.5);
}

TEST_CASE("BPS validation")
{
    BpsConfig cfg;
    cfg.window_symbols = 64;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg.window_symbols = 65;
    cfg.n_test_phases = 0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}
