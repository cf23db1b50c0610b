// SPDX-License-Identifier: Apache-2.0
#include "eepn/analysis.hpp"
#include "eepn/dsp.hpp"
#include "eepn/errors.hpp"
#include "eepn/mitigation.hpp"
#include "eepn/transceiver.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

using namespace eepn;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRs = 180e9;
constexpr double kRolloff = 0.05;

FrequencyPhaseProfile profile_of(const std::function<double(double)>& phi)
{
    FrequencyPhaseProfile p;
    p.grid = FrequencyGrid::centered(256, kRs);
    p.symbol_rate = kRs;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        p.phase.push_back(phi(p.grid[i]));
        p.weight.push_back(1.0);
    }
    return p;
}

// shaped link with a phase error phi(f) applied between transmitter and matched filter
struct Link {
    SymbolSequence x;
    SymbolSequence y;
    CVec oversampled;
};

Link make_link(const std::function<double(double)>& phi, std::size_t n = 16384)
{
    Link l;
    l.x = generate_symbols(n, Constellation::Qam16, kRs, 21);
    const auto tx = sc_modulate(l.x, kRolloff, 2);
    const auto rx = apply_frequency_response(tx, [&](double f) { return std::polar(1.0, phi(f)); });
    const auto mf = matched_filter(rx, kRolloff, 2);
    l.oversampled = mf.samples();
    l.y = {CVec(n), kRs, Constellation::Qam16};
    for (std::size_t k = 0; k < n; ++k) {
        l.y.symbols[k] = l.oversampled[2 * k];
    }
    return l;
}

double relative_error_db(const CVec& a, const CVec& b, std::size_t begin, std::size_t end)
{
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
        num += std::norm(a[k] - b[k]);
        den += std::norm(b[k]);
    }
    return 10.0 * std::log10(num / den);
}

} // namespace

TEST_CASE("zero target designs the identity")
{
    const auto d = design_allpass(profile_of([](double) { return 0.0; }), 61);
    REQUIRE(d.filter.size() == 61);
    CHECK(d.filter.nominal_delay == 30);
    CHECK(std::abs(d.filter.taps[30] - 1.0) < 1e-12);
    for (std::size_t m = 0; m < 61; ++m) {
        if (m != 30) {
            CHECK(std::abs(d.filter.taps[m]) < 1e-12);
        }
    }
    CHECK(d.magnitude_ripple_db < 1e-9);
    CHECK(d.phase_error_max < 1e-9);
}

TEST_CASE("design validation")
{
    const auto p = profile_of([](double) { return 0.0; });
    CHECK_THROWS_AS((void)design_allpass(p, 60), ParameterError);
    // 40 samples of bulk delay at 2 samples per symbol exceed 30 samples of capacity
    const auto far = profile_of([](double f) { return 2.0 * kPi * f * 20.0 / kRs; });
    CHECK_THROWS_AS((void)design_allpass(far, 61), DesignError);
    CHECK_NOTHROW((void)design_allpass(far, 101));
    CHECK(parse_reversal_mode(to_string(ReversalMode::OptimizedTiming)) == ReversalMode::OptimizedTiming);
    CHECK_THROWS_AS((void)parse_reversal_mode("cubic"), ParameterError);
}

TEST_CASE("design follows a smooth target within the band")
{
    const auto target = profile_of([](double f) {
        const double u = f / (kRs / 2);
        return 0.4 * u * u - 0.3 * u * u * u + 0.2 * u;
    });
    const auto d = design_allpass(target, 61);
    CHECK(d.magnitude_ripple_db < 0.1);
    CHECK(d.phase_error_rms < 0.01);
    for (std::size_t i = 0; i < target.size(); ++i) {
        CHECK(std::abs(d.achieved.phase[i] - target.phase[i]) <= d.phase_error_max + 1e-15);
    }
}

TEST_CASE("filtering with a target and then its negation restores the signal")
{
    const auto x = generate_symbols(8192, Constellation::Qam16, kRs, 22);
    const CVec s = sc_modulate(x, kRolloff, 2).samples();
    const auto fwd = profile_of([](double f) { return 0.8 * std::sin(2.0 * kPi * f / kRs); });
    FrequencyPhaseProfile back = fwd;
    for (auto& v : back.phase) {
        v = -v;
    }
    const CVec there = apply_allpass(s, design_allpass(fwd, 61));
    const CVec again = apply_allpass(there, design_allpass(back, 61));
    REQUIRE(again.size() == s.size());
    CHECK(relative_error_db(again, s, 400, s.size() - 400) < -40.0);
}

TEST_CASE("a linear phase error is reversed as a fractional delay")
{
    // 0.62 rad across one symbol-rate bandwidth is 0.62 / (2 pi) = 0.0987 UI
    const double d = 0.62 / (2.0 * kPi);
    const Link l = make_link([&](double f) { return -2.0 * kPi * f * d / kRs; });
    const auto part = BlockPartition::over(1024, 1024 + 6 * 2048, 2048);
    const auto before = analyze_block(l.x, l.y, part, 2);
    // the aliased rolloff at the band edges pulls the symbol-rate estimate about 5 % low
    CHECK(before.timing_offset_ui == doctest::Approx(-d).epsilon(0.07));

    for (const auto mode : {ReversalMode::OptimizedTiming, ReversalMode::HigherOrder}) {
        const auto m = mitigate(l.x, l.y, l.oversampled, part, mode);
        REQUIRE(m.blocks.size() == 6);
        for (const auto& b : m.blocks) {
            CHECK(b.after.snr_db > b.before.snr_db + 10.0);
            CHECK(b.after.snr_db > 30.0);
            CHECK(std::abs(b.after.timing_offset_ui) < 0.01);
        }
    }
}

TEST_CASE("higher order reverses a quadratic error that timing cannot")
{
    const Link l = make_link([](double f) {
        const double u = f / (kRs / 2);
        return 0.6 * u * u;
    });
    const auto part = BlockPartition::over(1024, 1024 + 4 * 2048, 2048);
    const auto ot = mitigate(l.x, l.y, l.oversampled, part, ReversalMode::OptimizedTiming);
    const auto ho = mitigate(l.x, l.y, l.oversampled, part, ReversalMode::HigherOrder);
    for (std::size_t b = 0; b < part.n_blocks; ++b) {
        const double before = ot.blocks[b].before.max_excursion_rad;
        CHECK(before > 0.5);
        CHECK(ot.blocks[b].after.max_excursion_rad > 0.5 * before);
        CHECK(ho.blocks[b].after.max_excursion_rad < 0.1 * before);
        CHECK(ho.blocks[b].after.max_excursion_rad <= ot.blocks[b].after.max_excursion_rad + 1e-6);
        CHECK(ho.blocks[b].after.snr_db > ot.blocks[b].after.snr_db);
        CHECK(ho.blocks[b].residual_phase_error_rad < 0.06);
    }
}

TEST_CASE("reversal leaves an unimpaired link unchanged")
{
    const Link l = make_link([](double) { return 0.0; });
    const auto part = BlockPartition::over(1024, 1024 + 4 * 2048, 2048);
    MitigationOptions opts;
    opts.passes = 2;
    const auto m = mitigate(l.x, l.y, l.oversampled, part, ReversalMode::HigherOrder, 61, opts);
    for (const auto& b : m.blocks) {
        // both sides are limited by the RRC truncation, about 40 dB
        CHECK(std::abs(b.after.snr_db - b.before.snr_db) < 0.5);
        CHECK(b.after.snr_db > 35.0);
    }
}

TEST_CASE("mitigate input validation")
{
    const Link l = make_link([](double) { return 0.0; }, 4096);
    const auto part = BlockPartition::over(0, 4096, 2048);
    CHECK_THROWS_AS((void)mitigate(l.x, l.y, std::span<const cplx>(l.oversampled).first(100), part,
                                   ReversalMode::HigherOrder),
                    ConfigurationError);
    MitigationOptions symbol_rate;
    symbol_rate.design.oversampling = 1;
    CHECK_NOTHROW((void)mitigate(l.x, l.y, {}, part, ReversalMode::HigherOrder, 61, symbol_rate));
}
