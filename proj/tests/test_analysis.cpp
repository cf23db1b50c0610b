// SPDX-License-Identifier: Apache-2.0
#include "eepn/analysis.hpp"
#include "eepn/dsp.hpp"
#include "eepn/errors.hpp"
#include "eepn/transceiver.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

using namespace eepn;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRs = 180e9;

// y = x through exp(j*phi(f)), applied circularly at the symbol rate
SymbolSequence through_phase(const SymbolSequence& x, const std::function<double(double)>& phi)
{
    const auto out = apply_frequency_response(ComplexSignal(x.symbols, x.symbol_rate),
                                              [&](double f) { return std::polar(1.0, phi(f)); });
    return {out.samples(), x.symbol_rate, x.constellation};
}

// weighted RMS of the profile against phi, after removing the best constant offset
double profile_error(const FrequencyPhaseProfile& p, const std::function<double(double)>& phi, bool remove_mean)
{
    double w = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        mean += p.weight[i] * (p.phase[i] - phi(p.grid[i]));
        w += p.weight[i];
    }
    mean = remove_mean ? mean / w : 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p.phase[i] - phi(p.grid[i]) - mean;
        acc += p.weight[i] * d * d;
    }
    return std::sqrt(acc / w);
}

FrequencyPhaseProfile synthetic_profile(const std::function<double(double)>& phi, std::size_t n = 256)
{
    FrequencyPhaseProfile p;
    p.grid = FrequencyGrid::centered(n, kRs);
    p.symbol_rate = kRs;
    for (std::size_t i = 0; i < n; ++i) {
        p.phase.push_back(phi(p.grid[i]));
        p.weight.push_back(1.0 + 0.5 * std::cos(2.0 * kPi * p.grid[i] / kRs));
    }
    return p;
}

} // namespace

TEST_CASE("partition covers whole blocks only")
{
    const auto p = BlockPartition::over(100, 10000, 2048);
    CHECK(p.n_blocks == 4);
    CHECK(p.block_begin(0) == 100);
    CHECK(p.block_end(3) == 100 + 4 * 2048);
    CHECK(p.end() == 8292);
    CHECK(BlockPartition::over(0, 2047, 2048).n_blocks == 0);
    const BlockPartition empty_blocks{0, 1, 0};
    CHECK_THROWS_AS(empty_blocks.validate(), ParameterError);
}

TEST_CASE("block SNR removes a complex gain and measures additive error")
{
    const auto x = generate_symbols(4096, Constellation::Qam16, kRs, 1);
    SymbolSequence y = x;
    for (auto& s : y.symbols) {
        s *= std::polar(0.7, 0.4);
    }
    const auto part = BlockPartition::over(0, 4096, 2048);
    for (double v : blockwise_snr(x, y, part)) {
        CHECK(v == kSnrCapDb);
    }

    // error orthogonal to x on each block: alternating sign on a pair of equal symbols leaves the LS gain at 1
    SymbolSequence z = x;
    for (std::size_t k = 0; k < z.size(); ++k) {
        z.symbols[k] += 0.1 * x.symbols[k] * ((k % 2) ? cplx{0, 1} : cplx{0, -1});
    }
    const auto snr = blockwise_snr(x, z, part);
    double px = 0.0;
    double pe = 0.0;
    cplx num{};
    double den = 0.0;
    for (std::size_t k = 0; k < 2048; ++k) {
        num += x.symbols[k] * std::conj(z.symbols[k]);
        den += std::norm(z.symbols[k]);
    }
    const cplx a = num / den;
    for (std::size_t k = 0; k < 2048; ++k) {
        px += std::norm(x.symbols[k]);
        pe += std::norm(x.symbols[k] - a * z.symbols[k]);
    }
    CHECK(snr[0] == doctest::Approx(10.0 * std::log10(px / pe)).epsilon(1e-12));
    CHECK(snr[0] == doctest::Approx(20.0).epsilon(0.01));
}

TEST_CASE("CPSD profile recovers a sinusoidal phase error")
{
    const auto x = generate_symbols(16384, Constellation::Qam16, kRs, 2);
    const auto phi = [](double f) { return 0.5 * std::sin(2.0 * kPi * f / kRs); };
    const auto y = through_phase(x, phi);
    const auto p = estimate_phase_error(x, y, 4096, 4096 + 2048);
    CHECK(p.size() == 256);
    CHECK(p.grid.monotone());
    CHECK(profile_error(p, phi, false) < 0.01);
}

TEST_CASE("CPSD phase sign: a delay gives a negative slope and negative timing offset")
{
    const auto x = generate_symbols(16384, Constellation::Qam16, kRs, 3);
    const double d = 0.1 / kRs;
    const auto y = through_phase(x, [&](double f) { return -2.0 * kPi * f * d; });
    const auto part = BlockPartition::over(4096, 4096 + 2048, 2048);
    const auto r = analyze_block(x, y, part, 0);
    CHECK(r.timing_offset_ui == doctest::Approx(-0.1).epsilon(0.01));
    CHECK(r.fit_order_selected == 1);
    CHECK_FALSE(r.degraded);
    CHECK(r.fits.size() == kMaxFitOrder);
    CHECK(r.max_excursion_rad == doctest::Approx(2.0 * kPi * 0.1).epsilon(0.05));
}

TEST_CASE("polynomial fit recovers exact coefficients")
{
    const double norm = kRs / 2.0;
    const auto p = synthetic_profile([&](double f) { return 0.2 + 0.31 * (f / norm) * (f / norm); });
    const auto fit = fit_polynomial(p, 2);
    REQUIRE(fit.order() == 2);
    CHECK(std::abs(fit.coefficients[0] - 0.2) < 1e-6);
    CHECK(std::abs(fit.coefficients[1]) < 1e-6);
    CHECK(std::abs(fit.coefficients[2] - 0.31) < 1e-6);
    CHECK(fit.residual_rms < 1e-9);
    CHECK(fit.norm_hz == norm);
    CHECK(fit.per_hz(2) == doctest::Approx(0.31 / (norm * norm)));
    CHECK(fit.evaluate(norm) == doctest::Approx(0.51));
    CHECK(explained_variance(p, fit) == doctest::Approx(1.0));
    CHECK(select_fit_order(p) == 2);
    CHECK(residual_phase_error(p) > 0.1);
}

TEST_CASE("fit residual does not increase with order")
{
    const auto p = synthetic_profile([](double f) { return std::sin(3.0 * f / kRs) + 0.2 * std::cos(9.0 * f / kRs); });
    double last = 1e9;
    for (int k = 1; k <= kMaxFitOrder; ++k) {
        const double r = fit_polynomial(p, k).residual_rms;
        CHECK(r <= last + 1e-12);
        last = r;
    }
}

TEST_CASE("linear profile: timing offset from the slope")
{
    // a full 2*pi change across one symbol-rate bandwidth is one unit interval
    const auto p = synthetic_profile([](double f) { return 2.0 * kPi * 0.3 * f / kRs; });
    const auto fit = fit_polynomial(p, 1);
    CHECK(timing_offset_from_slope(fit, kRs) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(select_fit_order(p) == 1);
    CHECK(max_excursion(p) == doctest::Approx(2.0 * kPi * 0.3 * 255.0 / 256.0).epsilon(1e-9));
}

TEST_CASE("residual phase error ignores a constant phase")
{
    const auto p = synthetic_profile([](double) { return 1.3; });
    CHECK(residual_phase_error(p) < 1e-9);
    CHECK(max_excursion(p) == 0.0);
}

TEST_CASE("unwrapping from an anchor")
{
    std::vector<double> v{0.0, 3.0, -3.0, -1.0};
    unwrap_from(v, 0);
    CHECK(v[2] == doctest::Approx(2.0 * kPi - 3.0));
    CHECK(v[3] == doctest::Approx(2.0 * kPi - 1.0));
    std::vector<double> w{0.0, 3.0, -3.0, -1.0};
    unwrap_from(w, 3);
    CHECK(w[3] == -1.0);
    CHECK(w[1] == doctest::Approx(3.0 - 2.0 * kPi));
}

TEST_CASE("profile helpers")
{
    const auto p = synthetic_profile([](double f) { return f / kRs; }, 8);
    CHECK(p.phase_at(p.grid[2]) == doctest::Approx(p.phase[2]));
    CHECK(p.phase_at(0.5 * (p.grid[2] + p.grid[3])) == doctest::Approx(0.5 * (p.phase[2] + p.phase[3])));
    CHECK(p.phase_at(1e15) == p.phase.back());
    const auto d = p.minus(p);
    for (double v : d.phase) {
        CHECK(v == 0.0);
    }
    const auto c = synthetic_profile([](double) { return 0.25; });
    CHECK(band_average_phase(c, -kRs / 4, kRs / 4) == doctest::Approx(0.25));
    const auto wrap = synthetic_profile([](double f) { return f < 0 ? kPi - 0.1 : -kPi + 0.1; });
    CHECK(std::abs(std::abs(band_average_phase(wrap, -kRs, kRs)) - kPi) < 0.11);
}

TEST_CASE("Spearman rank correlation")
{
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{10, 20, 30, 45};
    const std::vector<double> r{4, 3, 2, 1};
    CHECK(spearman(a, b) == doctest::Approx(1.0));
    CHECK(spearman(a, r) == doctest::Approx(-1.0));
    const std::vector<double> ties{1, 2, 2, 3};
    CHECK(spearman(ties, a) == doctest::Approx(4.5 / std::sqrt(4.5 * 5.0)));
    CHECK_THROWS_AS((void)spearman(a, std::vector<double>{1, 2}), ParameterError);
}

TEST_CASE("phase ambiguity resolution picks the quadrant")
{
    const auto x = generate_symbols(1000, Constellation::Qam16, kRs, 4);
    SymbolSequence y = x;
    for (auto& s : y.symbols) {
        s *= std::polar(1.0, -kPi / 2 + 0.05);
    }
    const double rot = resolve_phase_ambiguity(x, y, 0, 1000, ConstellationMap::symmetry());
    CHECK(rot == doctest::Approx(-kPi / 2));
    CHECK(std::arg(y.symbols[0] / x.symbols[0]) == doctest::Approx(0.05));
}
