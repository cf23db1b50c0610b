// SPDX-License-Identifier: Apache-2.0
#include "eepn/errors.hpp"
#include "eepn/phase_noise.hpp"
#include "eepn/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace eepn;

TEST_CASE("increment variance at the long-haul operating point")
{
    // 2*pi * 70 kHz / 360 GS/s
    const double expected = 2.0 * std::numbers::pi * 70e3 / 360e9;
    CHECK(wiener_increment_variance(70e3, 1.0 / 360e9) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(wiener_increment_variance(70e3, 1.0 / 360e9) == doctest::Approx(1.2217e-6).epsilon(1e-4));
    CHECK(wiener_increment_variance(0.0, 1.0) == 0.0);
    CHECK_THROWS_AS((void)wiener_increment_variance(-1.0, 1.0), ParameterError);
    CHECK_THROWS_AS((void)wiener_increment_variance(1.0, 0.0), ParameterError);
}

TEST_CASE("trajectory starts at zero and is reproducible per seed")
{
    const auto a = generate_wiener_phase(1000, 70e3, 1.0 / 360e9, 42);
    const auto b = generate_wiener_phase(1000, 70e3, 1.0 / 360e9, 42);
    const auto c = generate_wiener_phase(1000, 70e3, 1.0 / 360e9, 43);
    CHECK(a.phases.front() == 0.0);
    CHECK(a.phases == b.phases);
    CHECK(a.phases != c.phases);
    CHECK(a.sample_period == doctest::Approx(1.0 / 360e9));
    CHECK_THROWS_AS((void)generate_wiener_phase(0, 70e3, 1.0, 1), ParameterError);
}

TEST_CASE("zero linewidth gives an all-zero trajectory")
{
    const auto t = generate_wiener_phase(500, 0.0, 1e-12, 9);
    for (double p : t.phases) {
        CHECK(p == 0.0);
    }
}

TEST_CASE("mean-square phase difference grows linearly with lag")
{
    // exaggerated linewidth keeps the statistics quick; the law does not depend on scale
    const double ts = 1e-9;
    const double lw = 1e5;
    const double s2 = wiener_increment_variance(lw, ts);
    const auto t = generate_wiener_phase(2'000'000, lw, ts, 5);
    for (std::size_t lag : {1UL, 10UL, 100UL}) {
        double acc = 0.0;
        std::size_t n = 0;
        // non-overlapping differences are independent, so the relative error is sqrt(2/n)
        for (std::size_t k = 0; k + lag < t.size(); k += lag) {
            const double d = t.phases[k + lag] - t.phases[k];
            acc += d * d;
            ++n;
        }
        const double msd = acc / static_cast<double>(n);
        const double tol = 5.0 * std::sqrt(2.0 / static_cast<double>(n));
        CHECK(msd / (s2 * static_cast<double>(lag)) == doctest::Approx(1.0).epsilon(tol));
    }
}

TEST_CASE("apply_phase rotates each sample and keeps magnitudes")
{
    const ComplexSignal s(CVec{{1, 0}, {0, 2}, {3, -1}}, 2.0);
    PhaseTrajectory zero{{0.0, 0.0, 0.0}, 0.5};
    CHECK(apply_phase(s, zero).samples() == s.samples());

    PhaseTrajectory constant{{0.4, 0.4, 0.4}, 0.5};
    const auto rotated = apply_phase(s, constant);
    for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(std::abs(rotated.samples()[k] - s.samples()[k] * std::polar(1.0, 0.4)) < 1e-15);
    }

    const auto w = generate_wiener_phase(3, 1e9, 1e-9, 1);
    const auto out = apply_phase(s, w);
    for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(std::abs(out.samples()[k]) == doctest::Approx(std::abs(s.samples()[k])).epsilon(1e-12));
    }
    CHECK(out.energy() == doctest::Approx(s.energy()).epsilon(1e-12));

    PhaseTrajectory wrong{{0.0}, 0.5};
    CHECK_THROWS_AS((void)apply_phase(s, wrong), ParameterError);
}
