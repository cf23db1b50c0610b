// SPDX-License-Identifier: Apache-2.0
#include "eepn/phase_noise.hpp"

#include "eepn/errors.hpp"
#include "eepn/rng.hpp"

#include <cmath>
#include <numbers>

namespace eepn {

double wiener_increment_variance(double linewidth_hz, double sample_period_s)
{
    detail::require(linewidth_hz >= 0.0 && std::isfinite(linewidth_hz), "linewidth must be >= 0");
    detail::require(sample_period_s > 0.0, "sample_period must be > 0");
    return 2.0 * std::numbers::pi * linewidth_hz * sample_period_s;
}

PhaseTrajectory generate_wiener_phase(std::size_t n_samples, double linewidth_hz, double sample_period_s,
                                      std::uint64_t seed)
{
    detail::require(n_samples > 0, "phase trajectory needs at least one sample");
    const double sigma = std::sqrt(wiener_increment_variance(linewidth_hz, sample_period_s));

    PhaseTrajectory traj;
    traj.sample_period = sample_period_s;
    traj.phases.assign(n_samples, 0.0);
    if (sigma == 0.0) {
        return traj;
    }
    Rng rng = make_rng(seed);
    std::normal_distribution<double> step(0.0, sigma);
    for (std::size_t k = 1; k < n_samples; ++k) {
        traj.phases[k] = traj.phases[k - 1] + step(rng);
    }
    return traj;
}

ComplexSignal apply_phase(const ComplexSignal& signal, const PhaseTrajectory& trajectory)
{
    detail::require(signal.size() == trajectory.size(), "phase trajectory and signal lengths differ");
    CVec out(signal.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = signal.samples()[k] * std::polar(1.0, trajectory.phases[k]);
    }
    return {std::move(out), signal.sample_rate()};
}

} // namespace eepn
