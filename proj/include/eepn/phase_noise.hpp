// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eepn/signal.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace eepn {

/// Per-sample phase in radians.
struct PhaseTrajectory {
    std::vector<double> phases;
    double sample_period = 1.0; ///< seconds

    [[nodiscard]] std::size_t size() const noexcept { return phases.size(); }
};

/// Variance of one Wiener increment, 2*pi*linewidth*sample_period (rad^2).
[[nodiscard]] double wiener_increment_variance(double linewidth_hz, double sample_period_s);

/// Laser phase noise as a Wiener process: phi[0] = 0, phi[k+1] = phi[k] + N(0, 2*pi*linewidth*T).
/// Identical seeds give identical trajectories.
[[nodiscard]] PhaseTrajectory generate_wiener_phase(std::size_t n_samples, double linewidth_hz, double sample_period_s,
                                                    std::uint64_t seed);

/// out[k] = in[k] * exp(j*phi[k]).
[[nodiscard]] ComplexSignal apply_phase(const ComplexSignal& signal, const PhaseTrajectory& trajectory);

} // namespace eepn
