// Adaptive integration of the master evolution equation.
//
// Dormand-Prince 5(4) with a proportional-integral step controller. The
// solver is the numerical reference against which the closed forms in
// analytic.hpp / fourier.hpp are checked.

#pragma once

#include "cuq/core.hpp"

#include <cstddef>
#include <variant>
#include <vector>

namespace cuq {

struct ControllerStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    double max_local_error = 0.0;  // largest accepted scaled error estimate (<= 1)
    double min_step = 0.0;
    double max_step_taken = 0.0;
};

struct IntegratorOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    // Hard cap on the step; 0 means "derive from the model" (see evolve()).
    double max_step = 0.0;
    // When non-empty, the samples are exactly these times (strictly increasing,
    // inside (0, tau_end]) plus tau = 0; the integrator lands on each of them.
    std::vector<double> output_times;
    std::size_t max_steps = 50'000'000;
};

class Trajectory {
public:
    Trajectory(QubitModel model, std::vector<BlochState> samples, std::vector<Vec3> slopes,
               ControllerStats stats);

    const QubitModel& model() const noexcept { return model_; }
    const std::vector<BlochState>& samples() const noexcept { return samples_; }
    const ControllerStats& controller_stats() const noexcept { return stats_; }
    std::size_t size() const noexcept { return samples_.size(); }
    const BlochState& front() const { return samples_.front(); }
    const BlochState& back() const { return samples_.back(); }

    // Cubic Hermite interpolation between stored samples; throws
    // InvalidArgument outside [front().tau(), back().tau()].
    Vec3 at(double tau) const;

private:
    QubitModel model_;
    std::vector<BlochState> samples_;
    std::vector<Vec3> slopes_;
    ControllerStats stats_;
};

// Integrates from b0 at tau = 0 to tau_end.
//
// Unless options.max_step is set, the step is capped at
//   * tau_end / 64,
//   * P^/64 with P^ = 2 pi r / sqrt(1 - r^2) when r < 1,
//   * 2 pi r / 32 when r < 0.05,
// so that r < 1 runs keep at least 64 samples per oscillation period.
//
// Throws InvalidArgument for tau_end <= 0 or tolerances outside (0, 1e-2],
// StepSizeUnderflow when the controller cannot meet the tolerance.
Trajectory evolve(const QubitModel& model, const Vec3& b0, double tau_end, double rel_tol = 1e-9,
                  double abs_tol = 1e-12);
Trajectory evolve(const QubitModel& model, const Vec3& b0, double tau_end, const IntegratorOptions& options);

// Uniform grid with n samples per P^ (r < 1 only), ending at tau_end.
std::vector<double> periodic_output_grid(double r, double tau_end, int samples_per_period);

struct NonConvergent {
    double tau;             // time at which the classification was made
    double amplitude;       // latest per-period oscillation amplitude of |db/dtau|
    double earlier_amplitude;  // the same, ten periods earlier
};

struct AsymptoteOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
};

using AsymptoteResult = std::variant<Vec3, NonConvergent>;

// Runs until |db/dtau| < settle_tol has held over one tau unit (returns b) or
// until the per-period oscillation amplitude of |db/dtau| has failed to decay by
// 1% over 10 estimated periods (returns NonConvergent; only possible for r < 1).
// Throws NumericalError when max_tau is reached without either outcome.
AsymptoteResult evolve_to_asymptote(const QubitModel& model, const Vec3& b0, double settle_tol,
                                    double max_tau, const AsymptoteOptions& options = {});

}  // namespace cuq
