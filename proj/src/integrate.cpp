#include "cuq/integrate.hpp"

#include "cuq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>

namespace cuq {

namespace {

constexpr double kPi = std::numbers::pi;

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b*, the embedded 4th-order error weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kAlpha = 0.17;  // 0.2 - 0.75 * beta
constexpr double kBeta = 0.04;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

double period_hat(double r) { return 2.0 * kPi * r / std::sqrt(1.0 - r * r); }

double default_max_step(double r, double tau_end) {
    double h = tau_end / 64.0;
    if (r < 1.0) h = std::min(h, period_hat(r) / 64.0);
    if (r < 0.05) h = std::min(h, 2.0 * kPi * r / 32.0);
    return h;
}

void check_tolerances(double rel_tol, double abs_tol) {
    auto ok = [](double t) { return t > 0.0 && t <= 1e-2; };
    if (!ok(rel_tol) || !ok(abs_tol)) {
        std::ostringstream os;
        os << "invalid tolerance (rel_tol = " << rel_tol << ", abs_tol = " << abs_tol
           << "); both must lie in (0, 1e-2]";
        throw InvalidArgument(os.str());
    }
}

double error_norm(const Vec3& err, const Vec3& y0, const Vec3& y1, double rel_tol, double abs_tol) {
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double sc = abs_tol + rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        sum += (err(i) / sc) * (err(i) / sc);
    }
    return std::sqrt(sum / 3.0);
}

struct RunConfig {
    double rel_tol;
    double abs_tol;
    double max_step;
    double tau_end;
    const std::vector<double>* stops;  // optional landing points
    std::size_t max_steps;
};

// Drives the integration and hands every accepted node (including tau = 0) to
// `observe(tau, b, f)`; the run stops early when the observer returns false.
template <class Observer>
ControllerStats run(const QubitModel& model, const Vec3& b0, const RunConfig& cfg, Observer&& observe) {
    ControllerStats stats;
    auto rhs = [&](const Vec3& b) {
        ++stats.rhs_evaluations;
        return bloch_derivative(b, model);
    };

    double tau = 0.0;
    Vec3 y = b0;
    Vec3 f = rhs(y);
    if (!observe(tau, y, f)) return stats;

    // Initial step (Hairer, Nørsett & Wanner, II.4).
    double h;
    {
        Vec3 sc;
        for (int i = 0; i < 3; ++i) sc(i) = cfg.abs_tol + cfg.rel_tol * std::abs(y(i));
        const double d0 = std::sqrt(y.cwiseQuotient(sc).squaredNorm() / 3.0);
        const double d1 = std::sqrt(f.cwiseQuotient(sc).squaredNorm() / 3.0);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, cfg.max_step);
        const Vec3 f1 = rhs(y + h0 * f);
        const double d2 = std::sqrt((f1 - f).cwiseQuotient(sc).squaredNorm() / 3.0) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
        h = std::min({100.0 * h0, h1, cfg.max_step});
    }

    std::size_t next_stop = 0;
    double err_prev = 1e-4;
    bool last_rejected = false;
    stats.min_step = std::numeric_limits<double>::infinity();

    while (tau < cfg.tau_end) {
        if (stats.accepted + stats.rejected >= cfg.max_steps) {
            throw NumericalError("integrator: maximum number of steps exceeded");
        }
        double target = cfg.tau_end;
        if (cfg.stops != nullptr) {
            while (next_stop < cfg.stops->size() && (*cfg.stops)[next_stop] <= tau) ++next_stop;
            if (next_stop < cfg.stops->size()) target = std::min(target, (*cfg.stops)[next_stop]);
        }
        const double proposal = h;
        bool lands = false;
        if (tau + h >= target || target - (tau + h) < 1e-12 * std::max(1.0, target)) {
            h = target - tau;
            lands = true;
        }
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(tau))) {
            std::ostringstream os;
            os << "integrator: step size underflow at tau = " << tau << " (h = " << h
               << "); the parameters may be singular or the tolerance unattainable";
            throw StepSizeUnderflow(os.str(), tau, h);
        }

        const Vec3 k1 = f;
        const Vec3 k2 = rhs(y + h * (a21 * k1));
        const Vec3 k3 = rhs(y + h * (a31 * k1 + a32 * k2));
        const Vec3 k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec3 k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec3 k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec3 y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec3 k7 = rhs(y_new);
        const Vec3 err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err = error_norm(err_vec, y, y_new, cfg.rel_tol, cfg.abs_tol);

        if (!std::isfinite(err)) {
            ++stats.rejected;
            h *= kMinFactor;
            last_rejected = true;
            continue;
        }

        if (err <= 1.0) {
            ++stats.accepted;
            stats.max_local_error = std::max(stats.max_local_error, err);
            stats.min_step = std::min(stats.min_step, h);
            stats.max_step_taken = std::max(stats.max_step_taken, h);
            tau = lands ? target : tau + h;
            // The exact flow never leaves the unit ball; project truncation
            // overshoot back so pure states do not drift outward.
            const double norm = y_new.norm();
            if (norm > 1.0) {
                y = y_new / norm;
                f = rhs(y);
            } else {
                y = y_new;
                f = k7;
            }
            if (!observe(tau, y, f)) break;

            double factor = kSafety * std::pow(std::max(err, 1e-10), -kAlpha) * std::pow(err_prev, kBeta);
            factor = std::clamp(factor, kMinFactor, kMaxFactor);
            if (last_rejected) factor = std::min(factor, 1.0);
            err_prev = std::max(err, 1e-4);
            last_rejected = false;
            // A landing step may have been shortened; grow from the unclamped proposal.
            h = std::min((lands ? std::max(h, proposal) : h) * factor, cfg.max_step);
        } else {
            ++stats.rejected;
            h *= std::max(kMinFactor, kSafety * std::pow(err, -1.0 / 5.0));
            last_rejected = true;
        }
    }
    if (stats.accepted == 0) stats.min_step = 0.0;
    return stats;
}

}  // namespace

// ----------------------------------------------------------------------------- Trajectory

Trajectory::Trajectory(QubitModel model, std::vector<BlochState> samples, std::vector<Vec3> slopes,
                       ControllerStats stats)
    : model_(std::move(model)), samples_(std::move(samples)), slopes_(std::move(slopes)), stats_(stats) {
    if (samples_.empty() || samples_.size() != slopes_.size()) {
        throw InvalidArgument("Trajectory: samples and slopes must be non-empty and of equal length");
    }
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        if (!(samples_[i].tau() > samples_[i - 1].tau())) {
            throw InvalidArgument("Trajectory: samples must be strictly increasing in tau");
        }
    }
}

Vec3 Trajectory::at(double tau) const {
    if (!(tau >= samples_.front().tau() && tau <= samples_.back().tau())) {
        throw InvalidArgument("Trajectory::at: tau outside the integrated range");
    }
    if (tau == samples_.front().tau()) return samples_.front().b();
    if (tau == samples_.back().tau()) return samples_.back().b();
    auto it = std::upper_bound(samples_.begin(), samples_.end(), tau,
                               [](double t, const BlochState& s) { return t < s.tau(); });
    const std::size_t i1 = static_cast<std::size_t>(it - samples_.begin());
    const std::size_t i0 = i1 - 1;
    const double t0 = samples_[i0].tau();
    const double h = samples_[i1].tau() - t0;
    const double s = (tau - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * samples_[i0].b() + h10 * h * slopes_[i0] + h01 * samples_[i1].b() + h11 * h * slopes_[i1];
}

// ----------------------------------------------------------------------------- evolve

Trajectory evolve(const QubitModel& model, const Vec3& b0, double tau_end, double rel_tol, double abs_tol) {
    IntegratorOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = abs_tol;
    return evolve(model, b0, tau_end, opt);
}

Trajectory evolve(const QubitModel& model, const Vec3& b0, double tau_end, const IntegratorOptions& options) {
    if (!(tau_end > 0.0) || !std::isfinite(tau_end)) throw InvalidArgument("evolve: tau_end must be positive");
    check_tolerances(options.rel_tol, options.abs_tol);
    const BlochState start(b0, 0.0);

    const auto& stops = options.output_times;
    for (std::size_t i = 0; i < stops.size(); ++i) {
        if (!(stops[i] > 0.0) || stops[i] > tau_end || (i > 0 && !(stops[i] > stops[i - 1]))) {
            throw InvalidArgument("evolve: output_times must be strictly increasing within (0, tau_end]");
        }
    }

    RunConfig cfg{options.rel_tol,
                  options.abs_tol,
                  options.max_step > 0.0 ? options.max_step : default_max_step(model.r(), tau_end),
                  tau_end,
                  stops.empty() ? nullptr : &stops,
                  options.max_steps};

    const double eps = std::max(kStateTolerance, 10.0 * options.rel_tol);
    std::vector<BlochState> samples;
    std::vector<Vec3> slopes;
    std::size_t next = 0;
    auto observe = [&](double tau, const Vec3& b, const Vec3& f) {
        bool keep = stops.empty() || tau == 0.0;
        if (!keep) {
            while (next < stops.size() && stops[next] < tau) ++next;
            keep = next < stops.size() && stops[next] == tau;
        }
        if (keep) {
            samples.emplace_back(b, tau, eps);
            slopes.push_back(f);
        }
        return true;
    };
    const ControllerStats stats = run(model, start.b(), cfg, observe);
    return Trajectory(model, std::move(samples), std::move(slopes), stats);
}

std::vector<double> periodic_output_grid(double r, double tau_end, int samples_per_period) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("periodic_output_grid: requires 0 < r < 1");
    if (samples_per_period < 1) throw InvalidArgument("periodic_output_grid: samples_per_period must be >= 1");
    const double dt = period_hat(r) / samples_per_period;
    std::vector<double> out;
    for (long k = 1;; ++k) {
        const double t = static_cast<double>(k) * dt;
        // snap the sample that lands on tau_end up to rounding
        if (t >= tau_end * (1.0 - 1e-12)) break;
        out.push_back(t);
    }
    out.push_back(tau_end);
    return out;
}

// ----------------------------------------------------------------------------- asymptote

AsymptoteResult evolve_to_asymptote(const QubitModel& model, const Vec3& b0, double settle_tol, double max_tau,
                                    const AsymptoteOptions& options) {
    if (!(settle_tol > 0.0)) throw InvalidArgument("evolve_to_asymptote: settle_tol must be positive");
    if (!(max_tau > 0.0)) throw InvalidArgument("evolve_to_asymptote: max_tau must be positive");
    check_tolerances(options.rel_tol, options.abs_tol);
    const BlochState start(b0, 0.0);

    const double r = model.r();
    const bool oscillatory = r < 1.0;
    const double period = oscillatory ? period_hat(r) : 0.0;

    RunConfig cfg{options.rel_tol, options.abs_tol, std::min(1.0, default_max_step(r, max_tau)), max_tau,
                  nullptr, std::numeric_limits<std::size_t>::max()};

    std::optional<AsymptoteResult> result;
    double settle_since = -1.0;

    // Per-period amplitude (max - min) of |db/dtau|.
    std::vector<double> amplitudes;
    long window = 0;
    double w_min = std::numeric_limits<double>::infinity();
    double w_max = -std::numeric_limits<double>::infinity();

    auto observe = [&](double tau, const Vec3& b, const Vec3& f) {
        const double speed = f.norm();
        if (speed < settle_tol) {
            if (settle_since < 0.0) settle_since = tau;
            if (tau - settle_since >= 1.0) {
                result = AsymptoteResult(b);
                return false;
            }
        } else {
            settle_since = -1.0;
        }

        if (oscillatory) {
            const long idx = static_cast<long>(std::floor(tau / period));
            if (idx != window) {
                amplitudes.push_back(w_max - w_min);
                window = idx;
                w_min = std::numeric_limits<double>::infinity();
                w_max = -std::numeric_limits<double>::infinity();
                const std::size_t n = amplitudes.size();
                if (n >= 11) {
                    const double now = amplitudes[n - 1];
                    const double then = amplitudes[n - 11];
                    if (now > settle_tol && now > 0.99 * then) {
                        result = AsymptoteResult(NonConvergent{tau, now, then});
                        return false;
                    }
                }
            }
            w_min = std::min(w_min, speed);
            w_max = std::max(w_max, speed);
        }
        return true;
    };
    run(model, start.b(), cfg, observe);

    if (!result) {
        std::ostringstream os;
        os << "evolve_to_asymptote: neither settled nor classified as oscillating by tau = " << max_tau;
        throw NumericalError(os.str());
    }
    return *result;
}

}  // namespace cuq
