#include "cuq/analytic.hpp"

#include "cuq/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace cuq {

namespace {

constexpr double kPi = std::numbers::pi;

void require_cuq_r(double r, const char* where) {
    if (!(r > 0.0 && r < 1.0)) {
        std::ostringstream os;
        os << where << ": requires 0 < r < 1 (got r = " << r << ")";
        throw InvalidArgument(os.str());
    }
}

double sign(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

CuqClock cuq_clock(double r) {
    if (r >= 1.0) {
        throw InvalidArgument("cuq_clock: no oscillation for r >= 1 (the period diverges at r = 1)");
    }
    require_cuq_r(r, "cuq_clock");
    const double s = std::sqrt(1.0 - r * r);
    return CuqClock{r, 2.0 * kPi * r / s, s / r};
}

PhysicalClock restore_units(double r, double E_mag) {
    if (!(r >= 0.0 && r < 1.0)) throw InvalidArgument("restore_units: requires 0 <= r < 1");
    if (!(E_mag > 0.0)) throw InvalidArgument("restore_units: |E| must be positive");
    const double s = std::sqrt(1.0 - r * r);
    return PhysicalClock{kPi / (E_mag * s), 2.0 * E_mag * s};
}

double cuq_theta(double tau, double r) {
    require_cuq_r(r, "cuq_theta");
    const CuqClock clk = cuq_clock(r);
    const double wt = clk.omega_hat * tau;
    const double m = std::nearbyint(wt / (2.0 * kPi));
    const double phase = wt - 2.0 * kPi * m;  // in [-pi, pi]
    const double k = std::sqrt((1.0 + r) / (1.0 - r));
    // tan(theta/2) = -k tan(phase/2), with the half-angle kept in [-pi/2, pi/2].
    const double half = std::atan2(-k * std::sin(0.5 * phase), std::cos(0.5 * phase));
    return 2.0 * half - 2.0 * kPi * m;
}

PlanarProjections cuq_projections(double tau, double r) {
    require_cuq_r(r, "cuq_projections");
    const CuqClock clk = cuq_clock(r);
    const double w = clk.omega_hat * tau;
    const double c = std::cos(w);
    const double den = 1.0 - r * c;
    return PlanarProjections{std::sqrt(1.0 - r * r) * std::sin(w) / den, (c - r) / den};
}

const char* to_string(AsymptoteBranch branch) {
    switch (branch) {
        case AsymptoteBranch::General: return "General";
        case AsymptoteBranch::Aligned: return "Aligned";
        case AsymptoteBranch::PerpendicularOverdamped: return "PerpendicularOverdamped";
        case AsymptoteBranch::CriticalNoStationary: return "CriticalNoStationary";
    }
    return "?";
}

AsymptoticState asymptotic_state(const QubitModel& model) {
    const Vec3& e = model.e();
    const Vec3& g = model.gamma();
    const double r = model.r();
    const Vec3 exg = e.cross(g);
    const double s = exg.norm();
    const double c = e.dot(g);

    AsymptoticState out;
    if (s < kGeometryTolerance) {
        out.branch = AsymptoteBranch::Aligned;
        out.alpha = sign(c);
        out.b_star = out.alpha * e;
        return out;
    }
    if (std::abs(c) < kGeometryTolerance) {
        if (r < 1.0) {
            out.branch = AsymptoteBranch::CriticalNoStationary;
            return out;
        }
        out.branch = AsymptoteBranch::PerpendicularOverdamped;
        out.alpha = 0.0;
        out.b_star = (std::sqrt(r * r - 1.0) / r) * g - (1.0 / s / r) * exg;
        return out;
    }

    const double omr2 = 1.0 - r * r;
    const double alpha =
        sign(c) / std::sqrt(2.0) * std::sqrt(omr2 + std::sqrt(omr2 * omr2 + 4.0 * c * c * r * r));
    const double one_m_a2 = 1.0 - alpha * alpha;
    out.branch = AsymptoteBranch::General;
    out.alpha = alpha;
    out.b_star = alpha * e - one_m_a2 / (s * s * r) * exg - c * one_m_a2 / (s * s * alpha) * e.cross(exg);
    return out;
}

double mixed_magnitude(double tau, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("mixed_magnitude: requires 0 < r <= 1");
    if (r == 1.0) {
        // |b|^2 = 1 - 4/(2 + tau^2)^2, factored to avoid cancellation near tau = 0.
        const double t2 = tau * tau;
        return std::abs(tau) * std::sqrt(4.0 + t2) / (2.0 + t2);
    }
    const double r2 = r * r;
    const double x = std::sqrt(1.0 - r2) * tau / r;
    const double den = 1.0 - r2 * std::cos(x);
    // 1 - (1 - r^2)^2 / den^2 = 2 r^2 sin^2(x/2) (2 - r^2 - r^2 cos x) / den^2
    const double sh = std::sin(0.5 * x);
    const double b2 = 2.0 * r2 * sh * sh * (2.0 - r2 - r2 * std::cos(x)) / (den * den);
    return std::sqrt(b2);
}

double mixed_magnitude_vs_angle(double phi, double r) {
    require_cuq_r(r, "mixed_magnitude_vs_angle");
    const double sp = std::sin(phi);
    if (sp > 1e-15) {
        std::ostringstream os;
        os << "mixed_magnitude_vs_angle: phi = " << phi
           << " lies on the branch sin(phi) > 0, never reached from a fully mixed start";
        throw InvalidArgument(os.str());
    }
    return std::max(0.0, -2.0 * r * sp / (1.0 + r * r * sp * sp));
}

double MixedEllipse::implicit(double b_gamma, double b_exg) const {
    const double u = b_gamma / semi_major;
    const double v = (b_exg - centre_exg) / semi_minor;
    return u * u + v * v;
}

MixedEllipse mixed_ellipse(double r) {
    require_cuq_r(r, "mixed_ellipse");
    const double q = 1.0 + r * r;
    return MixedEllipse{r / std::sqrt(q), r / q, r / std::sqrt(q), -r / q};
}

PolarRates polar_rates(double b_mag, double phi, double r) {
    if (!(b_mag > 0.0)) {
        throw InvalidArgument("polar_rates: |b| = 0 makes the angular rate singular; use the Cartesian form");
    }
    if (b_mag > 1.0 + kStateTolerance) throw InvalidArgument("polar_rates: |b| must not exceed 1");
    if (!(r > 0.0)) throw InvalidArgument("polar_rates: r must be positive");
    return PolarRates{(1.0 - b_mag * b_mag) * std::cos(phi), -1.0 / r - std::sin(phi) / b_mag};
}

Vec3 tilted_orbit_start(double r, double R) {
    require_cuq_r(r, "tilted_orbit_start");
    if (!(R > 0.0 && R <= 1.0)) throw InvalidArgument("tilted_orbit_start: requires 0 < R <= 1");
    // In-plane orbits are the ellipses (1 + r y)^2 = F^2 (1 - x^2 - y^2) around the
    // fixed point y = -r; amplitude R along gamma fixes the centre and half-width
    // along e x gamma.
    const double k = 1.0 - R * R;
    const double y_top = std::min(1.0, -r * k + R * std::sqrt(1.0 - r * r * k));
    return Vec3(std::sqrt(std::max(0.0, 1.0 - y_top * y_top)), 0.0, y_top);
}

}  // namespace cuq
