// Closed-form results for critical unstable qubits (CUQs).
//
// A CUQ has e perpendicular to gamma and r < 1. Angles follow the planar
// conventions
//   pure state:  b . gamma = -sin(theta),  b . (e x gamma) = cos(theta),  theta(0) = 0
//   polar form:  b . gamma = |b| cos(phi), b . (e x gamma) = |b| sin(phi), phi = theta + pi/2

#pragma once

#include "cuq/core.hpp"

#include <utility>

namespace cuq {

// Dimensionless period and angular frequency of the CUQ oscillation.
struct CuqClock {
    double r;
    double P_hat;      // 2 pi r / sqrt(1 - r^2)
    double omega_hat;  // sqrt(1 - r^2) / r
};

CuqClock cuq_clock(double r);

struct PhysicalClock {
    double period_ps;  // pi / (|E| sqrt(1 - r^2))
    double omega;      // 2 |E| sqrt(1 - r^2), ps^-1
};

// Accepts 0 <= r < 1 (r = 0 is the Rabi limit).
PhysicalClock restore_units(double r, double E_mag);

// Unwrapped, strictly decreasing theta(tau) with theta(0) = 0.
double cuq_theta(double tau, double r);

struct PlanarProjections {
    double b_gamma;  // b . gamma
    double b_exg;    // b . (e x gamma)
};

PlanarProjections cuq_projections(double tau, double r);

enum class AsymptoteBranch { General, Aligned, PerpendicularOverdamped, CriticalNoStationary };

const char* to_string(AsymptoteBranch branch);

struct AsymptoticState {
    Vec3 b_star = Vec3::Zero();  // zero for CriticalNoStationary
    double alpha = 0.0;          // component along e
    AsymptoteBranch branch = AsymptoteBranch::General;
};

// Classification tolerance for sin/cos of the e-gamma angle.
inline constexpr double kGeometryTolerance = 1e-10;

AsymptoticState asymptotic_state(const QubitModel& model);

// |b(tau)| for a CUQ started fully mixed, 0 < r <= 1.
double mixed_magnitude(double tau, double r);

// |b| as a function of the polar angle phi for the fully mixed start; defined
// for phi in [-pi, 0] modulo 2 pi. Throws InvalidArgument on the other branch.
double mixed_magnitude_vs_angle(double phi, double r);

struct MixedEllipse {
    double semi_major;    // r / sqrt(1 + r^2), along gamma
    double semi_minor;    // r / (1 + r^2), along e x gamma
    double eccentricity;  // r / sqrt(1 + r^2)
    double centre_exg;    // -r / (1 + r^2), centre offset along e x gamma

    // Left-hand side of the ellipse identity for a point with the given
    // projections; equals 1 on the trajectory.
    double implicit(double b_gamma, double b_exg) const;
};

MixedEllipse mixed_ellipse(double r);

struct PolarRates {
    double db_mag_dtau;
    double dphi_dtau;
};

// Planar polar form of the master equation. Throws InvalidArgument at |b| = 0
// (the angle is undefined there; integrate the Cartesian form instead).
PolarRates polar_rates(double b_mag, double phi, double r);

// Components (along e, gamma, e x gamma) of a pure initial state whose CUQ
// orbit has gamma-projection amplitude R in (0, 1]. The orbit is a small circle
// of radius R on the sphere, tilted out of the (gamma, e x gamma) plane; R = 1
// is the reference great circle through e x gamma.
Vec3 tilted_orbit_start(double r, double R);

}  // namespace cuq
