// Bloch-sphere representation of an unstable qubit evolved by a
// non-Hermitian effective Hamiltonian H_eff = E - (i/2) Gamma.
//
// Conventions
//   E     = E0 * 1 - |E| e . sigma          Gamma = Gamma0 * 1 - |Gamma| gamma . sigma
//   rho^  = (1 + b . sigma) / 2             tau   = |Gamma| t,   r = |Gamma| / (2 |E|)
//
// Physical rates are in ps^-1; tau is dimensionless.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>

namespace cuq {

using Vec3 = Eigen::Vector3d;
using Mat2c = Eigen::Matrix2cd;

// Tolerance for state invariants (|b| <= 1 + eps, Hermiticity of rho^ etc.).
inline constexpr double kStateTolerance = 1e-9;
// Tolerance for exact algebraic identities.
inline constexpr double kIdentityTolerance = 1e-12;

class BlochState {
public:
    BlochState() = default;
    // Throws InvalidArgument when |b| > 1 + eps or tau < 0.
    BlochState(const Vec3& b, double tau, double eps = kStateTolerance);

    const Vec3& b() const noexcept { return b_; }
    double tau() const noexcept { return tau_; }
    double magnitude() const { return b_.norm(); }

    // Copy with |b| pulled back onto the unit sphere if it drifted above 1.
    // Only meant for output boundaries.
    BlochState clamped() const;

private:
    Vec3 b_ = Vec3::Zero();
    double tau_ = 0.0;
};

class QubitModel {
public:
    // e and gamma must be unit vectors to 1e-12; r > 0, E_mag > 0.
    QubitModel(const Vec3& e, const Vec3& gamma, double r, double E_mag = 1.0,
               std::optional<double> E0 = std::nullopt,
               std::optional<double> Gamma0 = std::nullopt);

    // Canonical frame: e = x^, gamma = (cos theta, sin theta, 0). For theta = 90 deg
    // this gives e x gamma = z^, the CPT basis used for meson flavour asymmetries.
    static QubitModel from_angle(double theta_eg_rad, double r, double E_mag = 1.0);

    // From the physical (unnormalised) energy and decay vectors, ps^-1.
    static QubitModel from_vectors(const Vec3& E_vec, const Vec3& Gamma_vec,
                                   std::optional<double> E0 = std::nullopt,
                                   std::optional<double> Gamma0 = std::nullopt);

    const Vec3& e() const noexcept { return e_; }
    const Vec3& gamma() const noexcept { return gamma_; }
    double r() const noexcept { return r_; }
    double E_mag() const noexcept { return E_mag_; }
    double Gamma_mag() const noexcept { return 2.0 * r_ * E_mag_; }
    std::optional<double> E0() const noexcept { return E0_; }
    std::optional<double> Gamma0() const noexcept { return Gamma0_; }

    double cos_theta_eg() const { return e_.dot(gamma_); }
    double sin_theta_eg() const { return e_.cross(gamma_).norm(); }
    double theta_eg() const;  // radians, in [0, pi]

    // Unit vector along e x gamma; zero when e and gamma are parallel.
    Vec3 e_cross_gamma_unit() const;

    // The Hermitian 2x2 matrices E and Gamma (trace parts default to zero).
    Mat2c energy_matrix() const;
    Mat2c decay_matrix() const;

    QubitModel with_trace_parts(std::optional<double> E0, std::optional<double> Gamma0) const;

private:
    Vec3 e_;
    Vec3 gamma_;
    double r_;
    double E_mag_;
    std::optional<double> E0_;
    std::optional<double> Gamma0_;
};

class DensityMatrix {
public:
    // Hermitian to 1e-12, unit trace and eigenvalues in [-eps, 1 + eps].
    explicit DensityMatrix(const Mat2c& entries, double eps = kStateTolerance);

    const Mat2c& entries() const noexcept { return m_; }
    // Pauli components b_i = Tr(sigma_i rho^).
    Vec3 bloch_vector() const;
    double purity() const;  // Tr(rho^2)
    bool is_pure(double tol = kIdentityTolerance) const;

private:
    Mat2c m_;
};

// Pauli matrices sigma_1..3 (index 0..2).
const Mat2c& pauli(int i);

// v . sigma
Mat2c pauli_dot(const Vec3& v);

// Real coefficients of a matrix on the basis (1, sigma_1, sigma_2, sigma_3),
// i.e. M = a0 1 + a . sigma for Hermitian M; returns a (complex for general M).
Eigen::Vector3cd pauli_components(const Mat2c& m);

// Right-hand side of the master evolution equation,
//   db/dtau = -(1/r) e x b + gamma - (b . gamma) b.
Vec3 bloch_derivative(const Vec3& b, const QubitModel& model);
Vec3 bloch_derivative(const BlochState& state, const QubitModel& model);

// d|b|^2/dtau = 2 (gamma . b)(1 - |b|^2)
double purity_rate(const BlochState& state, const QubitModel& model);

DensityMatrix density_from_bloch(const BlochState& state);

// d rho^/dt = -i[E, rho^] - {Gamma, rho^}/2 + rho^ Tr(rho^ Gamma), physical time.
Mat2c density_evolution_rhs(const DensityMatrix& rho, const QubitModel& model);
Mat2c density_evolution_rhs(const Mat2c& rho, const Mat2c& E, const Mat2c& Gamma);

}  // namespace cuq
