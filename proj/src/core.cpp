#include "cuq/core.hpp"

#include "cuq/errors.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace cuq {

namespace {

constexpr std::complex<double> I{0.0, 1.0};

void require_unit(const Vec3& v, const char* name) {
    if (!v.allFinite() || std::abs(v.norm() - 1.0) >= kIdentityTolerance) {
        std::ostringstream os;
        os << "QubitModel: " << name << " must be a unit vector (|" << name << "| = " << v.norm() << ")";
        throw InvalidArgument(os.str());
    }
}

}  // namespace

// ----------------------------------------------------------------------------- BlochState

BlochState::BlochState(const Vec3& b, double tau, double eps) : b_(b), tau_(tau) {
    if (!b.allFinite() || !std::isfinite(tau)) {
        throw InvalidArgument("BlochState: non-finite component");
    }
    if (b.norm() > 1.0 + eps) {
        std::ostringstream os;
        os << "BlochState: |b| = " << b.norm() << " exceeds 1 + " << eps;
        throw InvalidArgument(os.str());
    }
    if (tau < 0.0) {
        throw InvalidArgument("BlochState: tau must be non-negative");
    }
}

BlochState BlochState::clamped() const {
    BlochState out = *this;
    const double n = b_.norm();
    if (n > 1.0) out.b_ = b_ / n;
    return out;
}

// ----------------------------------------------------------------------------- QubitModel

QubitModel::QubitModel(const Vec3& e, const Vec3& gamma, double r, double E_mag,
                       std::optional<double> E0, std::optional<double> Gamma0)
    : e_(e), gamma_(gamma), r_(r), E_mag_(E_mag), E0_(E0), Gamma0_(Gamma0) {
    require_unit(e, "e");
    require_unit(gamma, "gamma");
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("QubitModel: r must be positive");
    if (!(E_mag > 0.0) || !std::isfinite(E_mag)) throw InvalidArgument("QubitModel: |E| must be positive");
}

QubitModel QubitModel::from_angle(double theta_eg_rad, double r, double E_mag) {
    const Vec3 e(1.0, 0.0, 0.0);
    // Exact unit vector for the common right angle.
    Vec3 g(std::cos(theta_eg_rad), std::sin(theta_eg_rad), 0.0);
    if (std::abs(theta_eg_rad - M_PI / 2) < 1e-15) g = Vec3(0.0, 1.0, 0.0);
    if (std::abs(theta_eg_rad + M_PI / 2) < 1e-15) g = Vec3(0.0, -1.0, 0.0);
    return QubitModel(e, g.normalized(), r, E_mag);
}

QubitModel QubitModel::from_vectors(const Vec3& E_vec, const Vec3& Gamma_vec,
                                    std::optional<double> E0, std::optional<double> Gamma0) {
    const double En = E_vec.norm();
    const double Gn = Gamma_vec.norm();
    if (!(En > 0.0) || !(Gn > 0.0)) {
        throw InvalidArgument("QubitModel::from_vectors: E and Gamma vectors must be non-zero");
    }
    return QubitModel(E_vec / En, Gamma_vec / Gn, Gn / (2.0 * En), En, E0, Gamma0);
}

double QubitModel::theta_eg() const {
    return std::atan2(e_.cross(gamma_).norm(), e_.dot(gamma_));
}

Vec3 QubitModel::e_cross_gamma_unit() const {
    const Vec3 c = e_.cross(gamma_);
    const double n = c.norm();
    return n > kIdentityTolerance ? Vec3(c / n) : Vec3::Zero();
}

Mat2c QubitModel::energy_matrix() const {
    return E0_.value_or(0.0) * Mat2c::Identity() - pauli_dot(E_mag_ * e_);
}

Mat2c QubitModel::decay_matrix() const {
    return Gamma0_.value_or(0.0) * Mat2c::Identity() - pauli_dot(Gamma_mag() * gamma_);
}

QubitModel QubitModel::with_trace_parts(std::optional<double> E0, std::optional<double> Gamma0) const {
    QubitModel m = *this;
    m.E0_ = E0;
    m.Gamma0_ = Gamma0;
    return m;
}

// ----------------------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(const Mat2c& entries, double eps) : m_(entries) {
    if (!m_.allFinite()) throw InvalidArgument("DensityMatrix: non-finite entry");
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kIdentityTolerance) {
        throw InvalidArgument("DensityMatrix: not Hermitian");
    }
    if (std::abs(m_.trace() - 1.0) > eps) throw InvalidArgument("DensityMatrix: trace is not 1");
    Eigen::SelfAdjointEigenSolver<Mat2c> es(m_);
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() < -eps || ev.maxCoeff() > 1.0 + eps) {
        throw InvalidArgument("DensityMatrix: eigenvalues outside [0, 1]");
    }
}

Vec3 DensityMatrix::bloch_vector() const { return pauli_components(m_).real() * 2.0; }

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

bool DensityMatrix::is_pure(double tol) const { return ((m_ * m_) - m_).cwiseAbs().maxCoeff() < tol; }

// ----------------------------------------------------------------------------- Pauli algebra

const Mat2c& pauli(int i) {
    static const std::array<Mat2c, 3> s = [] {
        std::array<Mat2c, 3> out;
        out[0] << 0.0, 1.0, 1.0, 0.0;
        out[1] << 0.0, -I, I, 0.0;
        out[2] << 1.0, 0.0, 0.0, -1.0;
        return out;
    }();
    return s.at(static_cast<std::size_t>(i));
}

Mat2c pauli_dot(const Vec3& v) { return v.x() * pauli(0) + v.y() * pauli(1) + v.z() * pauli(2); }

Eigen::Vector3cd pauli_components(const Mat2c& m) {
    Eigen::Vector3cd a;
    for (int i = 0; i < 3; ++i) a(i) = 0.5 * (pauli(i) * m).trace();
    return a;
}

// ----------------------------------------------------------------------------- dynamics

Vec3 bloch_derivative(const Vec3& b, const QubitModel& model) {
    const Vec3& g = model.gamma();
    return -(1.0 / model.r()) * model.e().cross(b) + g - b.dot(g) * b;
}

Vec3 bloch_derivative(const BlochState& state, const QubitModel& model) {
    return bloch_derivative(state.b(), model);
}

double purity_rate(const BlochState& state, const QubitModel& model) {
    const Vec3& b = state.b();
    return 2.0 * model.gamma().dot(b) * (1.0 - b.squaredNorm());
}

DensityMatrix density_from_bloch(const BlochState& state) {
    return DensityMatrix(0.5 * (Mat2c::Identity() + pauli_dot(state.b())));
}

Mat2c density_evolution_rhs(const Mat2c& rho, const Mat2c& E, const Mat2c& Gamma) {
    return -I * (E * rho - rho * E) - 0.5 * (Gamma * rho + rho * Gamma) + rho * (rho * Gamma).trace();
}

Mat2c density_evolution_rhs(const DensityMatrix& rho, const QubitModel& model) {
    return density_evolution_rhs(rho.entries(), model.energy_matrix(), model.decay_matrix());
}

}  // namespace cuq
