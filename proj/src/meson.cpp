#include "cuq/meson.hpp"

#include "cuq/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace cuq {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kMaxR = 10.0;

// sin/cos in degrees, exact on multiples of 90.
double cos_deg(double deg) {
    const double d = normalize_degrees(deg);
    if (d == 90.0 || d == -90.0) return 0.0;
    if (d == 180.0) return -1.0;
    if (d == 0.0) return 1.0;
    return std::cos(d * kDeg);
}

double sin_deg(double deg) {
    const double d = normalize_degrees(deg);
    if (d == 0.0 || d == 180.0) return 0.0;
    if (d == 90.0) return 1.0;
    if (d == -90.0) return -1.0;
    return std::sin(d * kDeg);
}

}  // namespace

double normalize_degrees(double deg) {
    double d = std::fmod(deg, 360.0);
    if (d <= -180.0) d += 360.0;
    if (d > 180.0) d -= 360.0;
    return d;
}

MesonObservables observables_from_bloch(const BlochParameters& p) {
    if (!(p.r >= 0.0) || !std::isfinite(p.r)) throw InvalidArgument("observables_from_bloch: r must be >= 0");
    if (!(p.E_mag > 0.0) || !std::isfinite(p.E_mag)) throw InvalidArgument("observables_from_bloch: |E| must be > 0");
    const double r = p.r;
    const double c = cos_deg(p.theta_eg_deg);
    const double s = sin_deg(p.theta_eg_deg);
    // +0.0 keeps the perpendicular overdamped case off the branch cut consistently.
    const double im = -2.0 * r * c + 0.0;
    const std::complex<double> z = std::sqrt(std::complex<double>(1.0 - r * r, im));

    const double num = 1.0 + r * r - 2.0 * r * s;
    const double den = 1.0 + r * r + 2.0 * r * s;
    if (!(num > 0.0 && den > 0.0)) throw NumericalError("observables_from_bloch: |q/p| is undefined");

    MesonObservables o;
    o.delta_E = 2.0 * p.E_mag * z.real();
    o.delta_Gamma = -4.0 * p.E_mag * z.imag();
    o.q_over_p = std::pow(num / den, 0.25);
    return o;
}

BlochInversion bloch_from_observables(const MesonObservables& o) {
    if (!(o.delta_E >= 0.0) || !std::isfinite(o.delta_E)) {
        throw InvalidArgument("bloch_from_observables: dE must be finite and >= 0");
    }
    if (!std::isfinite(o.delta_Gamma)) throw InvalidArgument("bloch_from_observables: dGamma must be finite");
    if (!(o.q_over_p > 0.0) || !std::isfinite(o.q_over_p)) {
        throw InvalidArgument("bloch_from_observables: |q/p| must be positive");
    }

    // (dE - i dGamma/2)^2 = 4|E|^2 z^2 = A + iB, with u = 1/(4|E|^2):
    //   1 - r^2 = A u,  -2 r cos = B u,  2 r sin = kappa (1 + r^2).
    // sin^2 + cos^2 = 1 leaves a quadratic in u with exactly one positive root.
    const double A = o.delta_E * o.delta_E - 0.25 * o.delta_Gamma * o.delta_Gamma;
    const double B = -o.delta_E * o.delta_Gamma;
    const double Q = std::pow(o.q_over_p, 4);
    const double kappa = (1.0 - Q) / (1.0 + Q);
    const double one_m_k2 = (1.0 - kappa) * (1.0 + kappa);

    const double qa = A * A * kappa * kappa + B * B;
    const double qb = 4.0 * A * one_m_k2;
    const double qc = -4.0 * one_m_k2;

    double u = 0.0;
    if (qa == 0.0) {
        if (!(qb > 0.0)) throw Unphysical("bloch_from_observables: dE = dGamma = 0 has no Bloch realisation");
        u = -qc / qb;
    } else {
        const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
        u = qb >= 0.0 ? 2.0 * qc / (-qb - disc) : (-qb + disc) / (2.0 * qa);
    }
    if (!(u > 0.0) || !std::isfinite(u)) throw Unphysical("bloch_from_observables: no positive |E|^2 solution");

    double r2 = 1.0 - A * u;
    if (r2 < 0.0) {
        if (r2 < -1e-12) {
            std::ostringstream os;
            os << "bloch_from_observables: observables imply r^2 = " << r2 << " < 0";
            throw Unphysical(os.str());
        }
        r2 = 0.0;
    }
    const double r = std::sqrt(r2);
    if (r > kMaxR) {
        std::ostringstream os;
        os << "bloch_from_observables: r = " << r << " outside (0, " << kMaxR << "]";
        throw Unphysical(os.str());
    }

    BlochInversion out;
    const double E_mag = 0.5 / std::sqrt(u);
    double theta = 0.0;
    if (r > 0.0) {
        const double s = (1.0 + r2) * kappa / (2.0 * r);
        const double c = -B * u / (2.0 * r);
        theta = std::atan2(s, c) / kDeg;
    }
    out.params = BlochParameters{r, normalize_degrees(theta), E_mag};
    out.alternate = BlochParameters{r, normalize_degrees(180.0 - theta), E_mag};
    out.ambiguous = r > 0.0 && std::abs(out.params.theta_eg_deg - out.alternate.theta_eg_deg) > 1e-12;
    return out;
}

double flavour_asymmetry(const BlochState& state) { return state.b().z(); }

double flavour_asymmetry(const BlochState& state, const QubitModel& model) {
    const Vec3 n = model.e_cross_gamma_unit();
    if (n.isZero()) throw InvalidArgument("flavour_asymmetry: e and gamma are parallel");
    return state.b().dot(n);
}

const char* to_string(DampingClass c) {
    switch (c) {
        case DampingClass::Oscillatory: return "Oscillatory";
        case DampingClass::Critical: return "Critical";
        case DampingClass::Overdamped: return "Overdamped";
    }
    return "?";
}

DampingClass classify_damping(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("classify_damping: r must be positive");
    if (std::abs(r - 1.0) < kCriticalTolerance) return DampingClass::Critical;
    return r < 1.0 ? DampingClass::Oscillatory : DampingClass::Overdamped;
}

MesonObservables MesonCatalogueEntry::observables() const {
    return MesonObservables{delta_E.value, delta_Gamma_sign * delta_Gamma.value, 1.0 + q_over_p_minus_1.value};
}

BlochParameters MesonCatalogueEntry::bloch() const {
    return BlochParameters{r.value, normalize_degrees(theta_eg_deg.value), E_mag.value};
}

const std::vector<MesonCatalogueEntry>& catalogue() {
    static const std::vector<MesonCatalogueEntry> rows = {
        {"K0", {0.005293, 9e-6}, {0.01, 5e-6}, {-0.003239, 1e-6}, {0.945, 2e-3}, {179.6322, 1e-4},
         {2.64652e-3, 7e-8}, -1},
        {"D0", {0.01, 0.001}, {0.03, 0.003}, {-5.00e-3, 0.04e-3}, {1.5, 0.2}, {179.0, 2.0}, {5.00e-3, 0.04e-3}, -1},
        {"Bd0", {0.5069, 0.0019}, {0.7e-3, 7e-3}, {1.0e-3, 0.8e-3}, {1e-3, 4e-3}, {-90.0, 90.0}, {0.253, 0.001}, 1},
        {"Bs0", {17.765, 0.006}, {0.084, 0.005}, {0.1e-3, 1.4e-3}, {2.4e-3, 0.2e-3}, {182.7, 33.8}, {8.9, 0.1}, -1},
    };
    return rows;
}

const MesonCatalogueEntry& catalogue_entry(const std::string& name) {
    for (const auto& e : catalogue()) {
        if (e.name == name) return e;
    }
    throw InvalidArgument("catalogue_entry: unknown system '" + name + "'");
}

const std::vector<BdReferenceRow>& bd_reference() {
    static const std::vector<BdReferenceRow> rows = {
        {"experiment", {0.5069, 0.0019}, {0.7e-3, 7e-3}, {1.0e-3, 0.8e-3}, {1e-3, 4e-3}, {-90.0, 90.0}, {0.253, 0.001}},
        {"standard-model", {0.535, 0.021}, {2.7e-3, 0.4e-3}, {2.6e-4, 0.3e-4}, {2.5e-3, 0.4e-3}, {-5.0, 3.0},
         {0.28, 0.01}},
    };
    return rows;
}

}  // namespace cuq
