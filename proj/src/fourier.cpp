#include "cuq/fourier.hpp"

#include "cuq/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace cuq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxHarmonics = 64;
constexpr double kQuadratureTol = 1e-10;

void require_open_unit(double r, const char* where) {
    if (!(r > 0.0 && r < 1.0)) {
        std::ostringstream os;
        os << where << ": requires 0 < r < 1 (got " << r << ")";
        throw InvalidArgument(os.str());
    }
}

// Integral of f over [a, b] split into equal panels. Returns (value, error).
template <class F>
std::pair<double, double> panel_integral(F f, double a, double b, int panels) {
    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    double total = 0.0;
    double err = 0.0;
    const double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * h;
        const double hi = (k + 1 == panels) ? b : lo + h;
        double e = 0.0;
        total += Quad::integrate(f, lo, hi, 20, 1e-13, &e);
        err += e;
    }
    return {total, err};
}

}  // namespace

const char* to_string(SeriesKind kind) { return kind == SeriesKind::Odd ? "Odd" : "Even"; }

double FourierSpectrum::coefficient(int n) const {
    if (n == 0) return d0;
    if (n < 0 || n > harmonics()) throw InvalidArgument("FourierSpectrum: harmonic index out of range");
    return coeffs[static_cast<std::size_t>(n - 1)];
}

double FourierSpectrum::error(int n) const {
    if (n < 0 || n > harmonics()) throw InvalidArgument("FourierSpectrum: harmonic index out of range");
    if (n == 0) return d0_err;
    return errors.empty() ? 0.0 : errors[static_cast<std::size_t>(n - 1)];
}

double FourierSpectrum::covariance_between(int m, int n) const {
    if (!covariance) return m == n ? error(n) * error(n) : 0.0;
    return (*covariance)(m, n);
}

double FourierSpectrum::evaluate(double phase) const {
    double s = d0;
    for (int n = 1; n <= harmonics(); ++n) {
        const double arg = n * phase;
        s += coeffs[static_cast<std::size_t>(n - 1)] * (kind == SeriesKind::Odd ? std::sin(arg) : std::cos(arg));
    }
    return s;
}

double geometric_ratio(double r) {
    require_open_unit(r, "geometric_ratio");
    // (1 - sqrt(1 - r^2)) / r without the cancellation at small r
    return r / (1.0 + std::sqrt(1.0 - r * r));
}

double closed_form_cn(int n, double r) {
    if (n < 1) throw InvalidArgument("closed_form_cn: n must be >= 1");
    const double q = geometric_ratio(r);
    // sqrt(1 - r^2)/r * q = sqrt(1 - r^2)/(1 + sqrt(1 - r^2)) keeps r -> 0 finite
    const double s = std::sqrt(1.0 - r * r);
    return 2.0 * s / (1.0 + s) * std::pow(q, n - 1);
}

double closed_form_d0(double r) { return -geometric_ratio(r); }

FourierSpectrum closed_form_spectrum(double r, int N, SeriesKind kind) {
    if (N < 1) throw InvalidArgument("closed_form_spectrum: N must be >= 1");
    FourierSpectrum s;
    s.kind = kind;
    s.d0 = kind == SeriesKind::Even ? closed_form_d0(r) : 0.0;
    s.coeffs.reserve(static_cast<std::size_t>(N));
    for (int n = 1; n <= N; ++n) s.coeffs.push_back(closed_form_cn(n, r));
    return s;
}

FourierSpectrum quadrature_spectrum(const std::function<double(double)>& signal, double P_hat, int N,
                                    SeriesKind kind) {
    if (!(P_hat > 0.0) || !std::isfinite(P_hat)) throw InvalidArgument("quadrature_spectrum: P_hat must be positive");
    if (N < 1 || N > kMaxHarmonics) {
        std::ostringstream os;
        os << "quadrature_spectrum: N must lie in [1, " << kMaxHarmonics << "] (got " << N << ")";
        throw InvalidArgument(os.str());
    }
    const double a = -0.5 * P_hat;
    const double b = 0.5 * P_hat;
    const double jump = std::abs(signal(a) - signal(b));
    if (!(jump <= 1e-6)) {
        std::ostringstream os;
        os << "quadrature_spectrum: signal is not P_hat-periodic (endpoint mismatch " << jump << ")";
        throw InvalidArgument(os.str());
    }

    const double w = 2.0 * kPi / P_hat;
    // Enough panels that each holds at most half an oscillation of the top harmonic.
    const int panels = std::max(8, 2 * N);

    FourierSpectrum out;
    out.kind = kind;
    double worst = 0.0;

    auto [mean, mean_err] = panel_integral(signal, a, b, panels);
    out.d0 = mean / P_hat;
    worst = std::max(worst, mean_err / P_hat);

    out.coeffs.reserve(static_cast<std::size_t>(N));
    for (int n = 1; n <= N; ++n) {
        auto integrand = [&](double t) {
            const double arg = n * w * t;
            return signal(t) * (kind == SeriesKind::Odd ? std::sin(arg) : std::cos(arg));
        };
        auto [val, err] = panel_integral(integrand, a, b, panels);
        out.coeffs.push_back(2.0 * val / P_hat);
        worst = std::max(worst, 2.0 * err / P_hat);
    }
    if (worst > kQuadratureTol) {
        std::ostringstream os;
        os << "quadrature_spectrum: error estimate " << worst << " exceeds " << kQuadratureTol;
        throw NumericalError(os.str());
    }
    return out;
}

AnharmonicityEstimate anharmonicity(const FourierSpectrum& spectrum, int order) {
    const int min_order = spectrum.kind == SeriesKind::Odd ? 1 : 0;
    if (order < min_order) {
        throw InvalidArgument(spectrum.kind == SeriesKind::Odd ? "anharmonicity: Odd ratios start at C_1"
                                                               : "anharmonicity: Even ratios start at D_0");
    }
    if (order + 1 > spectrum.harmonics()) {
        std::ostringstream os;
        os << "anharmonicity: order " << order << " needs harmonics through " << order + 1 << ", spectrum has "
           << spectrum.harmonics();
        throw InvalidArgument(os.str());
    }

    AnharmonicityEstimate est;
    est.kind = spectrum.kind;
    est.order = order;

    const double num = spectrum.coefficient(order + 1);
    const double den = spectrum.coefficient(order);
    const double s_num = spectrum.error(order + 1);
    const double s_den = spectrum.error(order);
    const double cov = spectrum.covariance_between(order + 1, order);

    est.reliable = den != 0.0 && std::abs(den) >= s_den;
    if (den == 0.0) {
        est.ratio = std::numeric_limits<double>::quiet_NaN();
        est.ratio_err = std::numeric_limits<double>::quiet_NaN();
        est.r_hat = std::numeric_limits<double>::quiet_NaN();
        est.r_err = std::numeric_limits<double>::quiet_NaN();
        return est;
    }
    est.ratio = num / den;
    const double var = (s_num / den) * (s_num / den) + (num * s_den / (den * den)) * (num * s_den / (den * den)) -
                       2.0 * num * cov / (den * den * den);
    est.ratio_err = std::sqrt(std::max(0.0, var));

    const auto [r, r_err] = r_from_anharmonicity(est);
    est.r_hat = r;
    est.r_err = r_err;
    return est;
}

std::pair<double, double> r_from_anharmonicity(const AnharmonicityEstimate& est) {
    const double rho = std::abs(est.ratio);
    if (!std::isfinite(rho)) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    if (est.kind == SeriesKind::Even && est.order == 0) {
        const double g = 1.0 + 0.25 * rho * rho;
        const double r = 1.0 / std::sqrt(g);
        const double dr = 0.25 * rho / (g * std::sqrt(g));
        return {r, dr * est.ratio_err};
    }
    const double g = rho * rho + 1.0;
    const double r = 2.0 * rho / g;
    const double dr = 2.0 * std::abs(1.0 - rho * rho) / (g * g);
    return {r, dr * est.ratio_err};
}

double correct_effective_r(double r_tilde, double amplitude_R) {
    return correct_effective_r(r_tilde, 0.0, amplitude_R).first;
}

std::pair<double, double> correct_effective_r(double r_tilde, double r_tilde_err, double amplitude_R) {
    if (!(amplitude_R > 0.0 && amplitude_R <= 1.0)) {
        throw InvalidArgument("correct_effective_r: amplitude R must lie in (0, 1]");
    }
    if (!(r_tilde >= 0.0 && r_tilde <= 1.0)) {
        throw InvalidArgument("correct_effective_r: r~ must lie in [0, 1]");
    }
    const double R2 = amplitude_R * amplitude_R;
    const double g = R2 + r_tilde * r_tilde * (1.0 - R2);
    const double r = r_tilde / std::sqrt(g);
    const double dr = R2 / (g * std::sqrt(g));
    return {r, dr * r_tilde_err};
}

std::optional<WeightedMean> weighted_average(const std::vector<std::pair<double, double>>& values) {
    double sw = 0.0;
    double swx = 0.0;
    int used = 0;
    for (const auto& [x, s] : values) {
        if (!std::isfinite(x) || !std::isfinite(s) || !(s > 0.0)) continue;
        const double w = 1.0 / (s * s);
        sw += w;
        swx += w * x;
        ++used;
    }
    if (used == 0) return std::nullopt;
    return WeightedMean{swx / sw, 1.0 / std::sqrt(sw), used};
}

}  // namespace cuq
