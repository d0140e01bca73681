#include "cuq/fit.hpp"

#include "cuq/analytic.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace cuq {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_field(const std::string& field, const std::string& path, int line, const char* name) {
    const std::string f = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        std::ostringstream os;
        os << path << ":" << line << ": cannot parse " << name << " from '" << f << "'";
        throw DataError(os.str());
    }
    return v;
}

std::string stem_of(const std::string& path) {
    const auto slash = path.find_last_of('/');
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    return dot == std::string::npos || dot == 0 ? name : name.substr(0, dot);
}

int n_params(int N, bool sine) { return sine ? 2 * N + 1 : N + 1; }

Eigen::MatrixXd design(const AsymmetryDataset& data, double omega, int N, bool sine) {
    const auto m = static_cast<Eigen::Index>(data.points.size());
    Eigen::MatrixXd A(m, n_params(N, sine));
    for (Eigen::Index i = 0; i < m; ++i) {
        const double t = data.points[static_cast<std::size_t>(i)].t;
        A(i, 0) = 1.0;
        for (int n = 1; n <= N; ++n) {
            A(i, n) = std::cos(n * omega * t);
            if (sine) A(i, N + n) = std::sin(n * omega * t);
        }
    }
    return A;
}

FitResult linear_fit(const AsymmetryDataset& data, double omega, int N, bool sine) {
    const auto m = static_cast<Eigen::Index>(data.points.size());
    const int p = n_params(N, sine);

    Eigen::MatrixXd A = design(data, omega, N, sine);
    Eigen::VectorXd y(m);
    Eigen::VectorXd w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& pt = data.points[static_cast<std::size_t>(i)];
        y(i) = pt.delta;
        w(i) = 1.0 / pt.sigma;
    }
    const Eigen::MatrixXd Aw = w.asDiagonal() * A;
    const Eigen::VectorXd yw = w.cwiseProduct(y);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aw);
    qr.setThreshold(1e-10);
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const double rmax = std::abs(R(0, 0));
    const double rmin = std::abs(R(p - 1, p - 1));
    const double condition = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
    if (qr.rank() < p) {
        std::ostringstream os;
        os << "fit_fourier_modes: design matrix is rank deficient (rank " << qr.rank() << " of " << p
           << ", condition estimate " << condition << "); sample times alias at omega = " << omega;
        throw RankDeficient(os.str(), condition);
    }

    FitResult out;
    out.omega = omega;
    out.n_harmonics = N;
    out.include_sine = sine;
    out.coefficients = qr.solve(yw);
    out.condition = condition;

    // cov = P (R^T R)^{-1} P^T
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
    const auto& perm = qr.colsPermutation();
    out.covariance = perm * cov_perm * perm.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    out.errors = out.covariance.diagonal().cwiseSqrt();

    const Eigen::VectorXd model = A * out.coefficients;
    out.residuals.resize(static_cast<std::size_t>(m));
    out.chi2 = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double res = y(i) - model(i);
        out.residuals[static_cast<std::size_t>(i)] = res;
        out.chi2 += (res * w(i)) * (res * w(i));
    }
    out.dof = static_cast<int>(m) - p;
    return out;
}

}  // namespace

void AsymmetryDataset::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!std::isfinite(p.t) || !std::isfinite(p.delta) || !std::isfinite(p.sigma)) {
            throw DataError("dataset '" + label + "': non-finite value in point " + std::to_string(i + 1));
        }
        if (!(p.sigma > 0.0)) {
            throw DataError("dataset '" + label + "': sigma must be positive (point " + std::to_string(i + 1) + ")");
        }
        if (i > 0 && !(p.t > points[i - 1].t)) {
            throw DataError("dataset '" + label + "': times must increase strictly (point " + std::to_string(i + 1) +
                            ")");
        }
    }
}

AsymmetryDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_dataset: cannot open '" + path + "'");

    AsymmetryDataset data;
    data.label = stem_of(path);
    std::string raw;
    int line = 0;
    bool header_seen = false;
    double last_t = -std::numeric_limits<double>::infinity();
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#') continue;
        if (!header_seen) {
            std::string h;
            for (char c : s) {
                if (c != ' ' && c != '\t') h.push_back(c);
            }
            if (h != "t_ps,asymmetry,sigma") {
                std::ostringstream os;
                os << path << ":" << line << ": expected header 't_ps,asymmetry,sigma', got '" << s << "'";
                throw DataError(os.str());
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(s);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 3) {
            std::ostringstream os;
            os << path << ":" << line << ": expected 3 fields, found " << fields.size();
            throw DataError(os.str());
        }
        AsymmetryPoint p{parse_field(fields[0], path, line, "t_ps"), parse_field(fields[1], path, line, "asymmetry"),
                         parse_field(fields[2], path, line, "sigma")};
        if (!(p.sigma > 0.0)) {
            std::ostringstream os;
            os << path << ":" << line << ": sigma must be positive (got " << fields[2] << ")";
            throw DataError(os.str());
        }
        if (!(p.t > last_t)) {
            std::ostringstream os;
            os << path << ":" << line << ": t_ps must increase strictly (" << p.t << " after " << last_t << ")";
            throw DataError(os.str());
        }
        last_t = p.t;
        data.points.push_back(p);
    }
    if (!header_seen) throw DataError(path + ": missing header 't_ps,asymmetry,sigma'");
    data.validate();
    return data;
}

void save_dataset(const AsymmetryDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("save_dataset: cannot write '" + path + "'");
    out << "# " << data.label << "\n";
    out << "t_ps,asymmetry,sigma\n";
    char buf[128];
    for (const auto& p : data.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.t, p.delta, p.sigma);
        out << buf;
    }
    if (!out) throw DataError("save_dataset: write failed for '" + path + "'");
}

FourierSpectrum FitResult::cosine_spectrum() const {
    FourierSpectrum s;
    s.kind = SeriesKind::Even;
    s.d0 = coefficients(0);
    s.d0_err = errors(0);
    for (int n = 1; n <= n_harmonics; ++n) {
        s.coeffs.push_back(coefficients(n));
        s.errors.push_back(errors(n));
    }
    s.covariance = covariance.topLeftCorner(n_harmonics + 1, n_harmonics + 1);
    return s;
}

double FitResult::model(double t) const {
    double v = coefficients(0);
    for (int n = 1; n <= n_harmonics; ++n) {
        v += coefficients(n) * std::cos(n * omega * t);
        if (include_sine) v += coefficients(n_harmonics + n) * std::sin(n * omega * t);
    }
    return v;
}

FitResult fit_fourier_modes(const AsymmetryDataset& data, int n_harmonics) {
    FitOptions o;
    o.n_harmonics = n_harmonics;
    return fit_fourier_modes(data, o);
}

FitResult fit_fourier_modes(const AsymmetryDataset& data, const FitOptions& options) {
    const int N = options.n_harmonics;
    if (N < 1) throw InvalidArgument("fit_fourier_modes: at least one harmonic is required");
    const double omega = options.omega.value_or(data.omega);
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("fit_fourier_modes: omega must be positive");
    data.validate();
    const int p = n_params(N, options.include_sine);
    if (static_cast<int>(data.points.size()) < p + 1) {
        std::ostringstream os;
        os << "fit_fourier_modes: " << data.points.size() << " points cannot support " << p
           << " parameters with dof >= 1";
        throw DataError(os.str());
    }

    if (!options.refine_omega) return linear_fit(data, omega, N, options.include_sine);

    auto chi2 = [&](double w) {
        try {
            return linear_fit(data, w, N, options.include_sine).chi2;
        } catch (const RankDeficient&) {
            return std::numeric_limits<double>::max();
        }
    };
    const auto best = boost::math::tools::brent_find_minima(chi2, 0.98 * omega, 1.02 * omega, 40);
    return linear_fit(data, best.first, N, options.include_sine);
}

std::vector<std::optional<double>> coefficient_pvalues(const FitResult& fit) {
    if (fit.dof < 1) throw InvalidArgument("coefficient_pvalues: dof must be >= 1");
    const boost::math::students_t dist(fit.dof);
    std::vector<std::optional<double>> out;
    for (Eigen::Index i = 0; i < fit.coefficients.size(); ++i) {
        const double err = fit.errors(i);
        if (!(err > 0.0)) {
            out.emplace_back(std::nullopt);
            continue;
        }
        const double t = std::abs(fit.coefficients(i)) / err;
        out.emplace_back(2.0 * boost::math::cdf(boost::math::complement(dist, t)));
    }
    return out;
}

RExtraction estimate_r(const FitResult& fit, std::optional<double> amplitude_R) {
    if (fit.n_harmonics < 2) throw InvalidArgument("estimate_r: needs at least two harmonics");
    if (amplitude_R && !(*amplitude_R > 0.0 && *amplitude_R <= 1.0)) {
        throw InvalidArgument("estimate_r: amplitude R must lie in (0, 1]");
    }

    const FourierSpectrum spec = fit.cosine_spectrum();
    RExtraction out;
    out.amplitude = amplitude_R;
    bool any_reliable = false;
    std::vector<std::pair<double, double>> values;
    for (int k = 0; k < fit.n_harmonics; ++k) {
        AnharmonicityEstimate est = anharmonicity(spec, k);
        out.r_tilde.push_back(est.r_hat);
        out.r_tilde_err.push_back(est.r_err);
        if (amplitude_R && std::isfinite(est.r_hat)) {
            const auto [r, r_err] = correct_effective_r(est.r_hat, est.r_err, *amplitude_R);
            est.r_hat = r;
            est.r_err = r_err;
        }
        any_reliable = any_reliable || (est.reliable && std::isfinite(est.r_hat));
        values.emplace_back(est.r_hat, est.r_err);
        out.per_ratio.push_back(est);
    }

    if (!any_reliable) {
        out.diagnostic = "every anharmonicity ratio has a denominator consistent with zero; no weighted r";
        return out;
    }
    const auto mean = weighted_average(values);
    if (!mean) {
        out.diagnostic = "no estimate carries a finite positive error; no weighted r";
        return out;
    }
    out.weighted_r = mean->value;
    out.weighted_r_err = mean->error;
    return out;
}

AsymmetryDataset synthesize_dataset(const SynthesisSpec& spec) {
    if (!(spec.r > 0.0 && spec.r < 1.0)) throw InvalidArgument("synthesize_dataset: requires 0 < r < 1");
    if (!(spec.E_mag > 0.0)) throw InvalidArgument("synthesize_dataset: |E| must be positive");
    if (spec.n_points < 2) throw InvalidArgument("synthesize_dataset: needs at least two points");
    if (!(spec.t_max > 0.0)) throw InvalidArgument("synthesize_dataset: t_max must be positive");

    const auto n = static_cast<std::size_t>(spec.n_points);
    std::vector<double> sigmas(n);
    bool noisy = true;
    if (const double* s = std::get_if<double>(&spec.noise)) {
        if (!(*s >= 0.0)) throw InvalidArgument("synthesize_dataset: noise sigma must be >= 0");
        noisy = *s > 0.0;
        std::fill(sigmas.begin(), sigmas.end(), noisy ? *s : 1.0);
    } else {
        const auto& v = std::get<std::vector<double>>(spec.noise);
        if (v.size() != n) throw InvalidArgument("synthesize_dataset: noise schedule length must equal n_points");
        for (double s : v) {
            if (!(s > 0.0)) throw InvalidArgument("synthesize_dataset: scheduled sigmas must be positive");
        }
        sigmas = v;
    }

    AsymmetryDataset data;
    data.label = spec.label;
    data.omega = restore_units(spec.r, spec.E_mag).omega;
    const double gamma_mag = 2.0 * spec.r * spec.E_mag;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    data.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = spec.t_max * static_cast<double>(i) / static_cast<double>(n);
        double delta = cuq_projections(gamma_mag * t, spec.r).b_exg;
        if (noisy) delta += sigmas[i] * normal(rng);
        data.points.push_back({t, delta, sigmas[i]});
    }
    return data;
}

std::vector<double> widening_noise(int n_points, double sigma_start, double sigma_end) {
    if (n_points < 1) throw InvalidArgument("widening_noise: n_points must be >= 1");
    if (!(sigma_start > 0.0) || !(sigma_end > 0.0)) throw InvalidArgument("widening_noise: sigmas must be positive");
    std::vector<double> out(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double f = n_points == 1 ? 0.0 : static_cast<double>(i) / (n_points - 1);
        out[static_cast<std::size_t>(i)] = sigma_start + f * (sigma_end - sigma_start);
    }
    return out;
}

}  // namespace cuq
