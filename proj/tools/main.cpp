#include "cuq/analytic.hpp"
#include "cuq/errors.hpp"
#include "cuq/fit.hpp"
#include "cuq/fourier.hpp"
#include "cuq/integrate.hpp"
#include "cuq/meson.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace cuq;

namespace {

enum class Format { Csv, Json };

struct Global {
    std::string output_dir;
    Format format = Format::Csv;
    std::uint64_t seed = 0;
};

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Writes to <output_dir>/<name> when an output directory is set, otherwise to stdout.
void emit(const Global& g, const std::string& name, const std::string& content) {
    if (g.output_dir.empty()) {
        std::cout << content;
        return;
    }
    std::error_code ec;
    fs::create_directories(g.output_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + g.output_dir + "': " + ec.message());
    const fs::path path = fs::path(g.output_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string ext(const Global& g) { return g.format == Format::Json ? ".json" : ".csv"; }

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// "a,b,c" or "start:stop:step"
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    auto to_double = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw InvalidArgument("invalid number '" + s + "' in grid '" + text + "'");
        }
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw InvalidArgument("grid range must be start:stop:step, got '" + text + "'");
        const double a = to_double(parts[0]), b = to_double(parts[1]), h = to_double(parts[2]);
        if (!(h > 0.0) || b < a) throw InvalidArgument("grid range needs step > 0 and stop >= start");
        const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9)) + 1;
        if (n > 100000) throw InvalidArgument("grid has too many points");
        for (long i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * h);
    } else {
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p));
    }
    if (out.empty()) throw InvalidArgument("empty grid");
    return out;
}

// Parses "3P" (multiples of the CUQ period) or a plain tau value.
double parse_duration(const std::string& text, double r) {
    if (!text.empty() && (text.back() == 'P' || text.back() == 'p')) {
        if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("period-relative --t-max needs 0 < r < 1");
        const double k = parse_grid(text.substr(0, text.size() - 1)).front();
        if (!(k > 0.0)) throw InvalidArgument("--t-max must be positive");
        return k * cuq_clock(r).P_hat;
    }
    const double t = parse_grid(text).front();
    if (!(t > 0.0)) throw InvalidArgument("--t-max must be positive");
    return t;
}

Vec3 parse_b0(const std::string& text, const QubitModel& m) {
    if (text == "mixed") return Vec3::Zero();
    if (text == "e") return m.e();
    if (text == "gamma") return m.gamma();
    if (text == "exg") {
        if (m.e_cross_gamma_unit().isZero()) throw InvalidArgument("--b0 exg is undefined when e is parallel to gamma");
        return m.e_cross_gamma_unit();
    }
    const std::vector<double> v = parse_grid(text);
    if (v.size() != 3) throw InvalidArgument("--b0 must be exg|mixed|gamma|e or 'x,y,z'");
    const Vec3 b(v[0], v[1], v[2]);
    if (b.norm() > 1.0 + 1e-12) throw InvalidArgument("--b0 must satisfy |b0| <= 1");
    return b;
}

// Largest |b| on a trajectory, refined between stored samples.
std::pair<double, double> max_magnitude(const Trajectory& tr) {
    const auto& s = tr.samples();
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].magnitude() > s[best].magnitude()) best = i;
    double tau = s[best].tau(), value = s[best].magnitude();
    if (best > 0 && best + 1 < s.size()) {
        const auto [t, neg] = boost::math::tools::brent_find_minima(
            [&](double x) { return -tr.at(x).norm(); }, s[best - 1].tau(), s[best + 1].tau(), 50);
        if (-neg > value) {
            tau = t;
            value = -neg;
        }
    }
    return {std::min(value, 1.0), tau};
}

// simulate

struct SimulateArgs {
    double r = 0.0;
    double theta_deg = 90.0;
    double E_mag = 1.0;
    std::string b0 = "exg";
    std::string t_max;
    int samples_per_period = 256;
    int points = 1000;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
};

int run_simulate(const Global& g, const SimulateArgs& a) {
    const QubitModel m = QubitModel::from_angle(deg2rad(a.theta_deg), a.r, a.E_mag);
    const Vec3 b0 = parse_b0(a.b0, m);
    const double tau_end = a.t_max.empty() ? (a.r < 1.0 ? 3.0 * cuq_clock(a.r).P_hat : 30.0)
                                           : parse_duration(a.t_max, a.r);
    IntegratorOptions opt;
    opt.rel_tol = a.rel_tol;
    opt.abs_tol = a.abs_tol;
    if (a.r < 1.0) {
        opt.output_times = periodic_output_grid(a.r, tau_end, a.samples_per_period);
    } else {
        if (a.points < 1) throw InvalidArgument("--points must be >= 1");
        for (int i = 1; i <= a.points; ++i) opt.output_times.push_back(tau_end * i / a.points);
        opt.output_times.back() = tau_end;
    }
    const Trajectory tr = evolve(m, b0, tau_end, opt);
    const Vec3 exg = m.e_cross_gamma_unit();

    const std::vector<std::string> cols{"tau", "b1", "b2", "b3", "b_mag", "b_dot_gamma", "b_dot_exg"};
    auto row = [&](const BlochState& s) {
        const Vec3& b = s.b();
        return std::vector<double>{s.tau(), b.x(), b.y(), b.z(), b.norm(), b.dot(m.gamma()), b.dot(exg)};
    };
    std::ostringstream out;
    if (g.format == Format::Csv) {
        for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
        out << '\n';
        for (const auto& s : tr.samples()) {
            const auto v = row(s);
            for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << num(v[i]);
            out << '\n';
        }
    } else {
        json j;
        j["r"] = a.r;
        j["theta_eg_deg"] = a.theta_deg;
        j["E_mag"] = a.E_mag;
        j["b0"] = {b0.x(), b0.y(), b0.z()};
        j["tau_end"] = tau_end;
        j["columns"] = cols;
        j["rows"] = json::array();
        for (const auto& s : tr.samples()) j["rows"].push_back(row(s));
        out << j.dump(2) << '\n';
    }
    emit(g, "simulate" + ext(g), out.str());
    return 0;
}

// sweep-bmax

int run_sweep(const Global& g, const std::string& r_grid, const std::string& b_grid, int spp) {
    const std::vector<double> rs = parse_grid(r_grid);
    const std::vector<double> bs = parse_grid(b_grid);
    for (double r : rs)
        if (!(r > 0.0)) throw InvalidArgument("--r-grid values must be positive");
    for (double b : bs)
        if (!(b >= 0.0 && b <= 1.0)) throw InvalidArgument("--b0-grid values must lie in [0, 1]");

    struct Row {
        double r, b0, bmax, tau;
        std::string regime;
        std::optional<double> closed;
    };
    std::vector<Row> rows;
    for (double r : rs) {
        const QubitModel m = QubitModel::from_angle(std::numbers::pi / 2, r);
        for (double b : bs) {
            IntegratorOptions opt;
            double tau_end;
            if (r < 1.0) {
                tau_end = 5.0 * cuq_clock(r).P_hat;
                opt.output_times = periodic_output_grid(r, tau_end, spp);
            } else {
                // long enough for the algebraic approach at r = 1
                tau_end = 200.0;
            }
            const Trajectory tr = evolve(m, b * m.gamma(), tau_end, opt);
            const auto [bmax, tau] = max_magnitude(tr);
            std::optional<double> closed;
            if (b == 0.0 && r <= 1.0) closed = 2.0 * r / (1.0 + r * r);
            if (b == 1.0) closed = 1.0;
            rows.push_back({r, b, bmax, tau, to_string(classify_damping(r)), closed});
        }
    }

    std::ostringstream out;
    if (g.format == Format::Csv) {
        out << "r,b0_mag,max_b_mag,tau_at_max,damping,closed_form\n";
        for (const auto& x : rows)
            out << num(x.r) << ',' << num(x.b0) << ',' << num(x.bmax) << ',' << num(x.tau) << ',' << x.regime << ','
                << (x.closed ? num(*x.closed) : "") << '\n';
    } else {
        json j = json::array();
        for (const auto& x : rows) {
            j.push_back({{"r", x.r},
                         {"b0_mag", x.b0},
                         {"max_b_mag", x.bmax},
                         {"tau_at_max", x.tau},
                         {"damping", x.regime},
                         {"closed_form", x.closed ? json(*x.closed) : json(nullptr)}});
        }
        out << j.dump(2) << '\n';
    }
    emit(g, "sweep_bmax" + ext(g), out.str());
    return 0;
}

// fourier

int run_fourier(const Global& g, double r, int N, const std::string& series) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("fourier: r must lie in (0, 1)");
    std::vector<SeriesKind> kinds;
    if (series == "odd" || series == "both") kinds.push_back(SeriesKind::Odd);
    if (series == "even" || series == "both") kinds.push_back(SeriesKind::Even);
    const double P = cuq_clock(r).P_hat;

    struct Line {
        SeriesKind kind;
        int n;
        double closed, quad;
    };
    std::vector<Line> lines;
    double worst = 0.0;
    for (SeriesKind k : kinds) {
        const FourierSpectrum cf = closed_form_spectrum(r, N, k);
        const FourierSpectrum qs = quadrature_spectrum(
            [&](double tau) {
                const auto p = cuq_projections(tau, r);
                return k == SeriesKind::Odd ? p.b_gamma : p.b_exg;
            },
            P, N, k);
        for (int n = (k == SeriesKind::Even ? 0 : 1); n <= N; ++n) {
            lines.push_back({k, n, cf.coefficient(n), qs.coefficient(n)});
            worst = std::max(worst, std::abs(cf.coefficient(n) - qs.coefficient(n)));
        }
    }

    std::ostringstream out;
    if (g.format == Format::Csv) {
        out << "# r=" << num(r) << " q=" << num(geometric_ratio(r)) << " max_abs_deviation=" << num(worst) << '\n';
        out << "series,n,closed_form,quadrature,abs_diff\n";
        for (const auto& l : lines)
            out << to_string(l.kind) << ',' << l.n << ',' << num(l.closed) << ',' << num(l.quad) << ','
                << num(std::abs(l.closed - l.quad)) << '\n';
    } else {
        json j;
        j["r"] = r;
        j["N"] = N;
        j["q"] = geometric_ratio(r);
        j["coefficients"] = json::array();
        for (const auto& l : lines)
            j["coefficients"].push_back({{"series", to_string(l.kind)},
                                         {"n", l.n},
                                         {"closed_form", l.closed},
                                         {"quadrature", l.quad},
                                         {"abs_diff", std::abs(l.closed - l.quad)}});
        j["max_abs_deviation"] = worst;
        out << j.dump(2) << '\n';
    }
    emit(g, "fourier" + ext(g), out.str());
    return 0;
}

// convert

json bloch_json(const BlochParameters& p) {
    return {{"r", p.r}, {"theta_eg_deg", p.theta_eg_deg}, {"E_mag", p.E_mag}};
}

json observables_json(const MesonObservables& o) {
    return {{"delta_E", o.delta_E},
            {"delta_Gamma", o.delta_Gamma},
            {"q_over_p", o.q_over_p},
            {"q_over_p_minus_1", o.q_over_p - 1.0}};
}

int run_convert(const Global& g, const std::vector<double>& from_bloch, const std::vector<double>& from_obs) {
    BlochParameters primary;
    std::optional<BlochParameters> alternate;
    std::string input;
    if (!from_bloch.empty()) {
        input = "bloch";
        primary = {from_bloch[0], normalize_degrees(from_bloch[1]), from_bloch[2]};
        if (!(primary.r >= 0.0) || !(primary.E_mag > 0.0))
            throw InvalidArgument("--from-bloch needs r >= 0 and |E| > 0");
        const BlochParameters alt{primary.r, normalize_degrees(180.0 - primary.theta_eg_deg), primary.E_mag};
        if (primary.r > 0.0 && alt.theta_eg_deg != primary.theta_eg_deg) alternate = alt;
    } else {
        input = "observables";
        const BlochInversion inv = bloch_from_observables({from_obs[0], from_obs[1], from_obs[2]});
        primary = inv.params;
        if (inv.ambiguous) alternate = inv.alternate;
    }
    const MesonObservables obs = observables_from_bloch(primary);
    const std::string damping = primary.r > 0.0 ? to_string(classify_damping(primary.r)) : "Undamped";

    std::ostringstream out;
    if (g.format == Format::Json) {
        json j;
        j["input"] = input;
        j["bloch"] = bloch_json(primary);
        j["observables"] = observables_json(obs);
        j["damping_class"] = damping;
        j["ambiguous"] = alternate.has_value();
        if (alternate) {
            j["alternate"] = {{"bloch", bloch_json(*alternate)},
                              {"observables", observables_json(observables_from_bloch(*alternate))}};
        } else {
            j["alternate"] = nullptr;
        }
        out << j.dump(2) << '\n';
    } else {
        out << "branch,r,theta_eg_deg,E_mag,delta_E,delta_Gamma,q_over_p,damping\n";
        auto line = [&](const char* name, const BlochParameters& p) {
            const MesonObservables o = observables_from_bloch(p);
            out << name << ',' << num(p.r) << ',' << num(p.theta_eg_deg) << ',' << num(p.E_mag) << ','
                << num(o.delta_E) << ',' << num(o.delta_Gamma) << ',' << num(o.q_over_p) << ',' << damping << '\n';
        };
        line("primary", primary);
        if (alternate) line("alternate", *alternate);
    }
    emit(g, "convert" + ext(g), out.str());
    return 0;
}

// fit

struct FitArgs {
    std::string dataset;
    std::optional<double> omega;
    int n_harmonics = 2;
    std::optional<double> amplitude;
    bool sine = false;
    bool refine = false;
    std::string label;
    std::optional<double> synthetic_r;
    double synthetic_sigma = 0.05;
    int synthetic_points = 50;
    double synthetic_E = 0.253;
    std::optional<double> synthetic_t_max;
};

std::string fit_table(const std::string& label, const FitResult& fit, const std::vector<std::optional<double>>& pv,
                      const RExtraction& ex) {
    std::ostringstream t;
    char buf[160];
    t << "Fit: " << label << "  omega = " << num(fit.omega) << " ps^-1  N = " << fit.n_harmonics << '\n';
    std::snprintf(buf, sizeof buf, "%-8s %14s %12s %10s\n", "coef", "value", "error", "p-value");
    t << buf;
    const int nc = fit.n_harmonics + 1;
    for (int i = 0; i < static_cast<int>(fit.coefficients.size()); ++i) {
        const std::string name = i < nc ? "d_" + std::to_string(i) : "s_" + std::to_string(i - nc + 1);
        std::snprintf(buf, sizeof buf, "%-8s %14.6g %12.3g %10s\n", name.c_str(), fit.coefficients[i], fit.errors[i],
                      pv[i] ? num(*pv[i]).c_str() : "-");
        t << buf;
    }
    std::snprintf(buf, sizeof buf, "chi2 = %.4g  dof = %d\n", fit.chi2, fit.dof);
    t << buf;
    std::snprintf(buf, sizeof buf, "%-8s %14s %12s %12s %12s %s\n", "ratio", "value", "error", "r", "r_err", "");
    t << buf;
    for (const auto& e : ex.per_ratio) {
        const std::string name = "D_" + std::to_string(e.order);
        std::snprintf(buf, sizeof buf, "%-8s %14.6g %12.3g %12.4g %12.3g %s\n", name.c_str(), e.ratio, e.ratio_err,
                      e.r_hat, e.r_err, e.reliable ? "" : "(unreliable)");
        t << buf;
    }
    if (ex.weighted_r) {
        std::snprintf(buf, sizeof buf, "weighted r = %.4g +- %.3g\n", *ex.weighted_r, *ex.weighted_r_err);
        t << buf;
    } else {
        t << "weighted r: " << ex.diagnostic << '\n';
    }
    return t.str();
}

int run_fit(const Global& g, const FitArgs& a) {
    AsymmetryDataset data;
    if (a.synthetic_r) {
        if (!a.dataset.empty()) throw InvalidArgument("give either a dataset path or --synthetic-r, not both");
        SynthesisSpec s;
        s.r = *a.synthetic_r;
        s.E_mag = a.synthetic_E;
        s.n_points = a.synthetic_points;
        if (s.r > 0.0 && s.r < 1.0 && s.E_mag > 0.0)
            s.t_max = a.synthetic_t_max.value_or(2.0 * restore_units(s.r, s.E_mag).period_ps);
        s.noise = a.synthetic_sigma;
        s.seed = g.seed;
        s.label = "synthetic";
        data = synthesize_dataset(s);
    } else {
        if (a.dataset.empty()) throw InvalidArgument("fit needs a dataset path or --synthetic-r");
        data = load_dataset(a.dataset);
    }
    if (!a.label.empty()) data.label = a.label;
    if (a.amplitude && !(*a.amplitude > 0.0 && *a.amplitude <= 1.0))
        throw InvalidArgument("--amplitude must lie in (0, 1]");

    FitOptions opt;
    opt.n_harmonics = a.n_harmonics;
    opt.include_sine = a.sine;
    opt.refine_omega = a.refine;
    opt.omega = a.omega;
    if (!opt.omega && !(data.omega > 0.0)) throw InvalidArgument("fit needs --omega (the dataset carries none)");
    const FitResult fit = fit_fourier_modes(data, opt);
    std::vector<std::optional<double>> pv(static_cast<std::size_t>(fit.coefficients.size()));
    if (fit.dof >= 1) pv = coefficient_pvalues(fit);
    const RExtraction ex = estimate_r(fit, a.amplitude);

    json j;
    j["label"] = data.label;
    j["omega"] = fit.omega;
    j["N"] = fit.n_harmonics;
    const int nc = fit.n_harmonics + 1;
    auto coef = [&](int i, int n) {
        return json{{"n", n},
                    {"value", fit.coefficients[i]},
                    {"error", fit.errors[i]},
                    {"p_value", pv[i] ? json(*pv[i]) : json(nullptr)}};
    };
    j["coefficients"] = json::array();
    for (int i = 0; i < nc; ++i) j["coefficients"].push_back(coef(i, i));
    if (fit.include_sine) {
        j["sine_coefficients"] = json::array();
        for (int i = nc; i < static_cast<int>(fit.coefficients.size()); ++i)
            j["sine_coefficients"].push_back(coef(i, i - nc + 1));
    }
    j["chi2"] = fit.chi2;
    j["dof"] = fit.dof;
    j["r_estimates"] = json::array();
    for (std::size_t i = 0; i < ex.per_ratio.size(); ++i) {
        const auto& e = ex.per_ratio[i];
        j["r_estimates"].push_back({{"kind", "D"},
                                    {"order", e.order},
                                    {"ratio", e.ratio},
                                    {"ratio_err", e.ratio_err},
                                    {"r", e.r_hat},
                                    {"r_err", e.r_err},
                                    {"r_tilde", ex.r_tilde[i]},
                                    {"reliable", e.reliable}});
    }
    j["weighted_r"] = ex.weighted_r ? json(*ex.weighted_r) : json(nullptr);
    j["weighted_r_err"] = ex.weighted_r_err ? json(*ex.weighted_r_err) : json(nullptr);
    j["amplitude"] = ex.amplitude ? json(*ex.amplitude) : json(nullptr);
    if (!ex.diagnostic.empty()) j["diagnostic"] = ex.diagnostic;
    const std::string fit_json = j.dump(2) + "\n";

    std::ostringstream res;
    res << "t_ps,asymmetry,sigma,model,residual,pull\n";
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        const auto& p = data.points[i];
        res << num(p.t) << ',' << num(p.delta) << ',' << num(p.sigma) << ',' << num(fit.model(p.t)) << ','
            << num(fit.residuals[i]) << ',' << num(fit.residuals[i] / p.sigma) << '\n';
    }
    const std::string table = fit_table(data.label, fit, pv, ex);

    if (g.output_dir.empty()) {
        std::cout << (g.format == Format::Json ? fit_json : res.str());
        std::cerr << table;
    } else {
        emit(g, data.label + "_fit.json", fit_json);
        emit(g, data.label + "_residuals.csv", res.str());
        std::cout << table;
    }
    return 0;
}

// catalogue

int run_catalogue(const Global& g, bool derived) {
    const std::vector<std::string> cols{"system", "delta_E", "delta_E_err", "delta_Gamma", "delta_Gamma_err",
                                        "q_over_p_minus_1", "err", "r", "r_err", "theta_eg_deg", "theta_err",
                                        "E_mag", "E_mag_err"};
    std::ostringstream out;
    json arr = json::array();
    if (g.format == Format::Csv) {
        for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
        if (derived) out << ",r_from_observables,theta_from_observables,E_mag_from_observables";
        out << '\n';
    }
    for (const auto& c : catalogue()) {
        const std::vector<double> v{c.delta_E.value, c.delta_E.error, c.delta_Gamma.value, c.delta_Gamma.error,
                                    c.q_over_p_minus_1.value, c.q_over_p_minus_1.error, c.r.value, c.r.error,
                                    c.theta_eg_deg.value, c.theta_eg_deg.error, c.E_mag.value, c.E_mag.error};
        std::optional<BlochParameters> inv;
        if (derived) inv = bloch_from_observables(c.observables()).params;
        if (g.format == Format::Csv) {
            out << c.name;
            for (double x : v) out << ',' << num(x);
            if (inv) out << ',' << num(inv->r) << ',' << num(inv->theta_eg_deg) << ',' << num(inv->E_mag);
            out << '\n';
        } else {
            json row;
            row["system"] = c.name;
            for (std::size_t i = 0; i < v.size(); ++i) row[cols[i + 1]] = v[i];
            if (inv) row["from_observables"] = bloch_json(*inv);
            arr.push_back(row);
        }
    }
    if (g.format == Format::Json) out << arr.dump(2) << '\n';
    emit(g, "catalogue" + ext(g), out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Critical unstable qubit toolkit: simulation, spectra, meson conversion and fitting"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    std::string format = "csv";
    app.add_option("--output-dir", g.output_dir, "Write files here instead of stdout");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", g.seed, "Seed for synthetic data");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Integrate the Bloch-vector evolution");
    simulate->add_option("--r", sim.r, "|Gamma|/(2|E|)")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--theta-eg", sim.theta_deg, "Angle between e and gamma, degrees");
    simulate->add_option("--E-mag", sim.E_mag, "|E| in ps^-1")->check(CLI::PositiveNumber);
    simulate->add_option("--b0", sim.b0, "exg | mixed | gamma | e | 'x,y,z'");
    simulate->add_option("--t-max", sim.t_max, "tau_end, or a multiple of the period like 3P");
    simulate->add_option("--samples-per-period", sim.samples_per_period, "Output density for r < 1")
        ->check(CLI::Range(4, 100000));
    simulate->add_option("--points", sim.points, "Uniform output points for r >= 1")->check(CLI::Range(1, 10000000));
    simulate->add_option("--rel-tol", sim.rel_tol)->check(CLI::Range(1e-14, 1e-2));
    simulate->add_option("--abs-tol", sim.abs_tol)->check(CLI::Range(1e-16, 1e-2));

    std::string r_grid = "0.05:2:0.05", b_grid = "0,0.25,0.5,0.75,1";
    int sweep_spp = 256;
    auto* sweep = app.add_subcommand("sweep-bmax", "Maximum |b| versus r for b0 along gamma");
    sweep->add_option("--r-grid", r_grid, "r values: 'a,b,c' or start:stop:step");
    sweep->add_option("--b0-grid", b_grid, "|b0| values in [0, 1]");
    sweep->add_option("--samples-per-period", sweep_spp)->check(CLI::Range(8, 100000));

    double f_r = 0.0;
    int f_n = 10;
    std::string f_series = "both";
    auto* fourier = app.add_subcommand("fourier", "Closed-form against quadrature Fourier spectra");
    fourier->add_option("--r", f_r)->required();
    fourier->add_option("--n", f_n, "Number of harmonics")->check(CLI::Range(1, 64));
    fourier->add_option("--series", f_series)->check(CLI::IsMember({"odd", "even", "both"}));

    std::vector<double> from_bloch, from_obs;
    auto* convert = app.add_subcommand("convert", "Convert between Bloch parameters and meson observables");
    auto* ob = convert->add_option("--from-bloch", from_bloch, "r theta_eg_deg E_mag")->expected(3);
    auto* oo = convert->add_option("--from-observables", from_obs, "delta_E delta_Gamma q_over_p")->expected(3);
    ob->excludes(oo);
    convert->require_option(1);

    FitArgs fa;
    double omega = 0.0, amplitude = 0.0, syn_r = 0.0, syn_t = 0.0;
    auto* fit = app.add_subcommand("fit", "Fit Fourier modes to a flavour-asymmetry dataset");
    fit->add_option("dataset", fa.dataset, "CSV with header t_ps,asymmetry,sigma");
    auto* o_omega = fit->add_option("--omega", omega, "Angular frequency, ps^-1")->check(CLI::PositiveNumber);
    fit->add_option("--n-harmonics", fa.n_harmonics)->check(CLI::Range(1, 64));
    auto* o_amp = fit->add_option("--amplitude", amplitude, "Orbit amplitude R in (0, 1]");
    fit->add_flag("--sine", fa.sine, "Also fit sine terms");
    fit->add_flag("--refine-omega", fa.refine, "Refine omega by chi2 minimisation");
    fit->add_option("--label", fa.label);
    auto* o_syn = fit->add_option("--synthetic-r", syn_r, "Fit a seeded synthetic dataset at this r instead");
    fit->add_option("--synthetic-sigma", fa.synthetic_sigma)->check(CLI::NonNegativeNumber);
    fit->add_option("--synthetic-points", fa.synthetic_points)->check(CLI::Range(2, 10000000));
    fit->add_option("--synthetic-E-mag", fa.synthetic_E)->check(CLI::PositiveNumber);
    auto* o_synt = fit->add_option("--synthetic-t-max", syn_t, "ps; default two periods")->check(CLI::PositiveNumber);

    bool derived = false;
    auto* cat = app.add_subcommand("catalogue", "Tabulated meson systems");
    cat->add_flag("--derived", derived, "Append parameters recomputed from the observables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    g.format = format == "json" ? Format::Json : Format::Csv;
    if (*o_omega) fa.omega = omega;
    if (*o_amp) fa.amplitude = amplitude;
    if (*o_syn) fa.synthetic_r = syn_r;
    if (*o_synt) fa.synthetic_t_max = syn_t;

    try {
        if (*simulate) return run_simulate(g, sim);
        if (*sweep) return run_sweep(g, r_grid, b_grid, sweep_spp);
        if (*fourier) return run_fourier(g, f_r, f_n, f_series);
        if (*convert) return run_convert(g, from_bloch, from_obs);
        if (*fit) return run_fit(g, fa);
        if (*cat) return run_catalogue(g, derived);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
