// Harmonic content of CUQ oscillations.
//
// Odd series:  b . gamma       = sum_n c_n sin(n w tau)
// Even series: b . (e x gamma) = d_0 + sum_n d_n cos(n w tau)
// Both progressions are geometric with ratio q = r / (1 + sqrt(1 - r^2)).

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace cuq {

enum class SeriesKind { Odd, Even };

const char* to_string(SeriesKind kind);

struct FourierSpectrum {
    SeriesKind kind = SeriesKind::Even;
    double d0 = 0.0;
    std::vector<double> coeffs;  // coeffs[n - 1] is the n-th harmonic
    // Optional 1-sigma uncertainties; when present, d0_err and errors are both set.
    double d0_err = 0.0;
    std::vector<double> errors;
    // Optional covariance over (d0, c_1, ..., c_N); used for ratio errors.
    std::optional<Eigen::MatrixXd> covariance;

    int harmonics() const noexcept { return static_cast<int>(coeffs.size()); }
    // Coefficient by index, n = 0 meaning d0.
    double coefficient(int n) const;
    double error(int n) const;
    double covariance_between(int m, int n) const;  // zero if no covariance stored
    // Partial sum at phase w*tau.
    double evaluate(double phase) const;
};

// c_n = 2 (sqrt(1 - r^2)/r) q^n; finite as r -> 0.
double closed_form_cn(int n, double r);
// d_0 = -q.
double closed_form_d0(double r);
double geometric_ratio(double r);  // q

FourierSpectrum closed_form_spectrum(double r, int N, SeriesKind kind);

// Projects a P_hat-periodic signal onto sin/cos(n 2 pi tau / P_hat) over
// [-P_hat/2, P_hat/2] with adaptive Gauss-Kronrod quadrature. Throws
// InvalidArgument when N is outside [1, 64] or the endpoint values differ by
// more than 1e-6, NumericalError when the error estimate exceeds 1e-10.
FourierSpectrum quadrature_spectrum(const std::function<double(double)>& signal, double P_hat, int N,
                                    SeriesKind kind);

struct AnharmonicityEstimate {
    SeriesKind kind = SeriesKind::Odd;
    int order = 1;  // Odd: C_order = c_{order+1}/c_order; Even: D_order = d_{order+1}/d_order
    double ratio = 0.0;
    double ratio_err = 0.0;
    bool reliable = true;  // false when the denominator is within its own error of zero
    double r_hat = 0.0;
    double r_err = 0.0;
};

// Builds C_n (Odd, n >= 1) or D_n (Even, n >= 0) with first-order error
// propagation, and fills r_hat/r_err through r_from_anharmonicity.
AnharmonicityEstimate anharmonicity(const FourierSpectrum& spectrum, int order);

// Ratio routes: r = 2 rho/(rho^2 + 1); the D_0 route: r = 1/sqrt(1 + rho^2/4),
// with rho = |ratio|.
std::pair<double, double> r_from_anharmonicity(const AnharmonicityEstimate& est);

// Undoes the amplitude suppression of an orbit whose gamma-amplitude is R:
// r = r~ / sqrt(R^2 + r~^2 (1 - R^2)).
double correct_effective_r(double r_tilde, double amplitude_R);
std::pair<double, double> correct_effective_r(double r_tilde, double r_tilde_err, double amplitude_R);

struct WeightedMean {
    double value;
    double error;
    int used;
};

// Inverse-variance mean over (value, error) pairs; entries with non-finite
// values or non-positive errors are skipped. nullopt if nothing is usable.
std::optional<WeightedMean> weighted_average(const std::vector<std::pair<double, double>>& values);

}  // namespace cuq
