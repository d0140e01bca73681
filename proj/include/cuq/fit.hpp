// Flavour-asymmetry time series and their truncated Fourier fits.
//
// The model is delta(t) = d_0 + sum_{n=1..N} d_n cos(n w t) (optionally with
// sine columns s_n sin(n w t) appended after the cosines), fitted by
// sigma-weighted linear least squares at a fixed, externally supplied w.

#pragma once

#include "cuq/errors.hpp"
#include "cuq/fourier.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cuq {

struct AsymmetryPoint {
    double t;      // ps
    double delta;  // flavour asymmetry
    double sigma;  // > 0
};

struct AsymmetryDataset {
    std::string label;
    double omega = 0.0;  // ps^-1; 0 means "not set"
    std::vector<AsymmetryPoint> points;

    // Throws DataError on non-finite values, non-increasing t or sigma <= 0.
    void validate() const;
};

// CSV with header `t_ps,asymmetry,sigma`; lines starting with '#' and blank
// lines are skipped. Errors name the offending line.
AsymmetryDataset load_dataset(const std::string& path);
void save_dataset(const AsymmetryDataset& data, const std::string& path);

class RankDeficient : public NumericalError {
public:
    RankDeficient(const std::string& what, double condition) : NumericalError(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

struct FitOptions {
    int n_harmonics = 2;
    bool include_sine = false;
    // 1-D chi^2 minimisation of w within +-2% before the final linear fit.
    bool refine_omega = false;
    std::optional<double> omega;  // overrides the dataset's omega
};

struct FitResult {
    double omega = 0.0;
    int n_harmonics = 0;
    bool include_sine = false;
    Eigen::VectorXd coefficients;  // d_0..d_N, then s_1..s_N if include_sine
    Eigen::VectorXd errors;
    Eigen::MatrixXd covariance;    // inverse normal matrix, unscaled
    double chi2 = 0.0;
    int dof = 0;                   // #points - #parameters
    double condition = 1.0;        // |R_11| / |R_pp| of the pivoted QR
    std::vector<double> residuals; // delta_i - model_i

    // Even spectrum d_0..d_N with the matching covariance block.
    FourierSpectrum cosine_spectrum() const;
    double model(double t) const;
};

FitResult fit_fourier_modes(const AsymmetryDataset& data, int n_harmonics);
FitResult fit_fourier_modes(const AsymmetryDataset& data, const FitOptions& options);

// Two-sided Student-t p-value of each coefficient against zero with fit.dof
// degrees of freedom; nullopt where the standard error is zero.
std::vector<std::optional<double>> coefficient_pvalues(const FitResult& fit);

struct RExtraction {
    std::vector<AnharmonicityEstimate> per_ratio;  // D_0..D_{N-1}; r_hat is corrected when R is given
    std::vector<double> r_tilde;                   // uncorrected r per ratio
    std::vector<double> r_tilde_err;
    std::optional<double> amplitude;
    std::optional<double> weighted_r;
    std::optional<double> weighted_r_err;
    std::string diagnostic;  // non-empty when no weighted value could be formed
};

// Requires N >= 2. The weighted average runs over every finite estimate as
// long as at least one ratio is reliable.
RExtraction estimate_r(const FitResult& fit, std::optional<double> amplitude_R = std::nullopt);

using NoiseSchedule = std::variant<double, std::vector<double>>;

struct SynthesisSpec {
    double r = 0.85;
    double E_mag = 0.253;  // ps^-1
    int n_points = 50;
    double t_max = 0.0;  // ps; samples at t_i = i t_max / n_points, i = 0..n-1
    // A single sigma (0: noiseless with unit sigma column) or one per point.
    NoiseSchedule noise = 0.0;
    std::uint64_t seed = 0;
    std::string label = "synthetic";
};

// delta(t) = b . (e x gamma) of the CUQ started at e x gamma, plus Gaussian
// noise. Sets omega = 2|E| sqrt(1 - r^2).
AsymmetryDataset synthesize_dataset(const SynthesisSpec& spec);

// sigma_i growing linearly from sigma_start to sigma_end across n points.
std::vector<double> widening_noise(int n_points, double sigma_start, double sigma_end);

}  // namespace cuq
