#pragma once

#include <Eigen/Dense>

#include <vector>

namespace epr {

// Weighted nonlinear least-squares fit of N * exp(-(x-mu)^2 / (2 sigma^2)).
// Parameter order throughout: (N, mu, sigma).
struct FitResult {
    double amplitude = 0.0;
    double mean = 0.0;
    double sigma = 0.0;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    double chi2 = 0.0;
    int n_points = 0;
    bool converged = false;

    double err_amplitude() const { return std::sqrt(covariance(0, 0)); }
    double err_mean() const { return std::sqrt(covariance(1, 1)); }
    double err_sigma() const { return std::sqrt(covariance(2, 2)); }
    double resid_norm() const { return std::sqrt(chi2); }
    double reduced_chi2() const {
        return n_points > 3 ? chi2 / (n_points - 3) : chi2;
    }
};

// y_err are one-sigma uncertainties; weights are 1/y_err^2. Initialization
// from weighted moments, Levenberg-Marquardt with at most 200 iterations.
// Throws fit_error on non-convergence or when sigma runs into its bounds.
FitResult fit_gaussian_slice(const std::vector<double>& xs,
                             const std::vector<double>& ys,
                             const std::vector<double>& y_err);

// Isotropic-axis 2D Gaussian with constant background:
// A * exp(-(x-mux)^2/(2 sx^2) - (y-muy)^2/(2 sy^2)) + B.
struct Fit2DResult {
    double amplitude = 0.0;
    double mean_x = 0.0, mean_y = 0.0;
    double sigma_x = 0.0, sigma_y = 0.0;
    double background = 0.0;
    Eigen::Matrix<double, 6, 6> covariance;
    double chi2 = 0.0;
    int n_points = 0;
    bool converged = false;
};

Fit2DResult fit_gaussian_2d(const std::vector<double>& xs,
                            const std::vector<double>& ys,
                            const std::vector<double>& values,
                            const std::vector<double>& v_err);

} // namespace epr
