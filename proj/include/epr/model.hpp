#pragma once

#include <array>

namespace epr {

using Vec2 = std::array<double, 2>;

// Description of the biphoton state. Field names carry their unit; all
// internal math runs in mm / mm^-1.
//
// The transverse state is the standard double Gaussian per axis,
//   psi(x1,x2) ~ exp(-(x1+x2)^2/(8 sp^2)) * exp(-(x1-x2)^2/(8 sm^2)),
// so that for |psi|^2 the sum coordinate (x1+x2)/sqrt(2) has std sigma_plus
// and the difference coordinate has std sigma_minus. With q_ring > 0 the
// far-field difference-coordinate profile is replaced by a Gaussian ring
// (non-collinear emission); the ring is phenomenological and breaks the x/y
// factorization of the momentum density.
struct SourceParams {
    double lambda_pump_nm = 775.078;
    double lambda_signal_nm = 1550.156; // degenerate, 2x pump
    double pump_waist_fwhm_um = 83.5;   // pump intensity FWHM at crystal center
    double sigma_plus_mm = 0.044;       // std of (x1+x2)/sqrt(2), crystal plane
    double sigma_minus_mm = 0.024;      // std of (x1-x2)/sqrt(2)
    double q_ring_per_mm = 12.0;        // far-field singles ring radius, 0 disables
    double pair_rate_hz = 1.4e8;        // pair emission rate into the scanned modes

    static SourceParams defaults() { return SourceParams{}; }

    // Defaults scaled to a different pump spot. sigma_plus tracks the pump
    // width; the single-plane mapping sqrt(2)*sigma_pump underestimates the
    // effective sum width of a long crystal, so the factor is tuned against
    // the reference scan geometry (44 um at 83.5 um pump FWHM).
    static SourceParams from_pump(double fwhm_um);

    void validate() const; // throws parameter_error

    // Momentum-side widths of the Fourier-dual state (per axis).
    double sigma_q_sum_per_mm() const { return 1.0 / (2.0 * sigma_plus_mm); }
    double sigma_q_diff_per_mm() const { return 1.0 / (2.0 * sigma_minus_mm); }
    // Radial std of the far-field ring profile (q_ring > 0). Tied to the
    // pump angular spread, not to sigma_minus; see joint_momentum_density.
    double ring_width_per_mm() const { return 1.0 / (4.0 * sigma_plus_mm); }
};

// Joint probability densities, normalized to unit integral.
double joint_position_density(const Vec2& r1_mm, const Vec2& r2_mm,
                              const SourceParams& p); // mm^-4
double joint_momentum_density(const Vec2& q1_per_mm, const Vec2& q2_per_mm,
                              const SourceParams& p); // mm^4

// Closed forms for the pure double Gaussian (per transverse axis).
double conditional_position_variance(const SourceParams& p); // Var(x1|x2), mm^2
double conditional_momentum_variance(const SourceParams& p); // Var(qx1|qx2), mm^-2
double marginal_position_variance(const SourceParams& p);    // Var(x1), mm^2
double marginal_momentum_variance(const SourceParams& p);    // Var(qx1), mm^-2
// Slope of E[x1|x2] (positive = correlated); its momentum twin is negative.
double position_correlation(const SourceParams& p);
double momentum_correlation(const SourceParams& p);

// Normalization constant of a radial Gaussian ring exp(-(r-r0)^2/(2w^2)) in
// 2D: integral over the plane equals 2*pi*ring_norm_integral(r0,w).
double ring_norm_integral(double r0, double w);

// Ground-truth Schmidt number from an SVD of the discretized 1D amplitude,
// squared because the x and y axes factorize identically. Requires
// q_ring = 0, grid_n >= 64 and extent >= 5 sigma_plus; throws
// resolution_error when halving the grid moves K by more than 1%.
double schmidt_oracle(const SourceParams& p, int grid_n, double extent_mm);

// Closed-form Schmidt number of the double Gaussian, K = K1d^2 with
// K1d = (r + 1/r)/2, r = sigma_plus/sigma_minus. The SVD oracle and the
// intensity estimator both converge to this.
double schmidt_closed_form(const SourceParams& p);

} // namespace epr
