#include "epr/model.hpp"

#include "epr/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace epr {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kFwhmToSigma = 0.42466090014400953; // 1 / (2 sqrt(2 ln 2))

void require_finite(const Vec2& v, const char* what) {
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
        throw parameter_error(std::string(what) + " must be finite");
}

} // namespace

SourceParams SourceParams::from_pump(double fwhm_um) {
    SourceParams p;
    const double scale = fwhm_um / p.pump_waist_fwhm_um;
    p.pump_waist_fwhm_um = fwhm_um;
    p.sigma_plus_mm *= scale;
    p.sigma_minus_mm *= scale;
    p.validate();
    return p;
}

void SourceParams::validate() const {
    if (!(sigma_plus_mm > 0.0) || !std::isfinite(sigma_plus_mm))
        throw parameter_error("sigma_plus must be positive and finite");
    if (!(sigma_minus_mm > 0.0) || !std::isfinite(sigma_minus_mm))
        throw parameter_error("sigma_minus must be positive and finite");
    if (!(lambda_pump_nm > 0.0) || !(lambda_signal_nm > 0.0))
        throw parameter_error("wavelengths must be positive");
    if (!(pump_waist_fwhm_um > 0.0))
        throw parameter_error("pump waist must be positive");
    if (pair_rate_hz < 0.0 || !std::isfinite(pair_rate_hz))
        throw parameter_error("pair_rate must be >= 0");
    if (q_ring_per_mm < 0.0 || !std::isfinite(q_ring_per_mm))
        throw parameter_error("q_ring must be >= 0");
}

double ring_norm_integral(double r0, double w) {
    // int_0^inf r exp(-(r-r0)^2/(2 w^2)) dr
    const double z = r0 / (w * std::sqrt(2.0));
    return w * w * std::exp(-z * z) +
           r0 * w * std::sqrt(kTwoPi / 4.0) * (1.0 + std::erf(z));
}

double joint_position_density(const Vec2& r1, const Vec2& r2, const SourceParams& p) {
    p.validate();
    require_finite(r1, "r1");
    require_finite(r2, "r2");
    const double sp2 = p.sigma_plus_mm * p.sigma_plus_mm;
    const double sm2 = p.sigma_minus_mm * p.sigma_minus_mm;
    const double norm = 1.0 / (kTwoPi * p.sigma_plus_mm * p.sigma_minus_mm);
    double d = 1.0;
    for (int ax = 0; ax < 2; ++ax) {
        const double s = r1[ax] + r2[ax];
        const double m = r1[ax] - r2[ax];
        d *= norm * std::exp(-s * s / (4.0 * sp2) - m * m / (4.0 * sm2));
    }
    return d;
}

double joint_momentum_density(const Vec2& q1, const Vec2& q2, const SourceParams& p) {
    p.validate();
    require_finite(q1, "q1");
    require_finite(q2, "q2");
    const double su = p.sigma_q_sum_per_mm();
    const double su2 = su * su;
    // Sum coordinate: isotropic Gaussian, std su per axis.
    const double ux = (q1[0] + q2[0]) / std::sqrt(2.0);
    const double uy = (q1[1] + q2[1]) / std::sqrt(2.0);
    const double fu = std::exp(-(ux * ux + uy * uy) / (2.0 * su2)) / (kTwoPi * su2);

    const double vx = (q1[0] - q2[0]) / std::sqrt(2.0);
    const double vy = (q1[1] - q2[1]) / std::sqrt(2.0);
    if (p.q_ring_per_mm == 0.0) {
        const double sv = p.sigma_q_diff_per_mm();
        const double sv2 = sv * sv;
        const double fv =
            std::exp(-(vx * vx + vy * vy) / (2.0 * sv2)) / (kTwoPi * sv2);
        return fu * fv;
    }
    // Non-collinear case: the difference-coordinate radial profile is a
    // Gaussian ring. Radius sqrt(2)*q_ring puts the singles ring at q_ring.
    const double r0 = std::sqrt(2.0) * p.q_ring_per_mm;
    const double w = p.ring_width_per_mm();
    const double rv = std::hypot(vx, vy);
    const double fv = std::exp(-(rv - r0) * (rv - r0) / (2.0 * w * w)) /
                      (kTwoPi * ring_norm_integral(r0, w));
    return fu * fv;
}

double conditional_position_variance(const SourceParams& p) {
    const double sp2 = p.sigma_plus_mm * p.sigma_plus_mm;
    const double sm2 = p.sigma_minus_mm * p.sigma_minus_mm;
    return 2.0 * sp2 * sm2 / (sp2 + sm2);
}

double conditional_momentum_variance(const SourceParams& p) {
    const double sp2 = p.sigma_plus_mm * p.sigma_plus_mm;
    const double sm2 = p.sigma_minus_mm * p.sigma_minus_mm;
    return 1.0 / (2.0 * (sp2 + sm2));
}

double marginal_position_variance(const SourceParams& p) {
    const double sp2 = p.sigma_plus_mm * p.sigma_plus_mm;
    const double sm2 = p.sigma_minus_mm * p.sigma_minus_mm;
    return 0.5 * (sp2 + sm2);
}

double marginal_momentum_variance(const SourceParams& p) {
    const double su = p.sigma_q_sum_per_mm();
    const double sv = p.sigma_q_diff_per_mm();
    return 0.5 * (su * su + sv * sv);
}

double position_correlation(const SourceParams& p) {
    const double sp2 = p.sigma_plus_mm * p.sigma_plus_mm;
    const double sm2 = p.sigma_minus_mm * p.sigma_minus_mm;
    return (sp2 - sm2) / (sp2 + sm2);
}

double momentum_correlation(const SourceParams& p) {
    const double su2 = p.sigma_q_sum_per_mm() * p.sigma_q_sum_per_mm();
    const double sv2 = p.sigma_q_diff_per_mm() * p.sigma_q_diff_per_mm();
    return (su2 - sv2) / (su2 + sv2);
}

namespace {

double schmidt_from_svd(const SourceParams& p, int n, double extent) {
    Eigen::MatrixXd amp(n, n);
    const double sp2 = p.sigma_plus_mm * p.sigma_plus_mm;
    const double sm2 = p.sigma_minus_mm * p.sigma_minus_mm;
    const double dx = 2.0 * extent / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double x1 = -extent + i * dx;
        for (int j = 0; j < n; ++j) {
            const double x2 = -extent + j * dx;
            const double s = x1 + x2;
            const double m = x1 - x2;
            amp(i, j) = std::exp(-s * s / (8.0 * sp2) - m * m / (8.0 * sm2));
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(amp);
    const auto& sv = svd.singularValues();
    double sum2 = 0.0, sum4 = 0.0;
    for (int i = 0; i < sv.size(); ++i) {
        const double l = sv[i] * sv[i];
        sum2 += l;
        sum4 += l * l;
    }
    return (sum2 * sum2) / sum4; // 1D Schmidt number
}

} // namespace

double schmidt_oracle(const SourceParams& p, int grid_n, double extent_mm) {
    p.validate();
    if (p.q_ring_per_mm != 0.0)
        throw parameter_error("schmidt_oracle requires q_ring = 0");
    if (grid_n < 64) throw parameter_error("schmidt_oracle needs grid_n >= 64");
    if (extent_mm < 5.0 * p.sigma_plus_mm)
        throw parameter_error("schmidt_oracle extent must cover >= 5 sigma_plus");
    const double k_full = schmidt_from_svd(p, grid_n, extent_mm);
    const double k_half = schmidt_from_svd(p, grid_n / 2, extent_mm);
    if (std::fabs(k_full - k_half) > 0.01 * k_full)
        throw resolution_error("schmidt_oracle grid too coarse: K not converged");
    return k_full * k_full;
}

double schmidt_closed_form(const SourceParams& p) {
    const double r = p.sigma_plus_mm / p.sigma_minus_mm;
    const double k1d = 0.5 * (r + 1.0 / r);
    return k1d * k1d;
}

} // namespace epr
