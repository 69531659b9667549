#include "epr/gaussfit.hpp"

#include "epr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epr {

namespace {

constexpr int kMaxIterations = 200;

struct Moments {
    double amp, mean, rms;
};

Moments weighted_moments(const std::vector<double>& xs, const std::vector<double>& ys,
                         const std::vector<double>& w) {
    double sw = 0.0, swx = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double wi = std::max(ys[i], 0.0) * w[i];
        sw += wi;
        swx += wi * xs[i];
        peak = std::max(peak, ys[i]);
    }
    double mean = sw > 0.0 ? swx / sw : 0.0;
    double swxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double wi = std::max(ys[i], 0.0) * w[i];
        swxx += wi * (xs[i] - mean) * (xs[i] - mean);
    }
    double rms = sw > 0.0 ? std::sqrt(std::max(swxx / sw, 0.0)) : 0.0;
    if (!(rms > 0.0)) {
        const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
        rms = 0.25 * (*hi - *lo);
    }
    return {peak, mean, rms};
}

} // namespace

FitResult fit_gaussian_slice(const std::vector<double>& xs,
                             const std::vector<double>& ys,
                             const std::vector<double>& y_err) {
    const std::size_t n = xs.size();
    if (n < 5) throw fit_error("fit_gaussian_slice needs at least 5 points");
    if (ys.size() != n || y_err.size() != n)
        throw fit_error("fit_gaussian_slice: mismatched input lengths");

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(y_err[i] > 0.0)) throw fit_error("fit_gaussian_slice: y_err must be > 0");
        w[i] = 1.0 / (y_err[i] * y_err[i]);
    }

    const auto [xlo_it, xhi_it] = std::minmax_element(xs.begin(), xs.end());
    const double span = *xhi_it - *xlo_it;
    double min_dx = span;
    {
        std::vector<double> sorted(xs);
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 1; i < n; ++i)
            min_dx = std::min(min_dx, sorted[i] - sorted[i - 1]);
    }
    const double sigma_lo = std::max(min_dx / 10.0, 1e-12);
    const double sigma_hi = 100.0 * span;

    const Moments m0 = weighted_moments(xs, ys, w);
    Eigen::Vector3d p(m0.amp, m0.mean, std::clamp(m0.rms, sigma_lo, sigma_hi));

    auto chi2_of = [&](const Eigen::Vector3d& q) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (xs[i] - q[1]) / q[2];
            const double r = ys[i] - q[0] * std::exp(-0.5 * z * z);
            c += w[i] * r * r;
        }
        return c;
    };

    double chi2 = chi2_of(p);
    double lambda = 1e-3;
    bool converged = false;
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();

    for (int iter = 0; iter < kMaxIterations; ++iter) {
        jtj.setZero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (xs[i] - p[1]) / p[2];
            const double e = std::exp(-0.5 * z * z);
            const double f = p[0] * e;
            Eigen::Vector3d j(e, f * z / p[2], f * z * z / p[2]);
            const double r = ys[i] - f;
            jtj.noalias() += w[i] * j * j.transpose();
            jtr.noalias() += w[i] * r * j;
        }
        Eigen::Matrix3d damped = jtj;
        for (int k = 0; k < 3; ++k) damped(k, k) *= 1.0 + lambda;
        const Eigen::Vector3d step = damped.ldlt().solve(jtr);
        Eigen::Vector3d trial = p + step;
        trial[2] = std::fabs(trial[2]);
        const double trial_chi2 =
            (trial[2] >= sigma_lo && trial[2] <= sigma_hi)
                ? chi2_of(trial)
                : std::numeric_limits<double>::infinity();
        if (trial_chi2 <= chi2) {
            const double rel = (chi2 - trial_chi2) / std::max(chi2, 1e-300);
            p = trial;
            chi2 = trial_chi2;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-12 || step.norm() < 1e-14 * (1.0 + p.norm())) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    if (!converged) throw fit_error("fit_gaussian_slice did not converge");
    if (p[2] <= sigma_lo * 1.0000001 || p[2] >= sigma_hi * 0.9999999)
        throw fit_error("fit_gaussian_slice: sigma at bounds");

    FitResult out;
    out.amplitude = p[0];
    out.mean = p[1];
    out.sigma = p[2];
    out.chi2 = chi2;
    out.n_points = static_cast<int>(n);
    out.converged = true;

    // Covariance from the Jacobian at the optimum, scaled by reduced chi^2.
    jtj.setZero();
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (xs[i] - p[1]) / p[2];
        const double e = std::exp(-0.5 * z * z);
        const double f = p[0] * e;
        Eigen::Vector3d j(e, f * z / p[2], f * z * z / p[2]);
        jtj.noalias() += w[i] * j * j.transpose();
    }
    const double scale = n > 3 ? std::max(chi2 / (n - 3), 0.0) : 0.0;
    out.covariance = jtj.inverse() * (scale > 0.0 ? scale : 1.0);
    return out;
}

Fit2DResult fit_gaussian_2d(const std::vector<double>& xs,
                            const std::vector<double>& ys,
                            const std::vector<double>& values,
                            const std::vector<double>& v_err) {
    const std::size_t n = values.size();
    if (n < 8) throw fit_error("fit_gaussian_2d needs at least 8 points");
    if (xs.size() != n || ys.size() != n || v_err.size() != n)
        throw fit_error("fit_gaussian_2d: mismatched input lengths");

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(v_err[i] > 0.0)) throw fit_error("fit_gaussian_2d: v_err must be > 0");
        w[i] = 1.0 / (v_err[i] * v_err[i]);
    }

    const double vmin = *std::min_element(values.begin(), values.end());
    const double vmax = *std::max_element(values.begin(), values.end());
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = std::max(values[i] - vmin, 0.0);
        sw += wi;
        sx += wi * xs[i];
        sy += wi * ys[i];
    }
    const double mx0 = sw > 0 ? sx / sw : 0.0;
    const double my0 = sw > 0 ? sy / sw : 0.0;
    double sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = std::max(values[i] - vmin, 0.0);
        sxx += wi * (xs[i] - mx0) * (xs[i] - mx0);
        syy += wi * (ys[i] - my0) * (ys[i] - my0);
    }
    const double sx0 = sw > 0 ? std::sqrt(std::max(sxx / sw, 1e-12)) : 1.0;
    const double sy0 = sw > 0 ? std::sqrt(std::max(syy / sw, 1e-12)) : 1.0;

    using Vec6 = Eigen::Matrix<double, 6, 1>;
    using Mat6 = Eigen::Matrix<double, 6, 6>;
    Vec6 p;
    p << vmax - vmin, mx0, my0, sx0, sy0, vmin;

    auto model = [](const Vec6& q, double x, double y) {
        const double zx = (x - q[1]) / q[3];
        const double zy = (y - q[2]) / q[4];
        return q[0] * std::exp(-0.5 * (zx * zx + zy * zy)) + q[5];
    };
    auto chi2_of = [&](const Vec6& q) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = values[i] - model(q, xs[i], ys[i]);
            c += w[i] * r * r;
        }
        return c;
    };

    double chi2 = chi2_of(p);
    double lambda = 1e-3;
    bool converged = false;
    Mat6 jtj;

    for (int iter = 0; iter < kMaxIterations; ++iter) {
        jtj.setZero();
        Vec6 jtr = Vec6::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double zx = (xs[i] - p[1]) / p[3];
            const double zy = (ys[i] - p[2]) / p[4];
            const double e = std::exp(-0.5 * (zx * zx + zy * zy));
            const double f = p[0] * e;
            Vec6 j;
            j << e, f * zx / p[3], f * zy / p[4], f * zx * zx / p[3],
                f * zy * zy / p[4], 1.0;
            const double r = values[i] - (f + p[5]);
            jtj.noalias() += w[i] * j * j.transpose();
            jtr.noalias() += w[i] * r * j;
        }
        Mat6 damped = jtj;
        for (int k = 0; k < 6; ++k) damped(k, k) *= 1.0 + lambda;
        const Vec6 step = damped.ldlt().solve(jtr);
        Vec6 trial = p + step;
        trial[3] = std::fabs(trial[3]);
        trial[4] = std::fabs(trial[4]);
        const double trial_chi2 =
            (trial[3] > 0.0 && trial[4] > 0.0)
                ? chi2_of(trial)
                : std::numeric_limits<double>::infinity();
        if (trial_chi2 <= chi2) {
            const double rel = (chi2 - trial_chi2) / std::max(chi2, 1e-300);
            p = trial;
            chi2 = trial_chi2;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-12) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    if (!converged) throw fit_error("fit_gaussian_2d did not converge");

    Fit2DResult out;
    out.amplitude = p[0];
    out.mean_x = p[1];
    out.mean_y = p[2];
    out.sigma_x = p[3];
    out.sigma_y = p[4];
    out.background = p[5];
    out.chi2 = chi2;
    out.n_points = static_cast<int>(n);
    out.converged = true;
    const double scale = n > 6 ? std::max(chi2 / (n - 6), 0.0) : 0.0;
    out.covariance = jtj.inverse() * (scale > 0.0 ? scale : 1.0);
    return out;
}

} // namespace epr
