#include "epr/schmidt.hpp"

#include "epr/errors.hpp"
#include "epr/rng.hpp"

#include <algorithm>
#include <cmath>

namespace epr {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void IntensityGrid::validate() const {
    if (n < 2 || values.size() != static_cast<std::size_t>(n) * n)
        throw input_error("IntensityGrid: bad shape");
    if (!(dcoord > 0.0)) throw input_error("IntensityGrid: non-uniform or zero spacing");
    bool any = false;
    for (const double v : values) {
        if (v < 0.0) throw input_error("IntensityGrid: negative value");
        if (v > 0.0) any = true;
    }
    if (!any) throw input_error("IntensityGrid: all-zero grid");
}

IntensityGrid singles_to_intensity(const ScanDataset& ds, int arm,
                                   const LensConfig& cfg) {
    if (arm != 1 && arm != 2) throw input_error("arm must be 1 or 2");
    if (ds.records.empty()) throw input_error("dataset has no records");
    if (ds.mode != cfg.mode)
        throw mode_error("dataset and lens configuration disagree on the plane");
    const int n = ds.grid.n_steps;
    const double npartner = static_cast<double>(n) * n;

    std::vector<double> mean(n * n, 0.0);
    for (const auto& rec : ds.records) {
        if (arm == 1)
            mean[rec.i1 * n + rec.j1] += static_cast<double>(rec.s1);
        else
            mean[rec.i2 * n + rec.j2] += static_cast<double>(rec.s2);
    }
    for (double& v : mean) v /= npartner;

    // Dark floor: median of the 12 lowest-count border cells.
    std::vector<double> border;
    border.reserve(4 * n - 4);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
                border.push_back(mean[i * n + j]);
        }
    }
    std::sort(border.begin(), border.end());
    const std::size_t m = std::min<std::size_t>(12, border.size());
    double floor_est = 0.0;
    if (m > 0) {
        floor_est = (m % 2 == 1) ? border[m / 2]
                                 : 0.5 * (border[m / 2 - 1] + border[m / 2]);
    }

    IntensityGrid g;
    g.n = n;
    g.mode = ds.mode;
    g.samples = npartner;
    const Vec2 c00 = arm == 1 ? ds.grid.pos1_um(0, 0) : ds.grid.pos2_um(0, 0);
    const double step_mm = ds.grid.step_um * 1e-3;
    if (ds.mode == PlaneMode::NearField) {
        g.coord0 = detector_to_object(c00[0] * 1e-3, cfg);
        g.dcoord = step_mm / cfg.magnification_nf();
    } else {
        g.coord0 = detector_to_momentum(c00[0] * 1e-3, cfg);
        g.dcoord = cfg.momentum_scale() * step_mm;
    }
    g.raw_values = mean;
    g.values.resize(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i)
        g.values[i] = std::max(mean[i] - floor_est, 0.0);
    g.validate();
    return g;
}

double intensity_area_ratio(const IntensityGrid& g) {
    g.validate();
    const double cell = g.dcoord * g.dcoord;
    double s1 = 0.0, s2 = 0.0;
    for (const double v : g.values) {
        s1 += v;
        s2 += v * v;
    }
    if (!(s2 > 0.0)) throw input_error("intensity_area_ratio: all-zero grid");
    return cell * s1 * s1 / s2;
}

namespace {

double ratio_of(const std::vector<double>& values, double cell) {
    double s1 = 0.0, s2 = 0.0;
    for (const double v : values) {
        s1 += v;
        s2 += v * v;
    }
    return s2 > 0.0 ? cell * s1 * s1 / s2 : 0.0;
}

// Re-apply the border-floor + clamp on a resampled mean grid.
std::vector<double> floor_subtract(const std::vector<double>& mean, int n) {
    std::vector<double> border;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
                border.push_back(mean[i * n + j]);
    std::sort(border.begin(), border.end());
    const std::size_t m = std::min<std::size_t>(12, border.size());
    double fl = 0.0;
    if (m > 0)
        fl = (m % 2 == 1) ? border[m / 2]
                          : 0.5 * (border[m / 2 - 1] + border[m / 2]);
    std::vector<double> out(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i)
        out[i] = std::max(mean[i] - fl, 0.0);
    return out;
}

} // namespace

SchmidtEstimate estimate_schmidt(const IntensityGrid& nf,
                                 const IntensityGrid& ff, int n_bootstrap,
                                 std::uint64_t seed) {
    nf.validate();
    ff.validate();
    if (nf.mode != PlaneMode::NearField || ff.mode != PlaneMode::FarField)
        throw input_error("estimate_schmidt: expects one near- and one far-field grid");

    SchmidtEstimate est;
    est.k = intensity_area_ratio(nf) * intensity_area_ratio(ff) /
            (kTwoPi * kTwoPi);
    const bool have_raw = !nf.raw_values.empty() && !ff.raw_values.empty();
    if (have_raw) {
        const double rn = ratio_of(nf.raw_values, nf.dcoord * nf.dcoord);
        const double rf = ratio_of(ff.raw_values, ff.dcoord * ff.dcoord);
        est.k_uncorrected = rn * rf / (kTwoPi * kTwoPi);
    } else {
        est.k_uncorrected = est.k;
    }

    if (n_bootstrap > 1 && have_raw) {
        // Poisson bootstrap on the underlying counts (mean * samples).
        std::vector<double> ks;
        ks.reserve(n_bootstrap);
        std::vector<double> rn(nf.raw_values.size()), rf(ff.raw_values.size());
        for (int rep = 0; rep < n_bootstrap; ++rep) {
            Rng rng = Rng::for_point(seed, 0x5b00, rep, 0, 0);
            for (std::size_t i = 0; i < rn.size(); ++i)
                rn[i] = static_cast<double>(
                            rng.poisson(nf.raw_values[i] * nf.samples)) /
                        nf.samples;
            for (std::size_t i = 0; i < rf.size(); ++i)
                rf[i] = static_cast<double>(
                            rng.poisson(ff.raw_values[i] * ff.samples)) /
                        ff.samples;
            const auto cn = floor_subtract(rn, nf.n);
            const auto cf = floor_subtract(rf, ff.n);
            const double k = ratio_of(cn, nf.dcoord * nf.dcoord) *
                             ratio_of(cf, ff.dcoord * ff.dcoord) /
                             (kTwoPi * kTwoPi);
            if (k > 0.0) ks.push_back(k);
        }
        if (ks.size() > 1) {
            double mean = 0.0;
            for (const double k : ks) mean += k;
            mean /= static_cast<double>(ks.size());
            double var = 0.0;
            for (const double k : ks) var += (k - mean) * (k - mean);
            est.err = std::sqrt(var / (ks.size() - 1));
        }
    }
    return est;
}

IntensityGrid model_intensity_grid(const SourceParams& p, PlaneMode mode,
                                   int n, double extent) {
    p.validate();
    if (n < 8) throw parameter_error("model_intensity_grid: n too small");
    IntensityGrid g;
    g.n = n;
    g.mode = mode;
    g.dcoord = 2.0 * extent / (n - 1);
    g.coord0 = -extent;
    g.values.resize(static_cast<std::size_t>(n) * n);
    if (mode == PlaneMode::NearField) {
        const double s2 = marginal_position_variance(p);
        for (int i = 0; i < n; ++i) {
            const double x = -extent + i * g.dcoord;
            for (int j = 0; j < n; ++j) {
                const double y = -extent + j * g.dcoord;
                g.values[i * n + j] = std::exp(-(x * x + y * y) / (2.0 * s2));
            }
        }
    } else {
        if (p.q_ring_per_mm > 0.0) {
            const double w2 = 0.5 * (p.sigma_q_sum_per_mm() * p.sigma_q_sum_per_mm() +
                                     p.ring_width_per_mm() * p.ring_width_per_mm());
            for (int i = 0; i < n; ++i) {
                const double x = -extent + i * g.dcoord;
                for (int j = 0; j < n; ++j) {
                    const double y = -extent + j * g.dcoord;
                    const double r = std::hypot(x, y);
                    const double d = r - p.q_ring_per_mm;
                    g.values[i * n + j] = std::exp(-d * d / (2.0 * w2));
                }
            }
        } else {
            const double s2 = marginal_momentum_variance(p);
            for (int i = 0; i < n; ++i) {
                const double x = -extent + i * g.dcoord;
                for (int j = 0; j < n; ++j) {
                    const double y = -extent + j * g.dcoord;
                    g.values[i * n + j] =
                        std::exp(-(x * x + y * y) / (2.0 * s2));
                }
            }
        }
    }
    return g;
}

} // namespace epr
