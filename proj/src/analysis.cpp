#include "epr/analysis.hpp"

#include "epr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace epr {

namespace {

constexpr std::int64_t kSliceCountFloor = 50;
constexpr double kMaxReducedChi2 = 5.0;
constexpr double kReidBound = 0.25;

int center_index(int n) { return (n - 1) / 2; }

struct SliceLayout {
    bool fit_arm1;    // which arm supplies the fitted coordinate
    bool along_x;
};

SliceLayout layout_for(Axis axis, Direction dir) {
    return {dir == Direction::Infer1From2, axis == Axis::X};
}

} // namespace

double normalize(double cc, double s1, double s2) {
    if (!(s1 > 0.0) || !(s2 > 0.0))
        throw normalization_error("normalize: singles must be positive");
    return cc / std::sqrt(s1 * s2);
}

MinVarianceResult min_inferred_variance_detailed(const ScanDataset& ds,
                                                 const LensConfig& cfg,
                                                 Axis axis, Direction dir) {
    if (ds.mode != cfg.mode)
        throw mode_error("dataset and lens configuration disagree on the plane");
    const int n = ds.grid.n_steps;
    const int c = center_index(n);
    const SliceLayout lay = layout_for(axis, dir);

    const bool ff = ds.mode == PlaneMode::FarField;
    const double mag = cfg.magnification_nf();
    const double qscale = ff ? cfg.momentum_scale() : 0.0;

    MinVarianceResult out;
    out.slices.reserve(n);

    for (int k = 0; k < n; ++k) {
        SliceOutcome sl;
        sl.cond_index = k;
        std::vector<double> xs, ys, errs;
        xs.reserve(n);
        std::int64_t raw = 0;
        for (int t = 0; t < n; ++t) {
            // Indices: fitted coordinate t, conditioning coordinate k, the
            // other axis pinned to the scan centers on both arms.
            int i1, j1, i2, j2;
            if (lay.along_x) {
                i1 = lay.fit_arm1 ? t : k;
                i2 = lay.fit_arm1 ? k : t;
                j1 = j2 = c;
            } else {
                j1 = lay.fit_arm1 ? t : k;
                j2 = lay.fit_arm1 ? k : t;
                i1 = i2 = c;
            }
            const ScanRecord& rec = ds.at(i1, j1, i2, j2);
            raw += rec.cc;
            if (rec.s1 <= 0 || rec.s2 <= 0) continue; // unmeasurable point
            const double pos_um =
                lay.fit_arm1
                    ? (lay.along_x ? ds.grid.pos1_um(i1, j1)[0]
                                   : ds.grid.pos1_um(i1, j1)[1])
                    : (lay.along_x ? ds.grid.pos2_um(i2, j2)[0]
                                   : ds.grid.pos2_um(i2, j2)[1]);
            const double denom =
                std::sqrt(static_cast<double>(rec.s1) * rec.s2);
            xs.push_back(pos_um * 1e-3); // detector mm
            ys.push_back(static_cast<double>(rec.cc) / denom);
            errs.push_back(std::sqrt(std::max<double>(rec.cc, 1.0)) / denom);
        }
        sl.raw_counts = raw;
        if (raw < kSliceCountFloor) {
            sl.reason = "below count floor";
            out.slices.push_back(std::move(sl));
            continue;
        }
        if (xs.size() < 5) {
            sl.reason = "fewer than 5 usable points";
            out.slices.push_back(std::move(sl));
            continue;
        }
        try {
            sl.fit = fit_gaussian_slice(xs, ys, errs);
        } catch (const fit_error& e) {
            sl.reason = e.what();
            out.slices.push_back(std::move(sl));
            continue;
        }
        if (sl.fit.reduced_chi2() > kMaxReducedChi2) {
            sl.reason = "reduced chi2 above 5";
            out.slices.push_back(std::move(sl));
            continue;
        }
        const double sd = sl.fit.sigma;
        const double sd_err = sl.fit.err_sigma();
        if (ff) {
            sl.variance = (qscale * sd) * (qscale * sd);
            sl.variance_err = 2.0 * qscale * qscale * sd * sd_err;
        } else {
            sl.variance = (sd / mag) * (sd / mag);
            sl.variance_err = 2.0 * sd * sd_err / (mag * mag);
        }
        sl.used = true;
        sl.weight = static_cast<double>(raw);
        out.slices.push_back(std::move(sl));
    }

    double wsum = 0.0;
    int used = 0;
    for (const auto& sl : out.slices) {
        if (sl.used) {
            wsum += sl.weight;
            ++used;
        }
    }
    if (used < 3)
        throw insufficient_data_error(
            "min_inferred_variance: fewer than 3 fittable slices");

    double value = 0.0;
    for (const auto& sl : out.slices)
        if (sl.used) value += (sl.weight / wsum) * sl.variance;

    // Gaussian propagation: per-slice fit errors plus Poisson uncertainty of
    // the count-frequency weights.
    double var = 0.0;
    for (const auto& sl : out.slices) {
        if (!sl.used) continue;
        const double pk = sl.weight / wsum;
        var += pk * pk * sl.variance_err * sl.variance_err;
        var += sl.weight * (sl.variance - value) * (sl.variance - value) /
               (wsum * wsum);
    }

    out.estimate.value = value;
    out.estimate.err = std::sqrt(var);
    out.estimate.n_slices = used;
    return out;
}

VarianceEstimate min_inferred_variance(const ScanDataset& ds,
                                       const LensConfig& cfg, Axis axis,
                                       Direction dir) {
    return min_inferred_variance_detailed(ds, cfg, axis, dir).estimate;
}

EprEntry epr_test(const PositionVariance& pos, const MomentumVariance& mom) {
    if (!(pos.value_mm2 > 0.0) || !(mom.value_per_mm2 > 0.0))
        throw parameter_error("epr_test: variances must be positive");
    EprEntry e;
    e.product = pos.value_mm2 * mom.value_per_mm2;
    const double rp = pos.err_mm2 / pos.value_mm2;
    const double rm = mom.err_per_mm2 / mom.value_per_mm2;
    e.err = e.product * std::sqrt(rp * rp + rm * rm);
    e.violation = e.product < kReidBound;
    e.significance = e.err > 0.0 ? (kReidBound - e.product) / e.err : 0.0;
    return e;
}

EprReport analyze_pair(const ScanDataset& nf, const ScanDataset& ff) {
    if (nf.mode != PlaneMode::NearField)
        throw mode_error("analyze_pair: first dataset must be near-field");
    if (ff.mode != PlaneMode::FarField)
        throw mode_error("analyze_pair: second dataset must be far-field");
    EprReport rep;
    const std::array<std::pair<Axis, Direction>, 4> combos = {
        std::pair{Axis::X, Direction::Infer1From2},
        std::pair{Axis::Y, Direction::Infer1From2},
        std::pair{Axis::X, Direction::Infer2From1},
        std::pair{Axis::Y, Direction::Infer2From1}};
    for (std::size_t r = 0; r < combos.size(); ++r) {
        const auto [axis, dir] = combos[r];
        EprReportRow row;
        row.axis = axis;
        row.dir = dir;
        row.position = min_inferred_variance(nf, nf.lens, axis, dir);
        row.momentum = min_inferred_variance(ff, ff.lens, axis, dir);
        row.epr = epr_test({row.position.value, row.position.err},
                           {row.momentum.value, row.momentum.err});
        rep.rows[r] = row;
    }
    return rep;
}

std::string format_report_table(const EprReport& rep) {
    std::ostringstream os;
    auto label = [](const EprReportRow& r) {
        const char a = r.axis == Axis::X ? 'x' : 'y';
        return r.dir == Direction::Infer1From2
                   ? std::string(1, a) + "1|" + a + "2"
                   : std::string(1, a) + "2|" + a + "1";
    };
    char buf[160];
    os << "minimum variance        value                    product\n";
    os << "---------------------------------------------------------------\n";
    for (const auto& row : rep.rows) {
        const std::string l = label(row);
        std::snprintf(buf, sizeof buf,
                      "D2(%s)   %11.4e +- %.1e mm^2\n", l.c_str(),
                      row.position.value, row.position.err);
        os << buf;
        std::snprintf(buf, sizeof buf,
                      "D2(q_%s) %11.4e +- %.1e mm^-2   %.4f +- %.4f  %s (%.1f sd)\n",
                      l.c_str(), row.momentum.value, row.momentum.err,
                      row.epr.product, row.epr.err,
                      row.epr.violation ? "VIOLATION" : "no violation",
                      row.epr.significance);
        os << buf;
    }
    return os.str();
}

BirthRegionResult birth_region(const ScanDataset& ds, const LensConfig& cfg) {
    if (ds.mode != PlaneMode::NearField || cfg.mode != PlaneMode::NearField)
        throw mode_error("birth_region needs near-field data");
    const int n = ds.grid.n_steps;
    const double npartner = static_cast<double>(n) * n;

    std::vector<double> sum1(n * n, 0.0), sum2(n * n, 0.0);
    for (const auto& rec : ds.records) {
        sum1[rec.i1 * n + rec.j1] += static_cast<double>(rec.s1);
        sum2[rec.i2 * n + rec.j2] += static_cast<double>(rec.s2);
    }

    auto fit_arm = [&](const std::vector<double>& sums, bool arm1,
                       double& fwhm_um, double& err_um) {
        std::vector<double> xs, ys, vals, verr;
        xs.reserve(sums.size());
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const Vec2 pos = arm1 ? ds.grid.pos1_um(i, j)
                                      : ds.grid.pos2_um(i, j);
                xs.push_back(pos[0]);
                ys.push_back(pos[1]);
                vals.push_back(sums[i * n + j] / npartner);
                verr.push_back(std::sqrt(std::max(sums[i * n + j], 1.0)) /
                               npartner);
            }
        }
        const Fit2DResult fit = fit_gaussian_2d(xs, ys, vals, verr);
        const double geo = std::sqrt(fit.sigma_x * fit.sigma_y);
        const double fwhm_factor = 2.0 * std::sqrt(2.0 * std::log(2.0));
        fwhm_um = fwhm_factor * geo / cfg.magnification_nf();
        const double vx = fit.covariance(3, 3);
        const double vy = fit.covariance(4, 4);
        const double cxy = fit.covariance(3, 4);
        const double rel2 =
            0.25 * (vx / (fit.sigma_x * fit.sigma_x) +
                    vy / (fit.sigma_y * fit.sigma_y) +
                    2.0 * cxy / (fit.sigma_x * fit.sigma_y));
        err_um = fwhm_um * std::sqrt(std::max(rel2, 0.0));
    };

    BirthRegionResult out;
    double e1 = 0.0, e2 = 0.0;
    fit_arm(sum1, true, out.arm1_um, e1);
    fit_arm(sum2, false, out.arm2_um, e2);
    out.diameter_um = 0.5 * (out.arm1_um + out.arm2_um);
    out.err_um = 0.5 * std::sqrt(e1 * e1 + e2 * e2);
    return out;
}

double predicted_position_variance(const SourceParams& p, const LensConfig& cfg,
                                   const NoiseModel& noise) {
    const double mag = cfg.magnification_nf();
    const double sc = noise.collection_sigma_um * 1e-3;
    const double su2 = mag * mag * p.sigma_plus_mm * p.sigma_plus_mm + sc * sc;
    const double sv2 = mag * mag * p.sigma_minus_mm * p.sigma_minus_mm + sc * sc;
    const double slice2 = 2.0 * su2 * sv2 / (su2 + sv2);
    const double marg2 = 0.5 * (su2 + sv2);
    const double reshaped = slice2 / (1.0 - slice2 / (2.0 * marg2));
    return reshaped / (mag * mag);
}

double predicted_momentum_variance(const SourceParams& p, const LensConfig& cfg,
                                   const NoiseModel& noise) {
    const double g = cfg.momentum_scale() * noise.collection_sigma_um * 1e-3;
    const double su2 = p.sigma_q_sum_per_mm() * p.sigma_q_sum_per_mm() + g * g;
    double diff2, singles2;
    if (p.q_ring_per_mm > 0.0) {
        diff2 = p.ring_width_per_mm() * p.ring_width_per_mm() + g * g;
        singles2 = 0.5 * (p.sigma_q_sum_per_mm() * p.sigma_q_sum_per_mm() +
                          p.ring_width_per_mm() * p.ring_width_per_mm()) +
                   g * g;
    } else {
        diff2 = p.sigma_q_diff_per_mm() * p.sigma_q_diff_per_mm() + g * g;
        singles2 = 0.5 * (su2 + diff2);
    }
    const double slice2 = 2.0 * su2 * diff2 / (su2 + diff2);
    return slice2 / (1.0 - slice2 / (2.0 * singles2));
}

} // namespace epr
