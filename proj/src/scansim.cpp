#include "epr/scansim.hpp"

#include "epr/coincidence.hpp"
#include "epr/errors.hpp"
#include "epr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace epr {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Collection-convolved biphoton distribution in the detection plane,
// evaluated in sum/difference coordinates. The isotropic collection kernel
// commutes with the (x1,x2) -> (u,v) rotation, so it simply widens each
// factor. Units: positions mm, widths mm (near field) or mm^-1 (far field);
// the far-field ring radius shift under the kernel is O((g/R)^2) and ignored.
struct DetectorModel {
    PlaneMode mode;
    double map1, map2;   // detector mm -> physical coordinate, per arm axis
    double kern2;        // collection kernel variance in physical units
    double su2;          // sum-coordinate variance (incl. kernel)
    double sv2;          // difference variance (Gaussian case)
    double ring_r0;      // difference-coordinate ring radius, 0 = Gaussian
    double ring_w2;      // ring radial variance (incl. kernel)
    double ring_norm;    // 2*pi*ring_norm_integral
    double marg2;        // per-axis singles variance (Gaussian case)
    double marg_w2;      // singles ring radial variance
    double marg_norm;

    static DetectorModel make(const SourceParams& p, const LensConfig& cfg,
                              const NoiseModel& noise) {
        DetectorModel m{};
        m.mode = cfg.mode;
        const double sc_mm = noise.collection_sigma_um * 1e-3;
        if (cfg.mode == PlaneMode::NearField) {
            const double mag = cfg.magnification_nf();
            m.map1 = m.map2 = 1.0; // detector-plane mm, image widths carry M
            m.kern2 = sc_mm * sc_mm;
            const double sp2 = p.sigma_plus_mm * p.sigma_plus_mm;
            const double sm2 = p.sigma_minus_mm * p.sigma_minus_mm;
            m.su2 = mag * mag * sp2 + m.kern2;
            m.sv2 = mag * mag * sm2 + m.kern2;
            m.ring_r0 = 0.0;
            m.marg2 = 0.5 * mag * mag * (sp2 + sm2) + m.kern2;
        } else {
            const double gamma = cfg.momentum_scale();
            m.map1 = m.map2 = gamma;
            const double g2 = gamma * sc_mm * gamma * sc_mm;
            m.kern2 = g2;
            const double su = p.sigma_q_sum_per_mm();
            const double sv = p.sigma_q_diff_per_mm();
            m.su2 = su * su + g2;
            if (p.q_ring_per_mm > 0.0) {
                const double w = p.ring_width_per_mm();
                m.ring_r0 = std::sqrt(2.0) * p.q_ring_per_mm;
                m.ring_w2 = w * w + g2;
                m.ring_norm =
                    kTwoPi * ring_norm_integral(m.ring_r0, std::sqrt(m.ring_w2));
                m.marg_w2 = 0.5 * (su * su + w * w) + g2;
                m.marg_norm = kTwoPi * ring_norm_integral(p.q_ring_per_mm,
                                                          std::sqrt(m.marg_w2));
            } else {
                m.ring_r0 = 0.0;
                m.sv2 = sv * sv + g2;
                m.marg2 = 0.5 * (su * su + sv * sv) + g2;
            }
        }
        return m;
    }

    // Joint density at detector positions mapped to physical coordinates;
    // normalized over the physical plane pair.
    double joint(const Vec2& c1, const Vec2& c2) const {
        const double ux = (c1[0] + c2[0]) / std::sqrt(2.0);
        const double uy = (c1[1] + c2[1]) / std::sqrt(2.0);
        const double vx = (c1[0] - c2[0]) / std::sqrt(2.0);
        const double vy = (c1[1] - c2[1]) / std::sqrt(2.0);
        const double fu =
            std::exp(-(ux * ux + uy * uy) / (2.0 * su2)) / (kTwoPi * su2);
        if (ring_r0 > 0.0) {
            const double rv = std::hypot(vx, vy);
            return fu * std::exp(-(rv - ring_r0) * (rv - ring_r0) /
                                 (2.0 * ring_w2)) /
                   ring_norm;
        }
        return fu * std::exp(-(vx * vx + vy * vy) / (2.0 * sv2)) /
               (kTwoPi * sv2);
    }

    double marginal(const Vec2& c) const {
        if (ring_r0 > 0.0) {
            const double r = std::hypot(c[0], c[1]);
            const double r0 = ring_r0 / std::sqrt(2.0);
            return std::exp(-(r - r0) * (r - r0) / (2.0 * marg_w2)) / marg_norm;
        }
        return std::exp(-(c[0] * c[0] + c[1] * c[1]) / (2.0 * marg2)) /
               (kTwoPi * marg2);
    }
};

Vec2 to_physical(const Vec2& pos_um, double map) {
    return {pos_um[0] * 1e-3 * map, pos_um[1] * 1e-3 * map};
}

PointRates rates_from_model(const DetectorModel& m, const SourceParams& p,
                            const NoiseModel& noise, const Vec2& pos1_um,
                            const Vec2& pos2_um) {
    const double sc_mm = noise.collection_sigma_um * 1e-3;
    // Collection acceptance integral in physical coordinates; for the far
    // field map^2 * sc^2 is the kernel variance in q units.
    const double acc2 = m.map1 * m.map1 * sc_mm * sc_mm;
    const Vec2 c1 = to_physical(pos1_um, m.map1);
    const Vec2 c2 = to_physical(pos2_um, m.map2);

    const double p1 = noise.efficiency1 * kTwoPi * acc2 * m.marginal(c1);
    const double p2 = noise.efficiency2 * kTwoPi * acc2 * m.marginal(c2);
    const double pj = noise.efficiency1 * noise.efficiency2 * kTwoPi * acc2 *
                      kTwoPi * acc2 * m.joint(c1, c2);

    PointRates r{};
    r.s1_hz = p.pair_rate_hz * p1 + noise.dark1_hz;
    r.s2_hz = p.pair_rate_hz * p2 + noise.dark2_hz;
    r.cc_hz = p.pair_rate_hz * pj +
              accidental_rate_hz(r.s1_hz, r.s2_hz, noise.window_ps);
    return r;
}

} // namespace

void ScanGrid::validate() const {
    if (n_steps < 2) throw parameter_error("ScanGrid: n_steps must be >= 2");
    if (!(step_um > 0.0)) throw parameter_error("ScanGrid: step must be > 0");
}

void NoiseModel::validate() const {
    if (!(window_ps > 0.0)) throw parameter_error("NoiseModel: window must be > 0");
    if (!(dwell_s > 0.0)) throw parameter_error("NoiseModel: dwell must be > 0");
    if (!(collection_sigma_um > 0.0))
        throw parameter_error("NoiseModel: collection_sigma must be > 0");
    if (!(efficiency1 > 0.0) || efficiency1 > 1.0 || !(efficiency2 > 0.0) ||
        efficiency2 > 1.0)
        throw parameter_error("NoiseModel: efficiencies must be in (0, 1]");
    if (dark1_hz < 0.0 || dark2_hz < 0.0)
        throw parameter_error("NoiseModel: dark rates must be >= 0");
}

PointRates expected_rates(const SourceParams& p, const LensConfig& cfg,
                          const ScanGrid& grid, const NoiseModel& noise,
                          int i1, int j1, int i2, int j2) {
    p.validate();
    cfg.validate();
    grid.validate();
    noise.validate();
    const DetectorModel m = DetectorModel::make(p, cfg, noise);
    return rates_from_model(m, p, noise, grid.pos1_um(i1, j1),
                            grid.pos2_um(i2, j2));
}

ScanDataset simulate_scan(const SourceParams& p, const LensConfig& cfg,
                          const ScanGrid& grid, const NoiseModel& noise,
                          std::uint64_t seed, int threads) {
    p.validate();
    cfg.validate();
    grid.validate();
    noise.validate();

    ScanDataset ds;
    ds.grid = grid;
    ds.mode = cfg.mode;
    ds.source = p;
    ds.lens = cfg;
    ds.noise = noise;
    ds.seed = seed;
    ds.records.resize(grid.total_points());

    const DetectorModel model = DetectorModel::make(p, cfg, noise);
    const int n = grid.n_steps;
    const std::size_t total = grid.total_points();

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const int j2 = static_cast<int>(idx % n);
            const int i2 = static_cast<int>((idx / n) % n);
            const int j1 = static_cast<int>((idx / (n * n)) % n);
            const int i1 = static_cast<int>(idx / (static_cast<std::size_t>(n) * n * n));
            const PointRates r = rates_from_model(
                model, p, noise, grid.pos1_um(i1, j1), grid.pos2_um(i2, j2));
            const double e1 = r.s1_hz * noise.dwell_s;
            const double e2 = r.s2_hz * noise.dwell_s;
            const double ec = r.cc_hz * noise.dwell_s;
            if (!std::isfinite(e1) || !std::isfinite(e2) || !std::isfinite(ec) ||
                e1 > 4.0e18 || e2 > 4.0e18 || ec > 4.0e18) {
                std::ostringstream os;
                os << "simulate_scan: bad expectation at grid point (" << i1
                   << "," << j1 << "," << i2 << "," << j2 << ")";
                throw simulation_error(os.str());
            }
            Rng rng = Rng::for_point(seed, i1, j1, i2, j2);
            ScanRecord& rec = ds.records[idx];
            rec.i1 = static_cast<std::uint16_t>(i1);
            rec.j1 = static_cast<std::uint16_t>(j1);
            rec.i2 = static_cast<std::uint16_t>(i2);
            rec.j2 = static_cast<std::uint16_t>(j2);
            rec.s1 = rng.poisson(e1);
            rec.s2 = rng.poisson(e2);
            rec.cc = rng.poisson(ec);
            rec.dwell_s = noise.dwell_s;
        }
    };

    int nthreads = threads > 0 ? threads
                               : static_cast<int>(std::max(
                                     1u, std::thread::hardware_concurrency()));
    nthreads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(nthreads), total));
    if (nthreads <= 1) {
        run_range(0, total);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        const std::size_t chunk = (total + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const std::size_t b = t * chunk;
            const std::size_t e = std::min(total, b + chunk);
            if (b >= e) break;
            pool.emplace_back(run_range, b, e);
        }
        for (auto& th : pool) th.join();
    }
    return ds;
}

std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>
generate_timetags(double rate1_hz, double rate2_hz, double pair_rate_hz,
                  double jitter_ps, double duration_s, std::uint64_t seed) {
    if (rate1_hz < 0.0 || rate2_hz < 0.0 || pair_rate_hz < 0.0)
        throw parameter_error("generate_timetags: rates must be >= 0");
    if (!(duration_s > 0.0))
        throw parameter_error("generate_timetags: duration must be > 0");
    const double expected =
        duration_s * (rate1_hz + rate2_hz + 2.0 * pair_rate_hz);
    if (expected > 1e8)
        throw size_error("generate_timetags: more than 1e8 expected tags");

    Rng rng(seed);
    std::vector<std::int64_t> a, b;
    a.reserve(static_cast<std::size_t>(duration_s * (rate1_hz + pair_rate_hz)) + 16);
    b.reserve(static_cast<std::size_t>(duration_s * (rate2_hz + pair_rate_hz)) + 16);

    const double dur_ps = duration_s * 1e12;
    auto homogeneous = [&](double rate_hz, std::vector<std::int64_t>& out) {
        if (rate_hz <= 0.0) return;
        const double mean_gap_ps = 1e12 / rate_hz;
        double t = 0.0;
        for (;;) {
            t += rng.exponential() * mean_gap_ps;
            if (t >= dur_ps) break;
            out.push_back(static_cast<std::int64_t>(t));
        }
    };

    // Correlated pairs: shared birth time, independent detection jitter.
    if (pair_rate_hz > 0.0) {
        const double mean_gap_ps = 1e12 / pair_rate_hz;
        double t = 0.0;
        for (;;) {
            t += rng.exponential() * mean_gap_ps;
            if (t >= dur_ps) break;
            const double t1 = t + jitter_ps * rng.normal();
            const double t2 = t + jitter_ps * rng.normal();
            a.push_back(static_cast<std::int64_t>(std::llround(t1)));
            b.push_back(static_cast<std::int64_t>(std::llround(t2)));
        }
    }
    homogeneous(rate1_hz, a);
    homogeneous(rate2_hz, b);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return {std::move(a), std::move(b)};
}

} // namespace epr
