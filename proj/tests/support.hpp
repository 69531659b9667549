#pragma once

#include "epr/scansim.hpp"

#include <cmath>
#include <functional>

// Test-side oracles kept independent of the library's analytic shortcuts.

namespace testsupport {

// Composite Simpson rule; n is rounded up to an even interval count.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n = 2000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

inline double simpson2d(const std::function<double(double, double)>& f,
                        double ax, double bx, double ay, double by,
                        int n = 400) {
    return simpson(
        [&](double x) {
            return simpson([&, x](double y) { return f(x, y); }, ay, by, n);
        },
        ax, bx, n);
}

// Variance of a 1D density given as a callable (not necessarily normalized).
inline double variance_of(const std::function<double(double)>& f, double a,
                          double b, int n = 4000) {
    const double norm = simpson(f, a, b, n);
    const double mean = simpson([&](double x) { return x * f(x); }, a, b, n) / norm;
    return simpson([&](double x) { return (x - mean) * (x - mean) * f(x); }, a,
                   b, n) /
           norm;
}

// Dataset assembled from the analytic expectations (no Poisson draws);
// dwell_s acts as the exposure so rounding is negligible at large values.
inline epr::ScanDataset expected_dataset(const epr::SourceParams& p,
                                         const epr::LensConfig& cfg,
                                         const epr::ScanGrid& grid,
                                         const epr::NoiseModel& noise) {
    epr::ScanDataset ds;
    ds.grid = grid;
    ds.mode = cfg.mode;
    ds.source = p;
    ds.lens = cfg;
    ds.noise = noise;
    ds.seed = 0;
    ds.records.reserve(grid.total_points());
    const int n = grid.n_steps;
    for (int i1 = 0; i1 < n; ++i1)
        for (int j1 = 0; j1 < n; ++j1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int j2 = 0; j2 < n; ++j2) {
                    const epr::PointRates r =
                        epr::expected_rates(p, cfg, grid, noise, i1, j1, i2, j2);
                    epr::ScanRecord rec{};
                    rec.i1 = static_cast<std::uint16_t>(i1);
                    rec.j1 = static_cast<std::uint16_t>(j1);
                    rec.i2 = static_cast<std::uint16_t>(i2);
                    rec.j2 = static_cast<std::uint16_t>(j2);
                    rec.s1 = std::llround(r.s1_hz * noise.dwell_s);
                    rec.s2 = std::llround(r.s2_hz * noise.dwell_s);
                    rec.cc = std::llround(r.cc_hz * noise.dwell_s);
                    rec.dwell_s = noise.dwell_s;
                    ds.records.push_back(rec);
                }
    return ds;
}

} // namespace testsupport
