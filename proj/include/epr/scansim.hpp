#pragma once

#include "epr/model.hpp"
#include "epr/optics.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace epr {

// Raster geometry of the two fiber stages. Each arm scans an n x n square
// around its own center; a full run visits n^4 four-coordinate points.
struct ScanGrid {
    int n_steps = 17;
    double step_um = 10.0;
    Vec2 center1_um{0.0, 0.0};
    Vec2 center2_um{0.0, 0.0};

    void validate() const;
    double offset_um(int idx) const {
        return (idx - 0.5 * (n_steps - 1)) * step_um;
    }
    Vec2 pos1_um(int i, int j) const {
        return {center1_um[0] + offset_um(i), center1_um[1] + offset_um(j)};
    }
    Vec2 pos2_um(int i, int j) const {
        return {center2_um[0] + offset_um(i), center2_um[1] + offset_um(j)};
    }
    std::size_t total_points() const {
        const std::size_t n = static_cast<std::size_t>(n_steps);
        return n * n * n * n;
    }
};

struct NoiseModel {
    double dwell_s = 1.0;
    double window_ps = 300.0;
    double dark1_hz = 250.0;
    double dark2_hz = 250.0;
    // Gaussian fiber-collection radius in the detection plane. Tuned so the
    // coincidence-to-singles ratio lands at the reference rates; adjust it
    // together with pair_rate when modeling a different fiber mode.
    double collection_sigma_um = 1.3;
    double efficiency1 = 0.6;
    double efficiency2 = 1.0;

    void validate() const;
};

struct ScanRecord {
    std::uint16_t i1, j1, i2, j2;
    std::int64_t s1, s2, cc;
    double dwell_s;
};

struct ScanDataset {
    ScanGrid grid;
    PlaneMode mode = PlaneMode::NearField;
    SourceParams source;
    LensConfig lens;
    NoiseModel noise;
    std::uint64_t seed = 0;
    std::vector<ScanRecord> records; // j2 fastest, i1 slowest

    std::size_t index(int i1, int j1, int i2, int j2) const {
        const std::size_t n = static_cast<std::size_t>(grid.n_steps);
        return ((static_cast<std::size_t>(i1) * n + j1) * n + i2) * n + j2;
    }
    const ScanRecord& at(int i1, int j1, int i2, int j2) const {
        return records[index(i1, j1, i2, j2)];
    }
};

struct PointRates {
    double s1_hz, s2_hz, cc_hz;
};

// Analytic expectations for one grid point: fiber collection modeled as an
// intensity overlap with a Gaussian acceptance of width collection_sigma,
// accidentals added on top of the true-pair rate.
PointRates expected_rates(const SourceParams& p, const LensConfig& cfg,
                          const ScanGrid& grid, const NoiseModel& noise,
                          int i1, int j1, int i2, int j2);

// Poisson-realized raster scan. Deterministic for a fixed seed independent of
// thread count; per-point RNG streams are derived from (seed, i1, j1, i2, j2).
ScanDataset simulate_scan(const SourceParams& p, const LensConfig& cfg,
                          const ScanGrid& grid, const NoiseModel& noise,
                          std::uint64_t seed, int threads = 0);

// Two time-tag streams (ps) over [0, duration): correlated pairs sharing a
// birth time plus independent Gaussian jitter, uncorrelated background at
// rate1/rate2. Streams are sorted. Guards at 1e8 expected tags.
std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>
generate_timetags(double rate1_hz, double rate2_hz, double pair_rate_hz,
                  double jitter_ps, double duration_s, std::uint64_t seed);

} // namespace epr
