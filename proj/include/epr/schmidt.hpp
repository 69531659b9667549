#pragma once

#include "epr/optics.hpp"
#include "epr/scansim.hpp"

#include <cstdint>
#include <vector>

namespace epr {

// Square intensity map on a uniform grid in physical coordinates
// (crystal-plane mm for the near field, mm^-1 for the far field).
struct IntensityGrid {
    int n = 0;
    double coord0 = 0.0; // coordinate of cell (0,0), both axes
    double dcoord = 0.0; // uniform spacing, both axes
    PlaneMode mode = PlaneMode::NearField;
    std::vector<double> values;     // row-major, background-subtracted
    std::vector<double> raw_values; // before floor subtraction (may be empty)
    double samples = 1.0;           // averaging depth, for Poisson bootstrap

    double at(int i, int j) const { return values[i * n + j]; }
    void validate() const;
};

// Average the chosen arm's singles over the partner positions, subtract the
// dark floor (median of the 12 lowest-count border cells), clamp at zero and
// convert the coordinates through the lens mapping.
IntensityGrid singles_to_intensity(const ScanDataset& ds, int arm,
                                   const LensConfig& cfg);

// [∫I]^2 / ∫I^2 by midpoint Riemann sums; the "effective area" of the map.
double intensity_area_ratio(const IntensityGrid& g);

struct SchmidtEstimate {
    double k = 0.0;
    double err = 0.0;           // Poisson bootstrap std
    double k_uncorrected = 0.0; // without the dark-floor subtraction
};

// Schmidt number from the near- and far-field intensity maps of one arm,
// K = area_NF * area_FF / (2 pi)^2. Scale-invariant in both inputs.
SchmidtEstimate estimate_schmidt(const IntensityGrid& nf,
                                 const IntensityGrid& ff,
                                 int n_bootstrap = 200,
                                 std::uint64_t seed = 1);

// Dense noiseless intensity maps evaluated from the model marginals, for
// cross-validating the estimator against the SVD oracle.
IntensityGrid model_intensity_grid(const SourceParams& p, PlaneMode mode,
                                   int n, double extent);

} // namespace epr
