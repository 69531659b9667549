#pragma once

#include "epr/gaussfit.hpp"
#include "epr/optics.hpp"
#include "epr/scansim.hpp"

#include <array>
#include <string>
#include <vector>

namespace epr {

// cc / sqrt(s1*s2); throws normalization_error when a singles count is zero
// (callers mask such points).
double normalize(double cc, double s1, double s2);

enum class Axis { X, Y };
enum class Direction { Infer1From2, Infer2From1 };

struct VarianceEstimate {
    double value = 0.0; // mm^2 (near field) or mm^-2 (far field)
    double err = 0.0;
    int n_slices = 0;
};

// Unit-tagged inputs so position and momentum variances cannot be swapped in
// the uncertainty product.
struct PositionVariance {
    double value_mm2;
    double err_mm2;
};
struct MomentumVariance {
    double value_per_mm2;
    double err_per_mm2;
};

struct EprEntry {
    double product = 0.0;
    double err = 0.0;
    bool violation = false;     // product < 1/4
    double significance = 0.0;  // (1/4 - product) / err, in standard deviations
};

struct SliceOutcome {
    int cond_index = -1;
    bool used = false;
    std::string reason;  // why a slice was skipped
    double variance = 0.0, variance_err = 0.0;
    double weight = 0.0;
    std::int64_t raw_counts = 0;
    FitResult fit;
};

struct MinVarianceResult {
    VarianceEstimate estimate;
    std::vector<SliceOutcome> slices;
};

// Minimum inferred variance per Reid: P-weighted average of per-slice
// conditional variances, fitted on normalized coincidences and converted to
// physical units through the lens mapping. Slices run over the partner
// coordinate of the chosen axis with the other-axis coordinates fixed at the
// scan centers (the reference analysis slices through y = 0); a slice needs
// at least 50 raw coincidences, a convergent fit and reduced chi^2 <= 5.
MinVarianceResult min_inferred_variance_detailed(const ScanDataset& ds,
                                                 const LensConfig& cfg,
                                                 Axis axis, Direction dir);
VarianceEstimate min_inferred_variance(const ScanDataset& ds,
                                       const LensConfig& cfg, Axis axis,
                                       Direction dir);

EprEntry epr_test(const PositionVariance& pos, const MomentumVariance& mom);

struct EprReportRow {
    Axis axis;
    Direction dir;
    VarianceEstimate position; // mm^2
    VarianceEstimate momentum; // mm^-2
    EprEntry epr;
};

struct EprReport {
    std::array<EprReportRow, 4> rows; // (x,1|2), (y,1|2), (x,2|1), (y,2|1)
};

EprReport analyze_pair(const ScanDataset& nf, const ScanDataset& ff);
std::string format_report_table(const EprReport& report);

struct BirthRegionResult {
    double diameter_um = 0.0; // crystal-plane FWHM, averaged over both arms
    double err_um = 0.0;
    double arm1_um = 0.0, arm2_um = 0.0;
};

// Crystal-plane extent of the pair birth zone from the averaged near-field
// singles of both arms (2D Gaussian fit, FWHM back through the magnification).
BirthRegionResult birth_region(const ScanDataset& ds, const LensConfig& cfg);

// Closed-form predictions of what the full chain measures on simulated data:
// model conditional width, collection kernel, and the reshaping caused by
// fitting cc/sqrt(s1*s2) rather than raw cc. Ground truth for the oracle
// chain tests.
double predicted_position_variance(const SourceParams& p, const LensConfig& cfg,
                                   const NoiseModel& noise); // mm^2
double predicted_momentum_variance(const SourceParams& p, const LensConfig& cfg,
                                   const NoiseModel& noise); // mm^-2

} // namespace epr
