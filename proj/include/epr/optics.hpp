#pragma once

#include "epr/model.hpp"

namespace epr {

enum class PlaneMode { NearField, FarField };

// Imaging geometry of one detection arm. Near field: 2f/2f' image of the
// crystal plane (magnification f2/f1). Far field: Fourier plane of L1,
// demagnified by f3/f2, so the effective Fourier focal length is f1*f3/f2.
//
// The focal lengths follow the experiment text (f1 = 200 mm); the figure
// caption quotes f1 = 250 mm / f2 = 200 mm, which is inconsistent with the
// quoted magnifications 0.75 and 0.03 and is not used.
struct LensConfig {
    double f1_mm = 200.0;
    double f2_mm = 150.0;
    double f3_mm = 4.5;
    PlaneMode mode = PlaneMode::NearField;
    double lambda_signal_nm = 1550.156;

    double magnification_nf() const { return f2_mm / f1_mm; }     // 0.75
    double demagnification_ff() const { return f3_mm / f2_mm; }   // 0.03
    double effective_focal_mm() const { return f1_mm * demagnification_ff(); }
    // q = momentum_scale * x_det; = 2*pi / (lambda * f_eff) ~ 675.5 mm^-1/mm
    double momentum_scale() const;

    void validate() const;

    static LensConfig near_field(const SourceParams& p = SourceParams::defaults());
    static LensConfig far_field(const SourceParams& p = SourceParams::defaults());
};

// Detector-plane fiber position -> crystal-plane position (near field only).
double detector_to_object(double x_det_mm, const LensConfig& cfg);
// Detector-plane fiber position -> transverse momentum (far field only).
double detector_to_momentum(double x_det_mm, const LensConfig& cfg);

Vec2 detector_to_object(const Vec2& r_det_mm, const LensConfig& cfg);
Vec2 detector_to_momentum(const Vec2& r_det_mm, const LensConfig& cfg);

} // namespace epr
