#include "epr/optics.hpp"

#include "epr/errors.hpp"

#include <cmath>

namespace epr {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double LensConfig::momentum_scale() const {
    const double lambda_mm = lambda_signal_nm * 1e-6;
    return kTwoPi / (lambda_mm * f1_mm * demagnification_ff());
}

void LensConfig::validate() const {
    if (!(f1_mm > 0.0) || !(f2_mm > 0.0) || !(f3_mm > 0.0))
        throw parameter_error("focal lengths must be positive");
    if (!(lambda_signal_nm > 0.0))
        throw parameter_error("signal wavelength must be positive");
}

LensConfig LensConfig::near_field(const SourceParams& p) {
    LensConfig cfg;
    cfg.mode = PlaneMode::NearField;
    cfg.lambda_signal_nm = p.lambda_signal_nm;
    return cfg;
}

LensConfig LensConfig::far_field(const SourceParams& p) {
    LensConfig cfg;
    cfg.mode = PlaneMode::FarField;
    cfg.lambda_signal_nm = p.lambda_signal_nm;
    return cfg;
}

double detector_to_object(double x_det_mm, const LensConfig& cfg) {
    cfg.validate();
    if (cfg.mode != PlaneMode::NearField)
        throw mode_error("detector_to_object requires a near-field configuration");
    return x_det_mm / cfg.magnification_nf();
}

double detector_to_momentum(double x_det_mm, const LensConfig& cfg) {
    cfg.validate();
    if (cfg.mode != PlaneMode::FarField)
        throw mode_error("detector_to_momentum requires a far-field configuration");
    return cfg.momentum_scale() * x_det_mm;
}

Vec2 detector_to_object(const Vec2& r, const LensConfig& cfg) {
    return {detector_to_object(r[0], cfg), detector_to_object(r[1], cfg)};
}

Vec2 detector_to_momentum(const Vec2& r, const LensConfig& cfg) {
    return {detector_to_momentum(r[0], cfg), detector_to_momentum(r[1], cfg)};
}

} // namespace epr
