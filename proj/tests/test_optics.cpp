#include "epr/errors.hpp"
#include "epr/optics.hpp"

#include <doctest.h>

#include <cmath>

using namespace epr;

TEST_CASE("default magnifications") {
    const LensConfig nf = LensConfig::near_field();
    CHECK(nf.magnification_nf() == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(nf.demagnification_ff() == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(nf.effective_focal_mm() == doctest::Approx(6.0).epsilon(1e-15));
    // 2*pi / (lambda * f_eff) with the degenerate signal wavelength
    CHECK(LensConfig::far_field().momentum_scale() ==
          doctest::Approx(675.5427).epsilon(1e-5));
}

TEST_CASE("maps are linear, odd and zero-preserving") {
    const LensConfig nf = LensConfig::near_field();
    const LensConfig ff = LensConfig::far_field();
    CHECK(detector_to_object(0.0, nf) == 0.0);
    CHECK(detector_to_momentum(0.0, ff) == 0.0);
    for (double x : {-0.08, -0.013, 0.002, 0.05}) {
        CHECK(detector_to_object(-x, nf) == -detector_to_object(x, nf));
        CHECK(detector_to_object(3.0 * x, nf) ==
              doctest::Approx(3.0 * detector_to_object(x, nf)).epsilon(1e-15));
        CHECK(detector_to_momentum(-x, ff) == -detector_to_momentum(x, ff));
        CHECK(detector_to_momentum(2.5 * x, ff) ==
              doctest::Approx(2.5 * detector_to_momentum(x, ff)).epsilon(1e-15));
    }
}

TEST_CASE("unity magnification is the identity") {
    LensConfig cfg = LensConfig::near_field();
    cfg.f2_mm = cfg.f1_mm;
    for (double x : {-0.02, 0.0, 0.013})
        CHECK(detector_to_object(x, cfg) == doctest::Approx(x).epsilon(1e-15));
}

TEST_CASE("near-field variance conversion reproduces the reference value") {
    // fitted detector sigma back-computed from 9.8e-4 mm^2 through M = 0.75
    const LensConfig nf = LensConfig::near_field();
    const double sigma_det = std::sqrt(9.8e-4) * 0.75;
    CHECK(sigma_det * 1e3 == doctest::Approx(23.5).epsilon(2e-3));
    const double sigma_obj = detector_to_object(sigma_det, nf);
    CHECK(sigma_obj * sigma_obj == doctest::Approx(9.8e-4).epsilon(1e-12));
}

TEST_CASE("far-field variance conversion reproduces the reference value") {
    const LensConfig ff = LensConfig::far_field();
    // detector sigma implied by a 87.8 mm^-2 conditional momentum variance
    const double sigma_det = 0.0138706; // mm, ~13.9 um
    const double q = detector_to_momentum(sigma_det, ff);
    CHECK(q * q == doctest::Approx(87.8).epsilon(1e-3));
}

TEST_CASE("doubling f3 halves the returned momentum") {
    LensConfig ff = LensConfig::far_field();
    const double q1 = detector_to_momentum(0.02, ff);
    ff.f3_mm *= 2.0;
    CHECK(ff.demagnification_ff() == doctest::Approx(0.06).epsilon(1e-15));
    CHECK(detector_to_momentum(0.02, ff) == doctest::Approx(0.5 * q1).epsilon(1e-15));
}

TEST_CASE("mode errors") {
    CHECK_THROWS_AS(detector_to_object(0.01, LensConfig::far_field()), mode_error);
    CHECK_THROWS_AS(detector_to_momentum(0.01, LensConfig::near_field()),
                    mode_error);
    LensConfig bad = LensConfig::near_field();
    bad.f2_mm = 0.0;
    CHECK_THROWS_AS(detector_to_object(0.01, bad), parameter_error);
}

TEST_CASE("vector wrappers apply componentwise") {
    const LensConfig nf = LensConfig::near_field();
    const Vec2 r = detector_to_object(Vec2{0.03, -0.06}, nf);
    CHECK(r[0] == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(-0.08).epsilon(1e-15));
    const LensConfig ff = LensConfig::far_field();
    const Vec2 q = detector_to_momentum(Vec2{0.01, 0.0}, ff);
    CHECK(q[0] == doctest::Approx(ff.momentum_scale() * 0.01).epsilon(1e-15));
    CHECK(q[1] == 0.0);
}
