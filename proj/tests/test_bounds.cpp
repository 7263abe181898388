#include <doctest.h>

#include <cmath>

#include "fastmusic/bench.hpp"
#include "fastmusic/bounds.hpp"
#include "fastmusic/estimators.hpp"
#include "fastmusic/linalg.hpp"
#include "fastmusic/scene.hpp"
#include "fastmusic/spectrum.hpp"

using namespace fastmusic;

namespace {

PseudoSpectrum flat_spectrum(Index l, double value) {
    return PseudoSpectrum{AngleGrid(l), RealVec::Constant(l, value), Method::Exact, false};
}

}  // namespace

TEST_CASE("spectral_gap: diagonal cases") {
    CxMat d = CxMat::Zero(3, 3);
    d(0, 0) = 4.0;
    d(1, 1) = 2.0;
    d(2, 2) = 1.0;
    CHECK(spectral_gap(HermitianMatrix(d), 2) == doctest::Approx(0.5));
    d(2, 2) = 0.0;
    CHECK(spectral_gap(HermitianMatrix(d), 2) == doctest::Approx(0.0));
    d(1, 1) = 0.0;
    CHECK_THROWS_AS((void)spectral_gap(HermitianMatrix(d), 2), std::invalid_argument);
}

TEST_CASE("spectral_gap: shrinks as SNR grows (statistical)") {
    const FMCWConfig cfg = FMCWConfig::typical_77ghz(50, 500);
    int smaller = 0;
    const int trials = 10;
    for (int seed = 0; seed < trials; ++seed) {
        SceneSpec spec;
        spec.k = 3;
        const TargetScene scene = random_scene(Rng::derive(seed, 1), spec, cfg);
        auto gap_at = [&](double snr) {
            const CxMat y = synthesize_beat_signal(
                cfg, scene, noise_variance_for_snr_db(scene, snr), Rng::derive(seed, 2));
            return spectral_gap(spatial_covariance(y), 3);
        };
        if (gap_at(10.0) < gap_at(0.0)) ++smaller;
    }
    CHECK(smaller >= 9);
}

TEST_CASE("theorem1_bound: formula and sampling condition") {
    BoundInputs in;
    in.m = 200;
    in.k = 11;
    in.p = 12;
    in.delta = 0.2;
    in.coherence = 1.0;
    in.gap = 0.0;
    CHECK(theorem1_bound(in).kappa == doctest::Approx(1.0));
    in.gap = 0.01;
    const Theorem1Bound b = theorem1_bound(in);
    CHECK(b.kappa == doctest::Approx(2.1547005).epsilon(1e-6));
    CHECK(!b.sampling_condition_met);  // p = 12 sits far below 4.5 mu K log(K/delta)
    in.p = 1000;
    CHECK(theorem1_bound(in).sampling_condition_met);
}

TEST_CASE("theorem2_bound: formula and monotonicity in t") {
    BoundInputs in;
    in.m = 200;
    in.k = 11;
    in.delta = 0.2;
    in.t = 2;
    in.gap = 0.0;
    CHECK(theorem2_bound(in) == doctest::Approx(1.0));
    in.gap = 0.05;
    CHECK(theorem2_bound(in) == doctest::Approx(1.4145781).epsilon(1e-6));
    double prev = 1e300;
    for (int t = 0; t < 6; ++t) {
        in.t = t;
        const double k = theorem2_bound(in);
        CHECK(k >= 1.0);
        CHECK(k < prev);
        prev = k;
    }
}

TEST_CASE("theorem3_bound: formula, clamp, vacuous flag") {
    BoundInputs in;
    in.m = 200;
    in.k = 11;
    in.delta = 0.2;
    in.t = 2;
    in.gap = 0.0;
    CHECK(theorem3_bound(in).lower_constant == doctest::Approx(1.0));
    in.gap = 0.05;
    const Theorem3Bound b = theorem3_bound(in);
    CHECK(b.lower_constant == doctest::Approx(0.5854219).epsilon(1e-6));
    CHECK(!b.vacuous);
    in.gap = 0.9;
    in.t = 0;
    const Theorem3Bound v = theorem3_bound(in);
    CHECK(v.lower_constant == 0.0);
    CHECK(v.vacuous);
}

TEST_CASE("bounds tighten as the gap closes and with more sampling") {
    BoundInputs in;
    in.m = 100;
    in.k = 5;
    in.delta = 0.2;
    in.t = 1;
    in.coherence = 1.0;
    double prev = 1e300;
    for (Index p : {5, 10, 20, 40, 80}) {
        in.p = p;
        in.gap = 0.1;
        const double kappa = theorem1_bound(in).kappa;
        CHECK(kappa < prev);
        CHECK(kappa >= 1.0);
        prev = kappa;
    }
    in.p = 10;
    double prev_gap = 1e300;
    for (double gap : {0.5, 0.1, 0.01, 0.0}) {
        in.gap = gap;
        const double kappa = theorem1_bound(in).kappa;
        const double kl = theorem2_bound(in);
        CHECK(kappa <= prev_gap);
        CHECK(kl >= 1.0);
        CHECK(theorem3_bound(in).lower_constant <= 1.0);
        prev_gap = kappa;
    }
}

TEST_CASE("verify_bound: identical spectra never violate a valid bound") {
    const PseudoSpectrum p = flat_spectrum(101, 0.25);
    for (double kappa : {1.0, 1.5, 20.0}) {
        const BoundReport r = verify_bound(p, p, kappa, BoundKind::Thm1Lower);
        CHECK(r.n_violations == 0);
        CHECK(r.n_points == 101);
        CHECK(r.max_excess == 0.0);
    }
    const BoundReport u = verify_bound(p, p, 1.0, BoundKind::Thm3Upper);
    CHECK(u.n_violations == 0);
}

TEST_CASE("verify_bound: kappa below 1 flags every point (sanity inversion)") {
    const PseudoSpectrum p = flat_spectrum(64, 0.5);
    const BoundReport r = verify_bound(p, p, 0.5, BoundKind::Thm1Lower);
    CHECK(r.n_violations == 64);
    CHECK(r.violation_fraction() == doctest::Approx(1.0));
    CHECK(r.max_excess == doctest::Approx(0.5));
}

TEST_CASE("verify_bound: upper kind counts ratios below the constant") {
    const PseudoSpectrum exact = flat_spectrum(64, 0.5);
    PseudoSpectrum approx = exact;
    approx.values *= 4.0;  // sqrt(P/P~) = 0.5 everywhere
    const BoundReport r = verify_bound(exact, approx, 0.9, BoundKind::Thm3Upper);
    CHECK(r.n_violations == 64);
    const BoundReport ok = verify_bound(exact, approx, 0.4, BoundKind::Thm3Upper);
    CHECK(ok.n_violations == 0);
    CHECK_THROWS_AS((void)verify_bound(exact, flat_spectrum(32, 1.0), 1.0, BoundKind::Thm1Lower),
                    std::invalid_argument);
}

TEST_CASE("bound_report_json: carries the required fields") {
    const PseudoSpectrum p = flat_spectrum(16, 1.0);
    const BoundReport r = verify_bound(p, p, 2.0, BoundKind::Thm2Lower);
    const std::string j = bound_report_json(r);
    CHECK(j.find("\"kind\":\"thm2_lower\"") != std::string::npos);
    CHECK(j.find("\"kappa\":2.0") != std::string::npos);
    CHECK(j.find("\"n_points\":16") != std::string::npos);
    CHECK(j.find("\"n_violations\":0") != std::string::npos);
    CHECK(j.find("ratio_histogram") != std::string::npos);
}

TEST_CASE("detection_consistency_check: identical spectra retain everything") {
    const FMCWConfig cfg = FMCWConfig::typical_77ghz(64, 128);
    TargetScene scene;
    scene.targets.push_back({0.6, 2e-8, Complex(1, 0)});
    scene.targets.push_back({1.1, 5e-8, Complex(0, 1)});
    const CxMat y =
        synthesize_beat_signal(cfg, scene, noise_variance_for_snr_db(scene, 5.0), 3);
    const HermitianMatrix s = spatial_covariance(y);
    const AngleGrid grid(1801);
    const PseudoSpectrum p =
        music_spectrum(exact_signal_subspace(s, 2), grid, cfg.element_spacing, cfg.wavelength);
    const PeakSet peaks = extract_target_peaks(p, 2, 3);

    const DetectionReport r = detection_consistency_check(p, p, peaks, 1.0, 3);
    CHECK(r.all_retained);
    CHECK(r.gamma_hat > 1.0);
    CHECK(r.no_miss_condition);

    // Adversarially flatten one peak: reported as a miss.
    PseudoSpectrum broken = p;
    const Index cell = grid.nearest(peaks.angles[0]);
    for (Index l = std::max<Index>(0, cell - 6); l <= std::min<Index>(grid.size() - 1, cell + 6); ++l) {
        broken.values(l) = 1.0 / 64.0;
    }
    const DetectionReport miss = detection_consistency_check(p, broken, peaks, 1.0, 3);
    CHECK(!miss.all_retained);
    CHECK(!miss.retained[0]);
    CHECK(miss.retained[1]);
}

TEST_CASE("lemma_suite: all four checks pass at a fixed seed") {
    const LemmaReport report = lemma_suite(0);
    REQUIRE(report.checks.size() == 4);
    for (const LemmaCheck& check : report.checks) {
        INFO(check.name, ": observed ", check.observed, " required ", check.required);
        CHECK(check.pass);
    }
    CHECK(report.all_pass());
    CHECK(report.checks[0].observed == 0.0);       // sampling norm exactly M/p
    CHECK(report.checks[3].observed >= 0.75);      // smallest-singular-value frequency
}
