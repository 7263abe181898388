#include <doctest.h>

#include <cmath>

#include "fastmusic/linalg.hpp"
#include "fastmusic/scene.hpp"

using namespace fastmusic;

namespace {

constexpr double kPi = 3.14159265358979323846;

FMCWConfig test_config(Index m, Index n) {
    return FMCWConfig::typical_77ghz(m, n);
}

}  // namespace

TEST_CASE("steering_vector: broadside gives all ones") {
    const CxVec a = steering_vector(0.0, 5, 0.002, 0.004);
    CHECK((a - CxVec::Ones(5)).norm() < 1e-15);
}

TEST_CASE("steering_vector: squared norm is exactly M") {
    for (double theta : {0.3, 1.0, 2.2}) {
        const CxVec a = steering_vector(theta, 33, 0.002, 0.004);
        CHECK(a.squaredNorm() == doctest::Approx(33.0).epsilon(1e-14));
    }
}

TEST_CASE("steering_vector: endfire half-wavelength alternates sign") {
    const CxVec a = steering_vector(kPi / 2.0, 4, 0.002, 0.004);  // d = lambda/2
    CHECK(std::abs(a(0) - Complex(1, 0)) < 1e-12);
    CHECK(std::abs(a(1) - Complex(-1, 0)) < 1e-12);
    CHECK(std::abs(a(2) - Complex(1, 0)) < 1e-12);
    CHECK(std::abs(a(3) - Complex(-1, 0)) < 1e-12);
}

TEST_CASE("phase_constants: zero angle and zero delay degenerate to one") {
    FMCWConfig cfg = test_config(4, 64);
    TargetScene scene;
    scene.targets.push_back({1e-9, 0.0, Complex(1, 0)});  // ~zero angle, zero delay
    const PhaseConstants ph = phase_constants(cfg, scene);
    CHECK(std::abs(ph.angle_shift[0] - Complex(1, 0)) < 1e-8);
    CHECK(std::abs(ph.delay_shift[0] - Complex(1, 0)) < 1e-15);
    CHECK(std::abs(ph.delay_phase[0] - Complex(1, 0)) < 1e-15);
    CHECK(std::abs(std::abs(ph.angle_shift[0]) - 1.0) < 1e-12);
}

TEST_CASE("phase_constants: match a direct scalar evaluation") {
    // mu = 1e12 rad/s^2, tau = 1e-7 s, w_s = 2*pi*77e9.
    FMCWConfig cfg;
    cfg.start_angular_freq = 2.0 * kPi * 77e9;
    cfg.chirp_duration = 1e-5;
    cfg.sweep_bandwidth = 1e12 * cfg.chirp_duration;  // mu = w_B / T_sym = 1e12
    cfg.sample_rate = 2e6;
    cfg.wavelength = 0.0039;
    cfg.element_spacing = cfg.wavelength / 2.0;
    cfg.num_antennas = 8;

    const double tau = 1e-7;
    const double theta = 0.7;
    TargetScene scene;
    scene.targets.push_back({theta, tau, Complex(1, 0)});
    const PhaseConstants ph = phase_constants(cfg, scene);

    const Complex vartheta = std::exp(Complex(0, 2.0 * kPi * cfg.element_spacing *
                                                     std::sin(theta) / cfg.wavelength));
    const Complex kappa = std::exp(Complex(0, 1e12 * tau * (1.0 / 2e6)));
    const Complex rho = std::exp(Complex(0, 2.0 * kPi * 77e9 * tau - 0.5 * 1e12 * tau * tau));
    CHECK(std::abs(ph.angle_shift[0] - vartheta) < 1e-12);
    CHECK(std::abs(ph.delay_shift[0] - kappa) < 1e-12);
    CHECK(std::abs(ph.delay_phase[0] - rho) < 1e-9);
}

TEST_CASE("synthesize_beat_signal: single noiseless target is rank one along the steering vector") {
    FMCWConfig cfg = test_config(16, 32);
    TargetScene scene;
    scene.targets.push_back({0.9, 3e-8, Complex(1, 0)});
    const CxMat y = synthesize_beat_signal(cfg, scene, 0.0, 0);

    const SvdResult svd = thin_svd(y);
    CHECK(svd.sigma(1) / svd.sigma(0) < 1e-10);

    const CxVec a = steering_vector(0.9, 16, cfg.element_spacing, cfg.wavelength);
    const CxMat residual = y - a * (a.adjoint() * y) / 16.0;
    CHECK(residual.norm() < 1e-9 * y.norm());
}

TEST_CASE("synthesize_beat_signal: noise-only statistics") {
    FMCWConfig cfg = test_config(200, 200);
    TargetScene scene;
    scene.targets.push_back({0.5, 1e-8, Complex(0, 0)});  // zero-gain target
    const CxMat y = synthesize_beat_signal(cfg, scene, 1.0, 7);
    const double var = y.cwiseAbs2().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("synthesize_beat_signal: two noiseless targets span the steering plane") {
    FMCWConfig cfg = test_config(16, 64);
    TargetScene scene;
    scene.targets.push_back({0.6, 2e-8, Complex(1, 0.3)});
    scene.targets.push_back({1.2, 5e-8, Complex(-0.4, 1)});
    const CxMat y = synthesize_beat_signal(cfg, scene, 0.0, 0);

    CxMat steer(16, 2);
    steer.col(0) = steering_vector(0.6, 16, cfg.element_spacing, cfg.wavelength);
    steer.col(1) = steering_vector(1.2, 16, cfg.element_spacing, cfg.wavelength);
    const CxMat q = qr_orthonormal(steer);
    CHECK((y - q * (q.adjoint() * y)).norm() < 1e-9 * y.norm());
}

TEST_CASE("synthesize_beat_signal: deterministic in the seed") {
    FMCWConfig cfg = test_config(8, 16);
    TargetScene scene;
    scene.targets.push_back({0.8, 1e-8, Complex(1, 0)});
    const CxMat a = synthesize_beat_signal(cfg, scene, 0.5, 3);
    const CxMat b = synthesize_beat_signal(cfg, scene, 0.5, 3);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("spatial_covariance: identity and outer-product cases") {
    const HermitianMatrix s = spatial_covariance(CxMat::Identity(2, 2));
    CHECK((s.mat() - 0.5 * CxMat::Identity(2, 2)).norm() < 1e-15);

    Rng rng(5);
    CxVec x(3);
    for (Index i = 0; i < 3; ++i) x(i) = Complex(rng.normal(), rng.normal());
    const CxMat y = x * Eigen::RowVectorXcd::Ones(7);
    const HermitianMatrix s2 = spatial_covariance(y);
    CHECK((s2.mat() - x * x.adjoint()).norm() < 1e-12 * x.squaredNorm());
}

TEST_CASE("spatial_covariance: matches an entrywise summation oracle") {
    Rng rng(9);
    CxMat y(6, 10);
    for (Index i = 0; i < 6; ++i) {
        for (Index j = 0; j < 10; ++j) y(i, j) = Complex(rng.normal(), rng.normal());
    }
    const HermitianMatrix s = spatial_covariance(y);
    CxMat oracle = CxMat::Zero(6, 6);
    for (Index n = 0; n < 10; ++n) {
        oracle += y.col(n) * y.col(n).adjoint();
    }
    oracle /= 10.0;
    CHECK((s.mat() - oracle).norm() < 1e-12 * oracle.norm());
}

TEST_CASE("temporal_covariance: identity, single-row, shared spectrum") {
    const HermitianMatrix t = temporal_covariance(CxMat::Identity(2, 2));
    CHECK((t.mat() - 0.5 * CxMat::Identity(2, 2)).norm() < 1e-15);

    Rng rng(13);
    CxMat y = CxMat::Zero(4, 5);
    for (Index j = 0; j < 5; ++j) y(2, j) = Complex(rng.normal(), rng.normal());
    const HermitianMatrix t2 = temporal_covariance(y);
    const CxMat r = y.row(2);
    CHECK((t2.mat() - r.adjoint() * r / 4.0).norm() < 1e-13);

    CxMat y3(4, 7);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 7; ++j) y3(i, j) = Complex(rng.normal(), rng.normal());
    }
    // Nonzero spectra of Y Y^H / N and Y^H Y / N coincide.
    const EigResult es = hermitian_eig(spatial_covariance(y3));
    const EigResult et = hermitian_eig(HermitianMatrix(CxMat(y3.adjoint() * y3 / 7.0)));
    for (Index i = 0; i < 4; ++i) {
        CHECK(es.eigenvalues(i) == doctest::Approx(et.eigenvalues(i)).epsilon(1e-10));
    }
}

TEST_CASE("noiseless scenes give numerically rank-K covariances whose subspace spans the steering vectors") {
    FMCWConfig cfg = test_config(24, 96);
    TargetScene scene;
    scene.targets.push_back({0.5, 2e-8, Complex(1, 0)});
    scene.targets.push_back({0.9, 4e-8, Complex(0.2, 0.9)});
    scene.targets.push_back({1.3, 7e-8, Complex(-1, 0.1)});
    const CxMat y = synthesize_beat_signal(cfg, scene, 0.0, 0);
    const HermitianMatrix s = spatial_covariance(y);
    const EigResult eig = hermitian_eig(s);
    CHECK(eig.eigenvalues(3) / eig.eigenvalues(0) < 1e-9);

    const CxMat u = eig.eigenvectors.leftCols(3);
    for (const Target& t : scene.targets) {
        const CxVec a = steering_vector(t.angle_rad, 24, cfg.element_spacing, cfg.wavelength);
        CHECK((a - u * (u.adjoint() * a)).norm() < 1e-8 * a.norm());
    }
}

TEST_CASE("noisy covariance: trailing eigenvalues cluster at N = 10 M") {
    int pass = 0;
    const int trials = 20;
    for (int seed = 0; seed < trials; ++seed) {
        FMCWConfig cfg = test_config(20, 200);
        TargetScene scene;
        scene.targets.push_back({0.7, 2e-8, Complex(1, 0)});
        scene.targets.push_back({1.1, 5e-8, Complex(0, 1)});
        const double noise_var = scene.total_gain_power();  // SNR 0 dB
        const CxMat y = synthesize_beat_signal(cfg, scene, noise_var,
                                               static_cast<std::uint64_t>(seed));
        const EigResult eig = hermitian_eig(spatial_covariance(y));
        const double hi = eig.eigenvalues(2);
        const double lo = eig.eigenvalues(19);
        // The sample-covariance noise bulk spans the Marchenko-Pastur support,
        // whose edge ratio at M/N = 0.1 is ((1+sqrt(0.1))/(1-sqrt(0.1)))^2 = 3.70;
        // 4.5 leaves room for finite-M edge fluctuation.
        if (hi / lo <= 4.5) ++pass;
    }
    CHECK(pass >= 18);  // >= 90% of seeds
}

TEST_CASE("FMCWConfig and TargetScene validation") {
    FMCWConfig cfg = test_config(8, 32);
    CHECK(cfg.samples_per_chirp() == 32);
    CHECK(cfg.chirp_rate() > 0.0);
    cfg.element_spacing = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    TargetScene bad;
    CHECK_THROWS_AS(bad.validate(0.0), std::invalid_argument);
    bad.targets.push_back({kPi + 0.1, 0.0, Complex(1, 0)});
    CHECK_THROWS_AS(bad.validate(0.0), std::invalid_argument);
    TargetScene close;
    close.targets.push_back({0.50, 0.0, Complex(1, 0)});
    close.targets.push_back({0.5005, 0.0, Complex(1, 0)});
    CHECK_THROWS_AS(close.validate(0.01), std::invalid_argument);
    CHECK_NOTHROW(close.validate(0.0001));
}
