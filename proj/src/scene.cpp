#include "fastmusic/scene.hpp"

#include <cmath>
#include <stdexcept>

#include "fastmusic/rng.hpp"

namespace fastmusic {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedOfLight = 2.99792458e8;
}  // namespace

Index FMCWConfig::samples_per_chirp() const {
    return static_cast<Index>(std::llround(chirp_duration * sample_rate));
}

void FMCWConfig::validate() const {
    if (num_antennas < 1) throw std::invalid_argument("FMCWConfig: M >= 1 required");
    if (element_spacing <= 0.0) throw std::invalid_argument("FMCWConfig: d > 0 required");
    if (wavelength <= 0.0) throw std::invalid_argument("FMCWConfig: lambda > 0 required");
    if (chirp_duration <= 0.0 || sample_rate <= 0.0) {
        throw std::invalid_argument("FMCWConfig: T_sym and f_s must be positive");
    }
    if (sweep_bandwidth <= 0.0) {
        throw std::invalid_argument("FMCWConfig: chirp rate w_B / T_sym must be positive");
    }
    if (samples_per_chirp() < 1) {
        throw std::invalid_argument("FMCWConfig: T_sym * f_s must round to N >= 1");
    }
}

FMCWConfig FMCWConfig::typical_77ghz(Index m, Index n) {
    FMCWConfig cfg;
    cfg.start_angular_freq = 2.0 * kPi * 77e9;
    cfg.sweep_bandwidth = 2.0 * kPi * 1e9;
    cfg.sample_rate = 20e6;
    cfg.chirp_duration = static_cast<double>(n) / cfg.sample_rate;
    cfg.wavelength = kSpeedOfLight / 77e9;
    cfg.element_spacing = cfg.wavelength / 2.0;
    cfg.num_antennas = m;
    cfg.validate();
    return cfg;
}

double TargetScene::total_gain_power() const {
    double p = 0.0;
    for (const Target& t : targets) p += std::norm(t.gain);
    return p;
}

void TargetScene::validate(double min_separation_rad) const {
    if (targets.empty()) throw std::invalid_argument("TargetScene: K >= 1 required");
    for (const Target& t : targets) {
        if (!(t.angle_rad > 0.0 && t.angle_rad < kPi)) {
            throw std::invalid_argument("TargetScene: angles must lie strictly in (0, pi)");
        }
        if (t.delay_s < 0.0) {
            throw std::invalid_argument("TargetScene: delays must be non-negative");
        }
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = i + 1; j < targets.size(); ++j) {
            if (std::abs(targets[i].angle_rad - targets[j].angle_rad) < min_separation_rad) {
                throw std::invalid_argument("TargetScene: angle separation below minimum");
            }
        }
    }
}

CxVec steering_vector(double theta, Index m, double d, double lambda) {
    if (m < 1 || d <= 0.0 || lambda <= 0.0) {
        throw std::invalid_argument("steering_vector: need M >= 1, d > 0, lambda > 0");
    }
    const double step = 2.0 * kPi * d * std::sin(theta) / lambda;
    CxVec a(m);
    for (Index i = 0; i < m; ++i) {
        a(i) = std::polar(1.0, step * static_cast<double>(i));
    }
    return a;
}

PhaseConstants phase_constants(const FMCWConfig& config, const TargetScene& scene) {
    config.validate();
    scene.validate(0.0);
    const double mu = config.chirp_rate();
    const double ts = config.sample_period();
    PhaseConstants out;
    for (const Target& t : scene.targets) {
        out.angle_shift.push_back(std::polar(
            1.0, 2.0 * kPi * config.element_spacing * std::sin(t.angle_rad) / config.wavelength));
        out.delay_shift.push_back(std::polar(1.0, mu * t.delay_s * ts));
        out.delay_phase.push_back(std::polar(
            1.0, config.start_angular_freq * t.delay_s - 0.5 * mu * t.delay_s * t.delay_s));
    }
    return out;
}

CxMat synthesize_beat_signal(const FMCWConfig& config, const TargetScene& scene,
                             double noise_var, std::uint64_t seed) {
    config.validate();
    scene.validate(0.0);
    if (noise_var < 0.0) throw std::invalid_argument("synthesize_beat_signal: noise_var >= 0");

    const Index m = config.num_antennas;
    const Index n = config.samples_per_chirp();
    const PhaseConstants ph = phase_constants(config, scene);
    const double mu = config.chirp_rate();
    const double ts = config.sample_period();

    CxMat y = CxMat::Zero(m, n);
    for (Index k = 0; k < scene.size(); ++k) {
        const Target& t = scene.targets[static_cast<std::size_t>(k)];
        const CxVec a = steering_vector(t.angle_rad, m, config.element_spacing, config.wavelength);
        CxVec beat(n);
        const double w = mu * t.delay_s * ts;  // per-sample beat phase increment
        for (Index s = 0; s < n; ++s) {
            beat(s) = std::polar(1.0, w * static_cast<double>(s));
        }
        y.noalias() += (t.gain * ph.delay_phase[static_cast<std::size_t>(k)]) * a * beat.transpose();
    }

    if (noise_var > 0.0) {
        Rng rng(seed);
        const double scale = std::sqrt(noise_var / 2.0);
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < n; ++j) {
                y(i, j) += Complex(scale * rng.normal(), scale * rng.normal());
            }
        }
    }
    return y;
}

namespace {

HermitianMatrix scaled_gram(const CxMat& y, bool spatial) {
    ensure_finite(y, "covariance");
    const Index m = y.rows();
    const Index n = y.cols();
    if (m < 1 || n < 1) throw std::invalid_argument("covariance: empty signal matrix");
    if (spatial) {
        CxMat s = CxMat::Zero(m, m);
        s.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / static_cast<double>(n));
        CxMat full = s.selfadjointView<Eigen::Lower>();
        return HermitianMatrix(full);
    }
    CxMat t = CxMat::Zero(n, n);
    t.selfadjointView<Eigen::Lower>().rankUpdate(y.adjoint(), 1.0 / static_cast<double>(m));
    CxMat full = t.selfadjointView<Eigen::Lower>();
    return HermitianMatrix(full);
}

}  // namespace

HermitianMatrix spatial_covariance(const CxMat& y) {
    return scaled_gram(y, true);
}

HermitianMatrix temporal_covariance(const CxMat& y) {
    return scaled_gram(y, false);
}

}  // namespace fastmusic
