#pragma once

#include <cstdint>
#include <vector>

#include "fastmusic/types.hpp"

namespace fastmusic {

/// FMCW chirp and array geometry. The chirp rate and the per-chirp sample
/// count are derived, never stored independently.
struct FMCWConfig {
    double start_angular_freq = 0.0;  // w_s [rad/s]
    double sweep_bandwidth = 0.0;     // w_B [rad/s]
    double chirp_duration = 0.0;      // T_sym [s]
    double sample_rate = 0.0;         // f_s [Hz]
    double wavelength = 0.0;          // lambda_s [m]
    double element_spacing = 0.0;     // d [m], typically lambda_s / 2
    Index num_antennas = 0;           // M

    double chirp_rate() const { return sweep_bandwidth / chirp_duration; }  // mu
    double sample_period() const { return 1.0 / sample_rate; }              // T_s
    Index samples_per_chirp() const;                                        // N

    void validate() const;

    /// 77 GHz short-range profile sized so that the chirp yields exactly n samples.
    static FMCWConfig typical_77ghz(Index m, Index n);
};

struct Target {
    double angle_rad = 0.0;  // theta in (0, pi)
    double delay_s = 0.0;    // tau >= 0
    Complex gain{1.0, 0.0};  // alpha
};

struct TargetScene {
    std::vector<Target> targets;

    Index size() const { return static_cast<Index>(targets.size()); }
    double total_gain_power() const;

    /// Angles must lie strictly inside (0, pi) and be pairwise separated by at
    /// least min_separation_rad.
    void validate(double min_separation_rad) const;
};

/// Per-target unit-modulus phase constants of the discrete beat signal:
///   angle_shift[k] = exp(j 2 pi d sin(theta_k) / lambda)   (per antenna step)
///   delay_shift[k] = exp(j mu tau_k T_s)                   (per sample step)
///   delay_phase[k] = exp(j (w_s tau_k - mu tau_k^2 / 2))   (constant offset)
struct PhaseConstants {
    std::vector<Complex> angle_shift;  // vartheta
    std::vector<Complex> delay_shift;  // kappa
    std::vector<Complex> delay_phase;  // rho
};

/// ULA steering vector a(theta), entry m = exp(j 2 pi d m sin(theta) / lambda).
/// ||a||^2 = M by construction.
CxVec steering_vector(double theta, Index m, double d, double lambda);

PhaseConstants phase_constants(const FMCWConfig& config, const TargetScene& scene);

/// M x N beat-signal matrix
///   Y(m, n) = sum_k alpha_k rho_k kappa_k^n vartheta_k^m + noise(m, n)
/// with complex circular Gaussian noise of total variance noise_var per entry
/// (real and imaginary parts each N(0, noise_var / 2), seeded, row-major order).
CxMat synthesize_beat_signal(const FMCWConfig& config, const TargetScene& scene,
                             double noise_var, std::uint64_t seed);

/// S = Y Y^H / N  (M x M, Hermitian PSD).
HermitianMatrix spatial_covariance(const CxMat& y);

/// T = Y^H Y / M  (N x N, Hermitian PSD).
HermitianMatrix temporal_covariance(const CxMat& y);

}  // namespace fastmusic
