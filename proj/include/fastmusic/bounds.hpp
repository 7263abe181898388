#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastmusic/spectrum.hpp"
#include "fastmusic/types.hpp"

namespace fastmusic {

/// Everything the closed-form bounds depend on.
struct BoundInputs {
    Index m = 0;
    Index k = 0;
    Index p = 0;
    int t = 0;
    double delta = 0.2;      // failure probability budget
    double gap = 0.0;        // sigma_{K+1}(S) / sigma_K(S)
    double coherence = 1.0;  // mu(U_K)
};

/// sigma_{K+1} / sigma_K of S. Fails when sigma_K is numerically zero.
double spectral_gap(const HermitianMatrix& s, Index k);

/// Sampling bound kappa = 1 + 2 sqrt(M^2 / p) * gap, plus whether p meets the
/// stated sampling condition p >= 4.5 mu K log(K / delta). The condition is
/// reported, not enforced: small p is verified empirically instead.
struct Theorem1Bound {
    double kappa = 1.0;
    double required_p = 0.0;
    bool sampling_condition_met = false;
};
Theorem1Bound theorem1_bound(const BoundInputs& in);

/// Projection lower-bound constant kappa_l = 1 + (sqrt(M^2 K) / delta) * gap^(t+1).
double theorem2_bound(const BoundInputs& in);

/// Projection upper-bound constant 1 - (sqrt(M^2 K) / delta) * gap^(t+1),
/// clamped at 0 with a vacuous flag when the raw value goes negative.
struct Theorem3Bound {
    double lower_constant = 1.0;
    bool vacuous = false;
};
Theorem3Bound theorem3_bound(const BoundInputs& in);

enum class BoundKind { Thm1Lower, Thm2Lower, Thm3Upper };
const char* bound_kind_name(BoundKind kind);

/// Per-grid-point check of a bound against the ratio sqrt(P_exact / P_approx).
/// Lower kinds violate where the ratio exceeds the bound, the upper kind where
/// it falls below. Keeps the ratios for scatter plots.
struct BoundReport {
    BoundKind kind = BoundKind::Thm1Lower;
    double bound = 1.0;
    Index n_points = 0;
    Index n_violations = 0;
    double max_excess = 0.0;
    std::vector<double> ratios;

    double violation_fraction() const {
        return n_points == 0 ? 0.0 : static_cast<double>(n_violations) /
                                         static_cast<double>(n_points);
    }
};
BoundReport verify_bound(const PseudoSpectrum& exact, const PseudoSpectrum& approx,
                         double bound, BoundKind kind);

/// JSON form: kind, kappa, n_points, n_violations, max_excess, ratio histogram.
std::string bound_report_json(const BoundReport& report);

/// Peak-retention audit: gamma_hat = min_k P(theta_k) / P0 from the exact
/// spectrum's peaks, the no-miss condition kappa_l < sqrt(gamma_hat), and a
/// per-peak check that each exact peak stays a local maximum of the
/// approximation within +-min_separation cells.
struct DetectionReport {
    double gamma_hat = 0.0;
    double kappa_l = 0.0;
    bool no_miss_condition = false;
    std::vector<bool> retained;
    bool all_retained = false;
};
DetectionReport detection_consistency_check(const PseudoSpectrum& exact,
                                            const PseudoSpectrum& approx, const PeakSet& peaks,
                                            double kappa_l, Index min_separation_cells);

/// Statistical checks of the four supporting lemmas (sampling-matrix norm,
/// sampled-subspace singular values, Gaussian spectral norm, Gaussian smallest
/// singular value) at fixed trial counts and slack.
struct LemmaCheck {
    std::string name;
    bool pass = false;
    double observed = 0.0;
    double required = 0.0;
    std::string detail;
};
struct LemmaReport {
    std::vector<LemmaCheck> checks;
    bool all_pass() const;
};
LemmaReport lemma_suite(std::uint64_t seed);

}  // namespace fastmusic
