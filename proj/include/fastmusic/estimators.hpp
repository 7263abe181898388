#pragma once

#include <cstdint>

#include "fastmusic/spectrum.hpp"
#include "fastmusic/types.hpp"

namespace fastmusic {

/// Approximate (or exact) signal subspace: an M x K orthonormal basis with the
/// matching eigenvalue estimates, tagged with the producing method and the
/// wall-clock cost of the subspace computation alone.
struct SubspaceEstimate {
    CxMat basis;          // M x K, orthonormal columns
    RealVec eigenvalues;  // K values, descending, clamped at 0
    Method method = Method::Exact;
    double cost_seconds = 0.0;
};

struct Fast1Params {
    Index p = 0;  // oversampling width, K <= p <= M
    std::uint64_t seed = 0;
};

struct Fast2Params {
    Index p = 0;        // sketch width, K <= p <= M
    int iterations = 1;  // t, projection refinement count, 1..20
    std::uint64_t seed = 0;
};

/// Top-K eigenpairs from the full spectral decomposition of S.
SubspaceEstimate exact_signal_subspace(const HermitianMatrix& s, Index k);

/// Randomized subspace via uniform column sampling (Nystrom form):
/// draw p column indices I without replacement, C = S(:, I),
/// W = pinv(S(I, I)), then recover the leading K components of C W C^H
/// through two small SVDs. Cost O(p^2 M).
SubspaceEstimate fast_music_1(const HermitianMatrix& s, Index k, const Fast1Params& params);

/// Randomized subspace via iterated random projection: C = S * Gaussian(M, p),
/// then t rounds of V = orth(C), C = S V; W = pinv(V^H S V); same
/// rank-restricted recovery as fast_music_1. A rank-deficient sketch triggers
/// a sub-seeded redraw (at most 3 retries).
SubspaceEstimate fast_music_2(const HermitianMatrix& s, Index k, const Fast2Params& params);

/// Block Krylov iteration with full reorthogonalization, converged when the
/// top-K Ritz values change by no more than 1e-10 relative. Throws
/// NonConvergenceError carrying the last relative change if the cap is hit.
SubspaceEstimate block_lanczos_subspace(const HermitianMatrix& s, Index k, Index block,
                                        int max_iterations);

/// Approximate noise-subspace projector eps^2 * S^-1 for the matrix-inverse
/// baseline. The noise power eps^2 is estimated from the trace left over after
/// a short block-Krylov pass for the top-K Ritz values. Fails on numerically
/// singular S (the regime where this baseline is unstable).
struct NoiseProjector {
    CxMat projector;       // M x M, Hermitian
    double noise_power;    // estimated eps^2
    double cost_seconds = 0.0;
};
NoiseProjector matrix_inverse_noise_projector(const HermitianMatrix& s, Index k);

/// Propagator subspace: least-squares map P with Y2 ~= P^H Y1 between the
/// first K rows and the rest, basis = orth([I_K; P^H]). Cost O(MNK).
SubspaceEstimate propagator_subspace(const CxMat& y, Index k);

/// Zero-padded spatial DFT baseline: per-snapshot power spectra averaged over
/// the N columns, mapped onto the angle grid via sin(theta) = lambda * f / (d * nfft).
PseudoSpectrum fft_angle_spectrum(const CxMat& y, const AngleGrid& grid, double d, double lambda);

}  // namespace fastmusic
