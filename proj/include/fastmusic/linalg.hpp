#pragma once

#include <cstdint>
#include <vector>

#include "fastmusic/rng.hpp"
#include "fastmusic/types.hpp"

namespace fastmusic {

/// Full spectral decomposition of a Hermitian matrix, eigenvalues descending.
/// Throws NonConvergenceError (with the reconstruction residual) if the solver fails.
EigResult hermitian_eig(const HermitianMatrix& s);

/// Thin SVD with min(rows, cols) columns, singular values descending.
SvdResult thin_svd(const CxMat& a);

/// Orthonormal basis Q of range(A) via column-pivoted Householder QR.
/// Throws RankDeficiencyError naming the deficient column when A loses column rank.
CxMat qr_orthonormal(const CxMat& a);

/// Moore-Penrose pseudo-inverse. Singular values below rel_tol * sigma_1 are
/// dropped; rel_tol = 0 selects max(rows, cols) * machine epsilon. An all-zero
/// input returns the zero matrix of transposed shape.
CxMat pseudo_inverse(const CxMat& a, double rel_tol = 0.0);

/// Uniform sampling matrix: each of the p columns has a single entry
/// sqrt(M/p) on a distinct row, rows drawn uniformly without replacement.
struct SamplingMatrix {
    CxMat pi;                    // M x p
    std::vector<Index> indices;  // sorted sampled row indices, |I| = p
};
SamplingMatrix uniform_sampling_matrix(Index m, Index p, std::uint64_t seed);

/// M x p matrix with i.i.d. real N(0,1) entries stored as complex
/// (zero imaginary part), filled row-major from the seeded stream.
CxMat gaussian_matrix(Index m, Index p, std::uint64_t seed);

/// Same entries and stream as gaussian_matrix, kept in real storage so a
/// complex-times-Gaussian product can run as two real GEMMs.
Eigen::MatrixXd gaussian_matrix_real(Index m, Index p, std::uint64_t seed);

/// Row coherence mu(U) = (M/K) * max_i ||row_i||^2 of an orthonormal M x K basis.
/// Requires U^H U = I to 1e-8; the value lies in [1, M/K].
double coherence(const CxMat& basis);

}  // namespace fastmusic
