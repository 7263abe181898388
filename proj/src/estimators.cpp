#include "fastmusic/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <unsupported/Eigen/FFT>

#include "fastmusic/linalg.hpp"
#include "fastmusic/scene.hpp"

namespace fastmusic {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

RealVec clamp_nonnegative(const RealVec& v) {
    RealVec out = v;
    for (Index i = 0; i < out.size(); ++i) {
        if (out(i) < 0.0 && out(i) >= -1e-10) out(i) = 0.0;
    }
    return out;
}

// Shared tail of both randomized methods: given the sketch C (M x p) and the
// weight W (p x p), recover the leading K components of C W C^H.
//   C = Uc Sc Vc^H;  B = Sc Vc^H W Vc Sc;  B = Ub Sb Vb^H;
//   basis = (Uc Ub)(:, 1:K), eigenvalues = Sb(1:K).
SubspaceEstimate rank_restricted_subspace(const CxMat& c, const CxMat& w, Index k,
                                          Method method) {
    const SvdResult svd_c = thin_svd(c);
    const CxMat projected =
        svd_c.sigma.asDiagonal() * (svd_c.v.adjoint() * w * svd_c.v) *
        svd_c.sigma.asDiagonal();
    const SvdResult svd_b = thin_svd(projected);
    const CxMat u = svd_c.u * svd_b.u;
    SubspaceEstimate out;
    out.basis = u.leftCols(k);
    out.eigenvalues = clamp_nonnegative(svd_b.sigma.head(k));
    out.method = method;
    return out;
}

CxMat gather_columns(const CxMat& s, const std::vector<Index>& idx) {
    CxMat c(s.rows(), static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        c.col(static_cast<Index>(j)) = s.col(idx[j]);
    }
    return c;
}

CxMat gather_block(const CxMat& s, const std::vector<Index>& idx) {
    const Index p = static_cast<Index>(idx.size());
    CxMat b(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            b(i, j) = s(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
    }
    return b;
}

}  // namespace

SubspaceEstimate exact_signal_subspace(const HermitianMatrix& s, Index k) {
    if (k < 1 || k >= s.dim()) {
        throw std::invalid_argument("exact_signal_subspace: need 1 <= K < M");
    }
    const auto start = Clock::now();
    const EigResult eig = hermitian_eig(s);
    SubspaceEstimate out;
    out.basis = eig.eigenvectors.leftCols(k);
    out.eigenvalues = clamp_nonnegative(eig.eigenvalues.head(k));
    out.method = Method::Exact;
    out.cost_seconds = seconds_since(start);
    return out;
}

SubspaceEstimate fast_music_1(const HermitianMatrix& s, Index k, const Fast1Params& params) {
    const Index m = s.dim();
    if (k < 1 || k >= m) throw std::invalid_argument("fast_music_1: need 1 <= K < M");
    if (params.p < k || params.p > m) {
        throw std::invalid_argument("fast_music_1: need K <= p <= M");
    }
    const auto start = Clock::now();
    Rng rng(params.seed);
    const std::vector<Index> idx = rng.sample_without_replacement(m, params.p);
    const CxMat c = gather_columns(s.mat(), idx);
    // pinv never aborts here: a singular S(I, I) just truncates.
    const CxMat w = pseudo_inverse(gather_block(s.mat(), idx));
    SubspaceEstimate out = rank_restricted_subspace(c, w, k, Method::Fast1);
    out.cost_seconds = seconds_since(start);
    return out;
}

SubspaceEstimate fast_music_2(const HermitianMatrix& s, Index k, const Fast2Params& params) {
    const Index m = s.dim();
    if (k < 1 || k >= m) throw std::invalid_argument("fast_music_2: need 1 <= K < M");
    if (params.p < k || params.p > m) {
        throw std::invalid_argument("fast_music_2: need K <= p <= M");
    }
    if (params.iterations < 1 || params.iterations > 20) {
        throw std::invalid_argument("fast_music_2: need 1 <= t <= 20");
    }
    const auto start = Clock::now();
    const int max_attempts = 4;  // initial draw + 3 sub-seeded retries
    for (int attempt = 0;; ++attempt) {
        const std::uint64_t draw_seed =
            attempt == 0 ? params.seed
                         : Rng::derive(params.seed, 0xF257u + static_cast<std::uint64_t>(attempt));
        try {
            // The projection matrix is real, so the first sketch splits into
            // two real GEMMs at half the complex-product cost.
            const Eigen::MatrixXd pi = gaussian_matrix_real(m, params.p, draw_seed);
            CxMat c(m, params.p);
            c.real() = s.mat().real() * pi;
            c.imag() = s.mat().imag() * pi;
            CxMat v;
            for (int it = 0; it < params.iterations; ++it) {
                v = qr_orthonormal(c);
                c.noalias() = s.mat() * v;
            }
            const CxMat w = pseudo_inverse(v.adjoint() * c);  // V^H S V since C = S V
            SubspaceEstimate out = rank_restricted_subspace(c, w, k, Method::Fast2);
            out.cost_seconds = seconds_since(start);
            return out;
        } catch (const RankDeficiencyError&) {
            if (attempt + 1 >= max_attempts) throw;
        }
    }
}

namespace {

// Orthonormal basis of range(z) at the pivoted-QR numerical rank; may have
// fewer columns than z, or none.
CxMat orthonormal_range(const CxMat& z) {
    Eigen::ColPivHouseholderQR<CxMat> qr(z);
    const Index rank = qr.rank();
    if (rank == 0) return CxMat(z.rows(), 0);
    return qr.householderQ() * CxMat::Identity(z.rows(), rank);
}

}  // namespace

SubspaceEstimate block_lanczos_subspace(const HermitianMatrix& s, Index k, Index block,
                                        int max_iterations) {
    const Index m = s.dim();
    if (k < 1 || k >= m) throw std::invalid_argument("block_lanczos_subspace: need 1 <= K < M");
    if (block < k) throw std::invalid_argument("block_lanczos_subspace: need block >= K");
    if (max_iterations < 1) throw std::invalid_argument("block_lanczos_subspace: iters >= 1");
    constexpr double kTol = 1e-10;
    constexpr std::uint64_t kStartSeed = 0x6C616E637A6FULL;  // fixed: keeps the op deterministic

    const auto start = Clock::now();
    CxMat q = qr_orthonormal(gaussian_matrix(m, std::min(block, m), kStartSeed));
    CxMat basis = q;
    CxMat h(0, 0);  // basis^H S basis, grown block by block
    RealVec prev_vals;
    double last_change = std::numeric_limits<double>::infinity();
    int stable_checks = 0;  // tolerance must hold on consecutive checks

    for (int iter = 0; iter < max_iterations; ++iter) {
        const CxMat w = s.mat() * q;

        // Extend the projected matrix with the new strip.
        const Index old_cols = h.cols();
        const Index new_cols = w.cols();
        const CxMat strip = basis.adjoint() * w;  // (old+new) x new
        h.conservativeResize(old_cols + new_cols, old_cols + new_cols);
        h.rightCols(new_cols).topRows(old_cols) = strip.topRows(old_cols);
        h.bottomRows(new_cols).leftCols(old_cols) = strip.topRows(old_cols).adjoint();
        h.bottomRightCorner(new_cols, new_cols) = strip.bottomRows(new_cols);

        const EigResult ritz = hermitian_eig(HermitianMatrix(h));
        const RealVec vals = ritz.eigenvalues.head(std::min(k, h.rows()));

        auto ritz_estimate = [&] {
            SubspaceEstimate out;
            out.basis = basis * ritz.eigenvectors.leftCols(k);
            out.eigenvalues = clamp_nonnegative(vals);
            out.method = Method::Lanczos;
            out.cost_seconds = seconds_since(start);
            return out;
        };

        if (prev_vals.size() == vals.size() && vals.size() == k) {
            double change = 0.0;
            for (Index i = 0; i < k; ++i) {
                const double denom = std::max(std::abs(vals(i)), 1e-300);
                change = std::max(change, std::abs(vals(i) - prev_vals(i)) / denom);
            }
            last_change = change;
            stable_checks = change <= kTol ? stable_checks + 1 : 0;
            if (stable_checks >= 2) return ritz_estimate();
        }
        prev_vals = vals;

        // Expand: the new block is S q reorthogonalized against everything,
        // shrunk to its numerical rank. An empty expansion (or a basis that
        // already fills the space) means the Krylov space is invariant, where
        // the Ritz pairs are exact.
        const Index room = m - basis.cols();
        if (room <= 0) return ritz_estimate();
        CxMat z = w - basis * (basis.adjoint() * w);
        z -= basis * (basis.adjoint() * z);
        q = orthonormal_range(z.leftCols(std::min(z.cols(), room)));
        if (q.cols() == 0) return ritz_estimate();
        basis.conservativeResize(Eigen::NoChange, basis.cols() + q.cols());
        basis.rightCols(q.cols()) = q;
    }
    throw NonConvergenceError("block_lanczos_subspace: no convergence within iteration cap",
                              last_change);
}

NoiseProjector matrix_inverse_noise_projector(const HermitianMatrix& s, Index k) {
    const Index m = s.dim();
    if (k < 1 || k >= m) {
        throw std::invalid_argument("matrix_inverse_noise_projector: need 1 <= K < M");
    }
    const auto start = Clock::now();

    Eigen::LDLT<CxMat> ldlt(s.mat());
    if (ldlt.info() != Eigen::Success) {
        throw SingularMatrixError("matrix_inverse_noise_projector: factorization failed");
    }
    const RealVec d = ldlt.vectorD().real();
    if (d.minCoeff() <= 1e-12 * d.maxCoeff()) {
        throw SingularMatrixError("matrix_inverse_noise_projector: S numerically singular");
    }

    // Short Krylov pass for the leading Ritz values; only the trace remainder matters.
    double top_sum = 0.0;
    {
        CxMat q = qr_orthonormal(gaussian_matrix(m, std::min(k, m - 1), 0x696E76ULL));
        for (int it = 0; it < 3; ++it) {
            q = qr_orthonormal(s.mat() * q);
        }
        const CxMat small = q.adjoint() * (s.mat() * q);
        const EigResult ritz = hermitian_eig(HermitianMatrix(small));
        top_sum = ritz.eigenvalues.head(k).sum();
    }
    const double trace = s.mat().trace().real();
    const double eps2 = std::max(trace - top_sum, 0.0) / static_cast<double>(m - k);

    CxMat inv = ldlt.solve(CxMat::Identity(m, m));
    NoiseProjector out;
    out.projector = 0.5 * eps2 * (inv + inv.adjoint());
    out.noise_power = eps2;
    out.cost_seconds = seconds_since(start);
    return out;
}

SubspaceEstimate propagator_subspace(const CxMat& y, Index k) {
    ensure_finite(y, "propagator_subspace");
    const Index m = y.rows();
    if (k < 1 || k >= m) throw std::invalid_argument("propagator_subspace: need 1 <= K < M");
    const auto start = Clock::now();

    const CxMat y1 = y.topRows(k);
    const CxMat y2 = y.bottomRows(m - k);
    const CxMat gram = y1 * y1.adjoint();  // K x K
    {
        const SvdResult check = thin_svd(y1);
        const double s1 = check.sigma(0);
        Index rank = 0;
        while (rank < k && check.sigma(rank) > 1e-12 * s1) ++rank;
        if (s1 == 0.0 || rank < k) {
            throw RankDeficiencyError("propagator_subspace: leading rows are rank deficient",
                                      rank);
        }
    }
    const CxMat p_h = (y2 * y1.adjoint()) * pseudo_inverse(gram);  // (M-K) x K

    CxMat stacked(m, k);
    stacked.topRows(k) = CxMat::Identity(k, k);
    stacked.bottomRows(m - k) = p_h;
    SubspaceEstimate out;
    out.basis = qr_orthonormal(stacked);
    out.eigenvalues = RealVec::Zero(k);  // the propagator carries no eigenvalue estimates
    out.method = Method::Propagator;
    out.cost_seconds = seconds_since(start);
    return out;
}

PseudoSpectrum fft_angle_spectrum(const CxMat& y, const AngleGrid& grid, double d,
                                  double lambda) {
    ensure_finite(y, "fft_angle_spectrum");
    const Index m = y.rows();
    const Index n = y.cols();
    if (grid.size() < m) {
        throw std::invalid_argument("fft_angle_spectrum: need grid size L >= M");
    }
    Index nfft = 1;
    while (nfft < std::max(grid.size(), m)) nfft <<= 1;

    Eigen::FFT<double> fft;
    RealVec accum = RealVec::Zero(nfft);
    std::vector<Complex> padded(static_cast<std::size_t>(nfft));
    std::vector<Complex> out(static_cast<std::size_t>(nfft));
    for (Index col = 0; col < n; ++col) {
        std::fill(padded.begin(), padded.end(), Complex(0.0, 0.0));
        for (Index i = 0; i < m; ++i) padded[static_cast<std::size_t>(i)] = y(i, col);
        fft.fwd(out, padded);
        for (Index f = 0; f < nfft; ++f) {
            accum(f) += std::norm(out[static_cast<std::size_t>(f)]);
        }
    }
    accum /= static_cast<double>(n);

    PseudoSpectrum spec{grid, RealVec(grid.size()), Method::Fft, false};
    for (Index l = 0; l < grid.size(); ++l) {
        const double pos = d * std::sin(grid.theta(l)) / lambda * static_cast<double>(nfft);
        Index bin = static_cast<Index>(std::llround(pos)) % nfft;
        if (bin < 0) bin += nfft;
        spec.values(l) = accum(bin);
    }
    return spec;
}

}  // namespace fastmusic
