#include "fastmusic/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace fastmusic {

const char* method_name(Method m) {
    switch (m) {
        case Method::Exact: return "exact";
        case Method::Fast1: return "fast1";
        case Method::Fast2: return "fast2";
        case Method::Lanczos: return "lanczos";
        case Method::MatrixInverse: return "matrix_inverse";
        case Method::Propagator: return "propagator";
        case Method::Fft: return "fft";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    for (Method m : {Method::Exact, Method::Fast1, Method::Fast2, Method::Lanczos,
                     Method::MatrixInverse, Method::Propagator, Method::Fft}) {
        if (name == method_name(m)) return m;
    }
    throw std::invalid_argument("unknown method name: " + name);
}

bool is_finite(const CxMat& a) {
    return a.allFinite();
}

void ensure_finite(const CxMat& a, const char* what) {
    if (!a.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
    }
}

HermitianMatrix::HermitianMatrix(const CxMat& a) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw std::invalid_argument("HermitianMatrix: input must be square and non-empty");
    }
    ensure_finite(a, "HermitianMatrix");
    m_ = 0.5 * (a + a.adjoint());
}

std::vector<Index> Rng::sample_without_replacement(Index m, Index p) {
    if (p < 1 || p > m) {
        throw std::invalid_argument("sample_without_replacement: need 1 <= p <= m");
    }
    // Partial Fisher-Yates over [0, m).
    std::vector<Index> pool(static_cast<std::size_t>(m));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < p; ++i) {
        const Index j = i + static_cast<Index>(below(static_cast<std::uint64_t>(m - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(p));
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed ^ (tag * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

EigResult hermitian_eig(const HermitianMatrix& s) {
    Eigen::SelfAdjointEigenSolver<CxMat> solver(s.mat());
    if (solver.info() != Eigen::Success) {
        const CxMat r = s.mat() * solver.eigenvectors() -
                        solver.eigenvectors() * solver.eigenvalues().asDiagonal();
        const double residual = r.norm() / std::max(s.mat().norm(), 1e-300);
        throw NonConvergenceError("hermitian_eig: eigensolver did not converge", residual);
    }
    EigResult out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

namespace {

SvdResult svd_dense(const CxMat& a) {
    if (std::min(a.rows(), a.cols()) <= 32) {
        Eigen::JacobiSVD<CxMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        return SvdResult{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    }
    Eigen::BDCSVD<CxMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw NonConvergenceError("thin_svd: SVD did not converge",
                                  std::numeric_limits<double>::quiet_NaN());
    }
    return SvdResult{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace

SvdResult thin_svd(const CxMat& a) {
    ensure_finite(a, "thin_svd");
    const Index m = a.rows();
    const Index n = a.cols();
    if (m >= 2 * n) {
        // Tall: factor A = QR first, then decompose the small triangle.
        Eigen::HouseholderQR<CxMat> qr(a);
        const CxMat r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        SvdResult inner = svd_dense(r);
        const CxMat q = qr.householderQ() * CxMat::Identity(m, n);
        return SvdResult{q * inner.u, std::move(inner.sigma), std::move(inner.v)};
    }
    if (n >= 2 * m) {
        SvdResult t = thin_svd(CxMat(a.adjoint()));
        return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
    }
    return svd_dense(a);
}

CxMat qr_orthonormal(const CxMat& a) {
    ensure_finite(a, "qr_orthonormal");
    if (a.cols() < 1 || a.rows() < a.cols()) {
        throw std::invalid_argument("qr_orthonormal: need rows >= cols >= 1");
    }
    Eigen::ColPivHouseholderQR<CxMat> qr(a);
    if (qr.rank() < a.cols()) {
        const Index deficient = qr.colsPermutation().indices()(qr.rank());
        std::ostringstream msg;
        msg << "qr_orthonormal: rank " << qr.rank() << " < " << a.cols()
            << " columns; column " << deficient << " is dependent";
        throw RankDeficiencyError(msg.str(), deficient);
    }
    return qr.householderQ() * CxMat::Identity(a.rows(), a.cols());
}

CxMat pseudo_inverse(const CxMat& a, double rel_tol) {
    ensure_finite(a, "pseudo_inverse");
    if (rel_tol < 0.0 || rel_tol >= 1.0) {
        throw std::invalid_argument("pseudo_inverse: rel_tol must be in [0, 1)");
    }
    if (rel_tol == 0.0) {
        rel_tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                  std::numeric_limits<double>::epsilon();
    }
    const SvdResult svd = thin_svd(a);
    const double sigma1 = svd.sigma.size() > 0 ? svd.sigma(0) : 0.0;
    if (sigma1 == 0.0) {
        return CxMat::Zero(a.cols(), a.rows());  // documented all-zero convention
    }
    const double cutoff = rel_tol * sigma1;
    RealVec inv = RealVec::Zero(svd.sigma.size());
    for (Index i = 0; i < svd.sigma.size(); ++i) {
        if (svd.sigma(i) > cutoff) inv(i) = 1.0 / svd.sigma(i);
    }
    return svd.v * inv.asDiagonal() * svd.u.adjoint();
}

SamplingMatrix uniform_sampling_matrix(Index m, Index p, std::uint64_t seed) {
    if (m < 1 || p < 1 || p > m) {
        throw std::invalid_argument("uniform_sampling_matrix: need 1 <= p <= M");
    }
    Rng rng(seed);
    SamplingMatrix out;
    out.indices = rng.sample_without_replacement(m, p);
    out.pi = CxMat::Zero(m, p);
    const double scale = std::sqrt(static_cast<double>(m) / static_cast<double>(p));
    for (Index c = 0; c < p; ++c) {
        out.pi(out.indices[static_cast<std::size_t>(c)], c) = Complex(scale, 0.0);
    }
    return out;
}

Eigen::MatrixXd gaussian_matrix_real(Index m, Index p, std::uint64_t seed) {
    if (m < 1 || p < 1) {
        throw std::invalid_argument("gaussian_matrix: need M, p >= 1");
    }
    Rng rng(seed);
    Eigen::MatrixXd out(m, p);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < p; ++j) {
            out(i, j) = rng.normal();
        }
    }
    return out;
}

CxMat gaussian_matrix(Index m, Index p, std::uint64_t seed) {
    return gaussian_matrix_real(m, p, seed).cast<Complex>();
}

double coherence(const CxMat& basis) {
    ensure_finite(basis, "coherence");
    const Index m = basis.rows();
    const Index k = basis.cols();
    if (k < 1 || m < k) {
        throw std::invalid_argument("coherence: need rows >= cols >= 1");
    }
    const CxMat gram = basis.adjoint() * basis;
    const double dev = (gram - CxMat::Identity(k, k)).cwiseAbs().maxCoeff();
    if (dev > 1e-8) {
        throw std::invalid_argument("coherence: basis columns are not orthonormal");
    }
    double max_row = 0.0;
    for (Index i = 0; i < m; ++i) {
        max_row = std::max(max_row, basis.row(i).squaredNorm());
    }
    return static_cast<double>(m) / static_cast<double>(k) * max_row;
}

}  // namespace fastmusic
