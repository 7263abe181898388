#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fastmusic {

using Complex = std::complex<double>;
using CxMat = Eigen::MatrixXcd;
using CxVec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Iterative factorization failed to reach its tolerance; carries the last residual.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// A matrix expected to have full column rank does not; carries the offending column.
class RankDeficiencyError : public std::runtime_error {
public:
    RankDeficiencyError(const std::string& what, Index column)
        : std::runtime_error(what), column_(column) {}
    Index column() const { return column_; }

private:
    Index column_;
};

/// Numerically singular input where an inverse is required.
class SingularMatrixError : public std::runtime_error {
public:
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Subspace / spectrum estimator identity, carried through results and output files.
enum class Method {
    Exact,
    Fast1,
    Fast2,
    Lanczos,
    MatrixInverse,
    Propagator,
    Fft,
};

const char* method_name(Method m);
Method method_from_name(const std::string& name);

bool is_finite(const CxMat& a);

/// Throws std::invalid_argument naming `what` if any entry is NaN/Inf.
void ensure_finite(const CxMat& a, const char* what);

/// Square complex matrix kept Hermitian by symmetrizing on construction.
/// Sample covariances are built through this type so downstream eigensolvers
/// can rely on exact Hermitian symmetry.
class HermitianMatrix {
public:
    explicit HermitianMatrix(const CxMat& a);

    Index dim() const { return m_.rows(); }
    const CxMat& mat() const { return m_; }

private:
    CxMat m_;
};

/// Full spectral decomposition of a Hermitian matrix.
/// Eigenvalues sorted descending, column i of `eigenvectors` pairs with eigenvalue i.
struct EigResult {
    RealVec eigenvalues;
    CxMat eigenvectors;
};

/// Thin SVD, singular values descending.
struct SvdResult {
    CxMat u;
    RealVec sigma;
    CxMat v;
};

}  // namespace fastmusic
