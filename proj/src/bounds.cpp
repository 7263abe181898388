#include "fastmusic/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fastmusic/linalg.hpp"

namespace fastmusic {

double spectral_gap(const HermitianMatrix& s, Index k) {
    if (k < 1 || k + 1 > s.dim()) {
        throw std::invalid_argument("spectral_gap: need 1 <= K, K + 1 <= M");
    }
    const EigResult eig = hermitian_eig(s);
    const double sk = eig.eigenvalues(k - 1);
    const double sk1 = eig.eigenvalues(k);
    if (sk <= 1e-14 * std::max(eig.eigenvalues(0), 0.0) || sk <= 0.0) {
        throw std::invalid_argument("spectral_gap: sigma_K is numerically zero");
    }
    return std::max(sk1, 0.0) / sk;
}

Theorem1Bound theorem1_bound(const BoundInputs& in) {
    if (in.p < 1) throw std::invalid_argument("theorem1_bound: p >= 1 required");
    Theorem1Bound out;
    const double m = static_cast<double>(in.m);
    out.kappa = 1.0 + 2.0 * std::sqrt(m * m / static_cast<double>(in.p)) * in.gap;
    out.required_p = 4.5 * in.coherence * static_cast<double>(in.k) *
                     std::log(static_cast<double>(in.k) / in.delta);
    out.sampling_condition_met = static_cast<double>(in.p) >= out.required_p;
    return out;
}

namespace {

double projection_error_term(const BoundInputs& in) {
    if (in.t < 0) throw std::invalid_argument("projection bound: t >= 0 required");
    if (!(in.delta > 0.0 && in.delta < 1.0)) {
        throw std::invalid_argument("projection bound: delta in (0, 1) required");
    }
    const double m = static_cast<double>(in.m);
    const double k = static_cast<double>(in.k);
    return std::sqrt(m * m * k) / in.delta * std::pow(in.gap, in.t + 1);
}

}  // namespace

double theorem2_bound(const BoundInputs& in) {
    return 1.0 + projection_error_term(in);
}

Theorem3Bound theorem3_bound(const BoundInputs& in) {
    const double raw = 1.0 - projection_error_term(in);
    Theorem3Bound out;
    out.vacuous = raw < 0.0;
    out.lower_constant = std::max(raw, 0.0);
    return out;
}

const char* bound_kind_name(BoundKind kind) {
    switch (kind) {
        case BoundKind::Thm1Lower: return "thm1_lower";
        case BoundKind::Thm2Lower: return "thm2_lower";
        case BoundKind::Thm3Upper: return "thm3_upper";
    }
    return "unknown";
}

BoundReport verify_bound(const PseudoSpectrum& exact, const PseudoSpectrum& approx,
                         double bound, BoundKind kind) {
    if (!(exact.grid == approx.grid)) {
        throw std::invalid_argument("verify_bound: grids differ");
    }
    BoundReport report;
    report.kind = kind;
    report.bound = bound;
    report.n_points = exact.values.size();
    report.ratios.reserve(static_cast<std::size_t>(report.n_points));
    for (Index l = 0; l < exact.values.size(); ++l) {
        const double ratio = std::sqrt(exact.values(l) / approx.values(l));
        report.ratios.push_back(ratio);
        if (kind == BoundKind::Thm3Upper) {
            if (ratio < bound) {
                ++report.n_violations;
                report.max_excess = std::max(report.max_excess, bound - ratio);
            }
        } else {
            if (ratio > bound) {
                ++report.n_violations;
                report.max_excess = std::max(report.max_excess, ratio - bound);
            }
        }
    }
    return report;
}

std::string bound_report_json(const BoundReport& report) {
    nlohmann::json j;
    j["kind"] = bound_kind_name(report.kind);
    j["kappa"] = report.bound;
    j["n_points"] = report.n_points;
    j["n_violations"] = report.n_violations;
    j["max_excess"] = report.max_excess;

    constexpr int kBins = 40;
    double lo = 0.0;
    double hi = 1.0;
    if (!report.ratios.empty()) {
        const auto [mn, mx] = std::minmax_element(report.ratios.begin(), report.ratios.end());
        lo = *mn;
        hi = std::max(*mx, lo + 1e-12);
    }
    std::vector<Index> counts(kBins, 0);
    std::vector<double> edges(kBins + 1);
    for (int b = 0; b <= kBins; ++b) {
        edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / kBins;
    }
    for (double r : report.ratios) {
        int b = static_cast<int>((r - lo) / (hi - lo) * kBins);
        b = std::clamp(b, 0, kBins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    j["ratio_histogram"] = {{"edges", edges}, {"counts", counts}};
    return j.dump();
}

DetectionReport detection_consistency_check(const PseudoSpectrum& exact,
                                            const PseudoSpectrum& approx, const PeakSet& peaks,
                                            double kappa_l, Index min_separation_cells) {
    if (!(exact.grid == approx.grid)) {
        throw std::invalid_argument("detection_consistency_check: grids differ");
    }
    DetectionReport report;
    report.kappa_l = kappa_l;

    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < peaks.angles.size(); ++i) {
        min_ratio = std::min(min_ratio, peaks.heights[i] / std::max(peaks.baseline, 1e-300));
    }
    report.gamma_hat = peaks.angles.empty() ? 0.0 : min_ratio;
    report.no_miss_condition = kappa_l < std::sqrt(std::max(report.gamma_hat, 0.0));

    const RealVec& v = approx.values;
    const Index last = approx.grid.size() - 1;
    report.all_retained = true;
    for (double angle : peaks.angles) {
        const Index center = approx.grid.nearest(angle);
        bool retained = false;
        const Index lo = std::max(Index{1}, center - min_separation_cells);
        const Index hi = std::min(last - 1, center + min_separation_cells);
        for (Index l = lo; l <= hi && !retained; ++l) {
            if (v(l) >= v(l - 1) && v(l) >= v(l + 1) && (v(l) > v(l - 1) || v(l) > v(l + 1))) {
                retained = true;
            }
        }
        report.retained.push_back(retained);
        report.all_retained = report.all_retained && retained;
    }
    return report;
}

bool LemmaReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const LemmaCheck& c) { return c.pass; });
}

namespace {

// Spectral norm squared of a sampling matrix, computed structurally: columns
// have pairwise disjoint single-entry supports, so the Gram matrix is exactly
// diagonal and the norm is the largest column norm.
double sampling_norm_sq(const SamplingMatrix& s) {
    const CxMat gram = s.pi.adjoint() * s.pi;
    double max_diag = 0.0;
    for (Index i = 0; i < gram.rows(); ++i) {
        for (Index j = 0; j < gram.cols(); ++j) {
            if (i != j && gram(i, j) != Complex(0.0, 0.0)) {
                throw std::logic_error("sampling matrix supports overlap");
            }
        }
        max_diag = std::max(max_diag, gram(i, i).real());
    }
    return max_diag;
}

LemmaCheck check_sampling_norm(std::uint64_t seed) {
    // (M, p) pairs whose ratio is a perfect square, so sqrt(M/p)^2 is exact in
    // floating point and the equality below is bit-for-bit.
    const std::vector<std::pair<Index, Index>> sweep = {
        {16, 16}, {36, 9}, {64, 16}, {90, 10}, {100, 4},
        {128, 2}, {144, 16}, {160, 10}, {200, 8}, {250, 10}};
    LemmaCheck check;
    check.name = "lemma1_sampling_norm";
    check.pass = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const auto [m, p] = sweep[i];
        const SamplingMatrix s =
            uniform_sampling_matrix(m, p, Rng::derive(seed, 100 + static_cast<std::uint64_t>(i)));
        const double target = static_cast<double>(m) / static_cast<double>(p);
        const double got = sampling_norm_sq(s);
        worst = std::max(worst, std::abs(got - target));
        if (got != target) check.pass = false;
    }
    check.observed = worst;
    check.required = 0.0;
    check.detail = "||Pi||_2^2 == M/p exactly over a 10-point (M, p) sweep";
    return check;
}

LemmaCheck check_sampled_subspace(std::uint64_t seed) {
    // Flat (coherence-1) basis: K distinct DFT columns of an M-point Fourier
    // matrix; p sits at the lemma threshold for eta = 0.75, delta = 0.1.
    const Index m = 200;
    const Index k = 5;
    const double eta = 0.75;
    const double delta = 0.1;
    const double mu = 1.0;
    const Index p = static_cast<Index>(std::ceil(
        (6.0 + 2.0 * eta) / (3.0 * eta * eta) * mu * static_cast<double>(k) *
        std::log(static_cast<double>(k) / delta)));
    const int trials = 400;

    CxMat u(m, k);
    for (Index col = 0; col < k; ++col) {
        const double freq = static_cast<double>(col + 1);
        for (Index row = 0; row < m; ++row) {
            u(row, col) = std::polar(1.0 / std::sqrt(static_cast<double>(m)),
                                     2.0 * M_PI * freq * static_cast<double>(row) /
                                         static_cast<double>(m));
        }
    }

    int ok = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const SamplingMatrix s = uniform_sampling_matrix(
            m, p, Rng::derive(seed, 200 + static_cast<std::uint64_t>(trial)));
        const CxMat projected = u.adjoint() * s.pi;  // K x p
        const SvdResult svd = thin_svd(projected);
        const double smallest = svd.sigma(k - 1) * svd.sigma(k - 1);
        if (smallest >= 1.0 - eta) ++ok;
    }
    LemmaCheck check;
    check.name = "lemma2_sampled_subspace";
    check.observed = static_cast<double>(ok) / trials;
    check.required = 1.0 - delta;
    check.pass = check.observed >= check.required;
    std::ostringstream detail;
    detail << "sigma_K(U^H Pi Pi^H U) >= " << (1.0 - eta) << " at p = " << p << " of M = " << m;
    check.detail = detail.str();
    return check;
}

LemmaCheck check_gaussian_norm(std::uint64_t seed) {
    const Index m = 2000;
    const Index k = 50;
    const double c = 10.0;
    const int trials = 200;
    const double bound = std::sqrt(static_cast<double>(m)) + std::sqrt(static_cast<double>(k)) + c;

    int ok = 0;
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const CxMat g = gaussian_matrix(m, k, Rng::derive(seed, 300 + static_cast<std::uint64_t>(trial)));
        const CxMat gram = g.adjoint() * g;
        const EigResult eig = hermitian_eig(HermitianMatrix(gram));
        const double norm = std::sqrt(std::max(eig.eigenvalues(0), 0.0));
        worst = std::max(worst, norm);
        if (norm <= bound) ++ok;
    }
    LemmaCheck check;
    check.name = "lemma3_gaussian_norm";
    check.observed = static_cast<double>(ok) / trials;
    check.required = 0.99;
    check.pass = check.observed >= check.required;
    std::ostringstream detail;
    detail << "||G||_2 <= sqrt(M) + sqrt(K) + " << c << " (worst observed " << worst << " vs "
           << bound << ")";
    check.detail = detail.str();
    return check;
}

LemmaCheck check_gaussian_smallest_sv(std::uint64_t seed) {
    const Index k = 20;
    const double delta = 0.2;
    const int trials = 1000;
    const double threshold = delta / std::sqrt(static_cast<double>(k));

    int ok = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const CxMat g = gaussian_matrix(k, k, Rng::derive(seed, 400 + static_cast<std::uint64_t>(trial)));
        const SvdResult svd = thin_svd(g);
        if (svd.sigma(k - 1) >= threshold) ++ok;
    }
    LemmaCheck check;
    check.name = "lemma4_gaussian_smallest_sv";
    check.observed = static_cast<double>(ok) / trials;
    check.required = 1.0 - delta - 0.05;
    check.pass = check.observed >= check.required;
    std::ostringstream detail;
    detail << "sigma_K(G) >= delta / sqrt(K) = " << threshold << " over " << trials << " trials";
    check.detail = detail.str();
    return check;
}

}  // namespace

LemmaReport lemma_suite(std::uint64_t seed) {
    LemmaReport report;
    report.checks.push_back(check_sampling_norm(seed));
    report.checks.push_back(check_sampled_subspace(seed));
    report.checks.push_back(check_gaussian_norm(seed));
    report.checks.push_back(check_gaussian_smallest_sv(seed));
    return report;
}

}  // namespace fastmusic
