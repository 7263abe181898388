#include "fastmusic/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "fastmusic/estimators.hpp"
#include "fastmusic/scene.hpp"

namespace fastmusic {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

AngleGrid::AngleGrid(Index l) : l_(l) {
    if (l < 2) throw std::invalid_argument("AngleGrid: L >= 2 required");
}

double AngleGrid::spacing() const {
    return kPi / static_cast<double>(l_ - 1);
}

double AngleGrid::theta(Index i) const {
    return kPi * static_cast<double>(i) / static_cast<double>(l_ - 1);
}

Index AngleGrid::nearest(double theta) const {
    const Index i = static_cast<Index>(std::llround(theta / spacing()));
    return std::clamp(i, Index{0}, l_ - 1);
}

namespace {

PseudoSpectrum denominator_spectrum(const AngleGrid& grid, double d, double lambda, Method tag,
                                    const std::function<double(const CxVec&)>& denom, Index m) {
    PseudoSpectrum out{grid, RealVec(grid.size()), tag, false};
    const double floor = 1e-12 * static_cast<double>(m);
    for (Index l = 0; l < grid.size(); ++l) {
        const CxVec a = steering_vector(grid.theta(l), m, d, lambda);
        out.values(l) = 1.0 / std::max(denom(a), floor);
    }
    return out;
}

}  // namespace

PseudoSpectrum music_spectrum(const SubspaceEstimate& estimate, const AngleGrid& grid,
                              double d, double lambda) {
    const CxMat& u = estimate.basis;
    const Index m = u.rows();
    if (m < 1) throw std::invalid_argument("music_spectrum: empty basis");
    if (u.cols() > 0) {
        const double dev =
            (u.adjoint() * u - CxMat::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
        if (dev > 1e-6) {
            throw std::invalid_argument("music_spectrum: basis columns are not orthonormal");
        }
    }
    return denominator_spectrum(
        grid, d, lambda, estimate.method,
        [&u, m](const CxVec& a) {
            return static_cast<double>(m) - (u.adjoint() * a).squaredNorm();
        },
        m);
}

PseudoSpectrum projector_spectrum(const CxMat& noise_projector, const AngleGrid& grid,
                                  double d, double lambda, Method tag) {
    if (noise_projector.rows() != noise_projector.cols() || noise_projector.rows() < 1) {
        throw std::invalid_argument("projector_spectrum: projector must be square");
    }
    const Index m = noise_projector.rows();
    return denominator_spectrum(
        grid, d, lambda, tag,
        [&noise_projector](const CxVec& a) {
            return (a.adjoint() * noise_projector * a)(0).real();
        },
        m);
}

PseudoSpectrum normalize_spectrum(const PseudoSpectrum& p) {
    PseudoSpectrum out = p;
    const double lo = p.values.minCoeff();
    const double hi = p.values.maxCoeff();
    if (!(hi > lo)) {
        out.values.setZero();
        out.degenerate = true;
        return out;
    }
    out.values = (p.values.array() - lo) / (hi - lo);
    return out;
}

namespace {

struct Candidate {
    Index cell;
    double height;
};

// Strict local maxima; a plateau higher than both flanks yields its leftmost index.
std::vector<Candidate> local_maxima(const RealVec& v) {
    std::vector<Candidate> out;
    const Index n = v.size();
    Index l = 1;
    while (l + 1 < n) {
        if (v(l) > v(l - 1)) {
            Index r = l;
            while (r + 1 < n && v(r + 1) == v(l)) ++r;
            if (r + 1 < n && v(r + 1) < v(l)) {
                out.push_back({l, v(l)});
            }
            l = r + 1;
        } else {
            ++l;
        }
    }
    return out;
}

std::vector<Candidate> ranked_maxima(const PseudoSpectrum& p) {
    std::vector<Candidate> cands = local_maxima(p.values);
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.height != b.height) return a.height > b.height;
        return a.cell < b.cell;
    });
    return cands;
}

std::vector<Candidate> select_separated(const std::vector<Candidate>& ranked, Index k,
                                        Index min_sep) {
    std::vector<Candidate> selected;
    for (const Candidate& c : ranked) {
        if (static_cast<Index>(selected.size()) == k) break;
        bool clashes = false;
        for (const Candidate& s : selected) {
            if (std::abs(c.cell - s.cell) < min_sep) {
                clashes = true;
                break;
            }
        }
        if (!clashes) selected.push_back(c);
    }
    return selected;
}

double baseline_outside(const PseudoSpectrum& p, const std::vector<Candidate>& selected,
                        Index min_sep) {
    double p0 = 0.0;
    for (Index l = 0; l < p.values.size(); ++l) {
        bool near_peak = false;
        for (const Candidate& s : selected) {
            if (std::abs(l - s.cell) <= min_sep) {
                near_peak = true;
                break;
            }
        }
        if (!near_peak) p0 = std::max(p0, p.values(l));
    }
    return p0;
}

PeakSet to_peak_set(const PseudoSpectrum& p, std::vector<Candidate> selected, Index k,
                    double baseline) {
    PeakSet out;
    out.shortfall = static_cast<Index>(selected.size()) < k;
    out.baseline = baseline;
    std::sort(selected.begin(), selected.end(),
              [](const Candidate& a, const Candidate& b) { return a.cell < b.cell; });
    for (const Candidate& c : selected) {
        out.angles.push_back(p.grid.theta(c.cell));
        out.heights.push_back(c.height);
    }
    return out;
}

}  // namespace

PeakSet extract_peaks(const PseudoSpectrum& p, Index k, Index min_separation_cells) {
    if (k < 1) throw std::invalid_argument("extract_peaks: K >= 1 required");
    const std::vector<Candidate> ranked = ranked_maxima(p);
    std::vector<Candidate> selected = select_separated(ranked, k, min_separation_cells);
    const double p0 = baseline_outside(p, selected, min_separation_cells);
    return to_peak_set(p, std::move(selected), k, p0);
}

PeakSet extract_target_peaks(const PseudoSpectrum& p, Index k, Index min_separation_cells) {
    if (k < 1) throw std::invalid_argument("extract_target_peaks: K >= 1 required");
    const std::vector<Candidate> ranked = ranked_maxima(p);
    // Raw pass keeps both mirror images so the baseline excludes them.
    std::vector<Candidate> raw = select_separated(ranked, 2 * k, min_separation_cells);
    const double p0 = baseline_outside(p, raw, min_separation_cells);

    const Index last = p.grid.size() - 1;
    std::vector<Candidate> folded;
    for (const Candidate& c : raw) {  // raw is still ordered by descending height
        const Index cell = std::min(c.cell, last - c.cell);
        bool duplicate = false;
        for (const Candidate& f : folded) {
            if (std::abs(cell - f.cell) < min_separation_cells) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) folded.push_back({cell, c.height});
        if (static_cast<Index>(folded.size()) == k) break;
    }
    return to_peak_set(p, std::move(folded), k, p0);
}

double aoa_mse(std::vector<double> truth, std::vector<double> estimates) {
    if (truth.size() != estimates.size()) {
        throw std::invalid_argument("aoa_mse: lists must have equal length");
    }
    std::sort(truth.begin(), truth.end());
    std::sort(estimates.begin(), estimates.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - estimates[i];
        sum += d * d;
    }
    return sum;
}

double aoa_mse_penalized(const std::vector<double>& truth, const PeakSet& estimate) {
    const double miss_penalty = (kPi / 2.0) * (kPi / 2.0);
    std::vector<double> t = truth;
    std::vector<double> e = estimate.angles;
    std::sort(t.begin(), t.end());
    std::sort(e.begin(), e.end());
    const std::size_t nt = t.size();
    const std::size_t ne = e.size();
    if (ne > nt) throw std::invalid_argument("aoa_mse_penalized: more estimates than truths");
    if (ne == nt) return aoa_mse(t, e);

    // Order-preserving assignment: each estimate matches one truth, unmatched
    // truths cost the miss penalty.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> f(nt + 1, std::vector<double>(ne + 1, inf));
    f[0][0] = 0.0;
    for (std::size_t i = 1; i <= nt; ++i) {
        for (std::size_t j = 0; j <= std::min(i, ne); ++j) {
            double best = f[i - 1][j] + miss_penalty;
            if (j > 0 && f[i - 1][j - 1] < inf) {
                const double d = t[i - 1] - e[j - 1];
                best = std::min(best, f[i - 1][j - 1] + d * d);
            }
            f[i][j] = best;
        }
    }
    return f[nt][ne];
}

double spectrum_sq_error(const PseudoSpectrum& approx, const PseudoSpectrum& exact) {
    if (!(approx.grid == exact.grid)) {
        throw std::invalid_argument("spectrum_sq_error: grids differ");
    }
    return (approx.values - exact.values).squaredNorm();
}

}  // namespace fastmusic
