#pragma once

#include <vector>

#include "fastmusic/types.hpp"

namespace fastmusic {

struct SubspaceEstimate;

/// L angles uniformly spanning [0, pi] inclusive, spacing pi / (L - 1).
class AngleGrid {
public:
    explicit AngleGrid(Index l);

    Index size() const { return l_; }
    double spacing() const;
    double theta(Index i) const;
    Index nearest(double theta) const;

    bool operator==(const AngleGrid& other) const { return l_ == other.l_; }

private:
    Index l_;
};

struct PseudoSpectrum {
    AngleGrid grid;
    RealVec values;
    Method method = Method::Exact;
    bool degenerate = false;  // set by normalize_spectrum on constant input
};

/// Peaks selected from a pseudo-spectrum. Angles are stored ascending; the
/// selection itself was greedy by descending height. `baseline` is the highest
/// spectrum value outside +-min_separation cells of every selected peak.
struct PeakSet {
    std::vector<double> angles;
    std::vector<double> heights;
    double baseline = 0.0;
    bool shortfall = false;  // fewer peaks found than requested
};

/// MUSIC pseudo-spectrum 1 / (M - ||U^H a(theta)||^2) on the grid.
/// The denominator is floored at 1e-12 * M so exact-subspace peaks stay finite
/// without moving.
PseudoSpectrum music_spectrum(const SubspaceEstimate& estimate, const AngleGrid& grid,
                              double d, double lambda);

/// Spectrum 1 / max(Re(a^H N a), floor) for an explicit noise-subspace
/// projector N (used by the matrix-inverse baseline).
PseudoSpectrum projector_spectrum(const CxMat& noise_projector, const AngleGrid& grid,
                                  double d, double lambda, Method tag);

/// (P - min) / (max - min); a constant input yields all zeros with the
/// degenerate flag set.
PseudoSpectrum normalize_spectrum(const PseudoSpectrum& p);

/// Top-k strict local maxima (plateaus resolve to their leftmost index),
/// ranked by height, greedily honoring a minimum mutual separation in grid
/// cells. Finding fewer than k sets the shortfall flag; nothing is fabricated.
PeakSet extract_peaks(const PseudoSpectrum& p, Index k, Index min_separation_cells);

/// AoA readout for sin-parametrized ULA spectra. Because the steering vector
/// depends on theta only through sin(theta), every spectrum on [0, pi] is
/// mirror-symmetric about pi/2 and each target shows up twice. This extracts
/// 2k raw peaks, folds them onto min(theta, pi - theta), deduplicates, and
/// returns the k strongest folded bearings. The baseline is taken from the raw
/// (unfolded) selection so mirror images never count as noise floor.
PeakSet extract_target_peaks(const PseudoSpectrum& p, Index k, Index min_separation_cells);

/// Sum of squared angle errors under sorted-order pairing; sizes must match.
double aoa_mse(std::vector<double> truth, std::vector<double> estimates);

/// As aoa_mse but tolerates a shortfall: unmatched truths are charged
/// (pi/2)^2 each and the found peaks are assigned to truths by the
/// order-preserving assignment of minimum total cost.
double aoa_mse_penalized(const std::vector<double>& truth, const PeakSet& estimate);

/// Sum over the grid of (P_approx - P_exact)^2; grids must match.
double spectrum_sq_error(const PseudoSpectrum& approx, const PseudoSpectrum& exact);

}  // namespace fastmusic
