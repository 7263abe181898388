#pragma once

#include <string>

#include "fastmusic/scene.hpp"
#include "fastmusic/spectrum.hpp"
#include "fastmusic/types.hpp"

namespace fastmusic {

/// Scene text format: '#' comments, blank lines ignored, one target per line:
///   target <theta_deg> <tau_s> <alpha_re> <alpha_im>
void write_scene(const std::string& path, const TargetScene& scene);
TargetScene read_scene(const std::string& path);

/// Binary matrix layout (little-endian): magic "FMCX", u32 version = 1,
/// u32 rows, u32 cols, then rows*cols complex64 values (float32 re, float32 im)
/// in row-major order.
void write_matrix_binary(const std::string& path, const CxMat& a);
CxMat read_matrix_binary(const std::string& path);

/// CSV with a "# rows=R cols=C re,im interleaved" header line and 2*cols
/// numeric columns per row.
void write_matrix_csv(const std::string& path, const CxMat& a);

/// Two-column CSV: theta_deg,value.
void write_spectrum_csv(const std::string& path, const PseudoSpectrum& spectrum);

}  // namespace fastmusic
