#pragma once

#include <span>
#include <string>

#include "fbct/image.hpp"
#include "fbct/sampler.hpp"

namespace fbct {

// Minimal in-house rasterization of chain diagnostics to grayscale Images
// (1.0 = white background, 0.0 = ink), written out as PGM. All renderers are
// pure functions of their inputs, so regenerating a report from the same
// chain produces byte-identical files.

/// Sample path as a polyline. A constant chain renders as a flat middle line.
Image render_trace(std::span<const double> values, int width, int height);

/// Trace with dotted horizontal lines at the two given levels (used for the
/// empirical 95% credibility interval).
Image render_trace_with_band(std::span<const double> values, int width, int height, double lo,
                             double hi);

/// Bar histogram; a constant chain puts all mass in the central bin.
Image render_histogram(std::span<const double> values, int bins, int width, int height);

/// Autocorrelation bars, lag 0 at the left edge; value 1 reaches the top row
/// and the zero level sits mid-plot (negative lobes point down).
Image render_acf(std::span<const double> acf, int width, int height);

/// Plain-text summary table for lambda, delta, c.
std::string summary_table(const ChainSummary& summary);

}  // namespace fbct
