#ifndef MLTRL_TRL_CLASSIC_HPP
#define MLTRL_TRL_CLASSIC_HPP

#include <utility>

#include "mltrl/errors.hpp"

namespace mltrl::trl {

/// A usable frequency band of a two-line TRL pair.
struct BandSpec {
    double f_min_hz = 0.0;
    double f_max_hz = 0.0;
    double phase_margin_deg = 0.0;
    int band_index = 0;
};

/// Result of the classical two-line design arithmetic.
struct TrlDesign {
    double length_diff_m = 0.0;
    double achieved_margin_deg = 0.0;
    int band_index = 0;
};

enum class Anchor { Low, High };

/// Frequency edges of band n for a given length difference and margin.
/// A 90 degree margin collapses both edges onto the quarter-wave center.
std::pair<double, double> band_edges(double l_diff_m, double eps_real,
                                     double margin_deg, int band_index);

/// Band wrap count for a frequency ratio and margin, clamped at zero for
/// wideband requests.
int band_index(double f_min_hz, double f_max_hz, double margin_deg);

/// Margin actually achieved by integer band n at the given edge ratio.
/// Throws InfeasibleError when n is too high for the ratio.
double achieved_margin(double f_min_hz, double f_max_hz, int band_index);

/// Length difference that places the requested edge of band n at f.
/// Anchor::Low treats f as the lower edge, Anchor::High as the upper.
double length_for_band(double f_hz, double eps_real, double margin_deg,
                       int band_index, Anchor anchor);

/// Full two-line design for a requested band.
TrlDesign design_band(double f_min_hz, double f_max_hz, double eps_real,
                      double margin_deg, Anchor anchor = Anchor::Low);

} // namespace mltrl::trl

#endif
