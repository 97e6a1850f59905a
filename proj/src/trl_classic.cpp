#include "mltrl/trl_classic.hpp"

#include <cmath>
#include <sstream>

#include "mltrl/medium.hpp"

namespace mltrl::trl {

namespace {

void check_margin(double margin_deg) {
    if (margin_deg < 0.0 || margin_deg > 90.0)
        throw InvalidInput("phase margin must lie in [0, 90] degrees");
}

} // namespace

std::pair<double, double> band_edges(double l_diff_m, double eps_real,
                                     double margin_deg, int band_index) {
    if (!(l_diff_m > 0.0)) throw InvalidInput("length difference must be > 0");
    if (!(eps_real > 0.0)) throw InvalidInput("eps_real must be > 0");
    if (band_index < 0) throw InvalidInput("band index must be >= 0");
    check_margin(margin_deg);
    const double scale = kC0 / (2.0 * l_diff_m * std::sqrt(eps_real));
    const double m = margin_deg / 180.0;
    return {(band_index + m) * scale, (band_index + 1.0 - m) * scale};
}

int band_index(double f_min_hz, double f_max_hz, double margin_deg) {
    if (!(f_min_hz > 0.0) || !(f_min_hz < f_max_hz))
        throw InvalidInput("band_index requires 0 < f_min < f_max");
    check_margin(margin_deg);
    const double q = f_min_hz / f_max_hz;
    const double m = margin_deg / 180.0;
    const double n = std::floor((q - (q + 1.0) * m) / (1.0 - q));
    return n < 0.0 ? 0 : static_cast<int>(n);
}

double achieved_margin(double f_min_hz, double f_max_hz, int band_index) {
    if (band_index < 0) throw InvalidInput("band index must be >= 0");
    if (!(f_min_hz > 0.0) || !(f_min_hz <= f_max_hz))
        throw InvalidInput("achieved_margin requires 0 < f_min <= f_max");
    const double q = f_min_hz / f_max_hz;
    const double n = static_cast<double>(band_index);
    const double phi = 180.0 * (n * q - n + q) / (q + 1.0);
    if (phi < 0.0) {
        std::ostringstream os;
        os << "band " << band_index << " infeasible for edge ratio " << q
           << " (achieved margin " << phi << " deg)";
        throw InfeasibleError(os.str());
    }
    return phi;
}

double length_for_band(double f_hz, double eps_real, double margin_deg,
                       int band_index, Anchor anchor) {
    if (!(f_hz > 0.0)) throw InvalidInput("frequency must be > 0");
    if (!(eps_real > 0.0)) throw InvalidInput("eps_real must be > 0");
    if (band_index < 0) throw InvalidInput("band index must be >= 0");
    check_margin(margin_deg);
    const double m = margin_deg / 180.0;
    const double turns = anchor == Anchor::Low ? band_index + m
                                               : band_index + 1.0 - m;
    return kC0 * turns / (2.0 * f_hz * std::sqrt(eps_real));
}

TrlDesign design_band(double f_min_hz, double f_max_hz, double eps_real,
                      double margin_deg, Anchor anchor) {
    const int n = band_index(f_min_hz, f_max_hz, margin_deg);
    TrlDesign d;
    d.band_index = n;
    d.achieved_margin_deg = achieved_margin(f_min_hz, f_max_hz, n);
    const double f = anchor == Anchor::Low ? f_min_hz : f_max_hz;
    d.length_diff_m = length_for_band(f, eps_real, d.achieved_margin_deg, n, anchor);
    return d;
}

} // namespace mltrl::trl
