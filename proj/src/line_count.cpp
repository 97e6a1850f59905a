#include "mltrl/line_count.hpp"

#include <algorithm>
#include <cmath>

#include "mltrl/errors.hpp"
#include "mltrl/medium.hpp"

namespace mltrl::line_count {

namespace {

int pair_count_from(double electrical, double margin_deg) {
    const int m = static_cast<int>(std::ceil(electrical - 1.0 + margin_deg / 180.0)) + 1;
    return std::max(m, 1);
}

} // namespace

int pairs_full_band(double l_max_m, double f_max_hz, double eps_real,
                    double margin_deg) {
    if (!(l_max_m > 0.0) || !(f_max_hz > 0.0) || !(eps_real > 0.0))
        throw InvalidInput("pairs_full_band requires positive inputs");
    const double electrical = 2.0 * l_max_m * f_max_hz * std::sqrt(eps_real) / kC0;
    return pair_count_from(electrical, margin_deg);
}

int pairs_banded(double l_max_m, double f_min_hz, double f_max_hz,
                 double eps_real, double margin_deg) {
    if (!(f_min_hz < f_max_hz))
        throw InvalidInput("pairs_banded requires f_min < f_max");
    if (!(l_max_m > 0.0) || !(f_min_hz >= 0.0) || !(eps_real > 0.0))
        throw InvalidInput("pairs_banded requires positive inputs");
    const double electrical =
        2.0 * l_max_m * (f_max_hz - f_min_hz) * std::sqrt(eps_real) / kC0;
    return pair_count_from(electrical, margin_deg);
}

int pairs_harmonic(int m_min, int m_max) {
    if (m_min < 1 || m_min > m_max)
        throw InvalidInput("pairs_harmonic requires 1 <= m_min <= m_max");
    for (int m = m_min; m < m_max; ++m)
        if (m_max % m == 0) return m;
    return m_max;
}

int lines_from_pairs(int m) {
    if (m < 1) throw InvalidInput("lines_from_pairs requires m >= 1");
    const double n = (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(m))) / 2.0;
    return static_cast<int>(std::floor(n + 0.5));
}

LineCountResult recommend(double l_max_m, double f_min_hz, double f_max_hz,
                          double eps_real, double margin_deg) {
    LineCountResult r;
    r.m_max = pairs_full_band(l_max_m, f_max_hz, eps_real, margin_deg);
    r.m_min = f_min_hz > 0.0
                  ? pairs_banded(l_max_m, f_min_hz, f_max_hz, eps_real, margin_deg)
                  : r.m_max;
    r.m_min = std::min(r.m_min, r.m_max);
    r.m = pairs_harmonic(r.m_min, r.m_max);
    r.harmonic_fallback = (r.m == r.m_max && r.m_min < r.m_max);
    r.n_lines = std::max(lines_from_pairs(r.m), 2);
    return r;
}

} // namespace mltrl::line_count
