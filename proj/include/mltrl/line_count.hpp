#ifndef MLTRL_LINE_COUNT_HPP
#define MLTRL_LINE_COUNT_HPP

namespace mltrl::line_count {

struct LineCountResult {
    int m_max = 0;      // pairs for full coverage DC..f_max
    int m_min = 0;      // pairs for the requested bandwidth only
    int m = 0;          // harmonic-compatible pair count
    int n_lines = 0;    // recommended number of lines
    bool harmonic_fallback = false; // m fell through to m_max (e.g. prime m_max)
};

/// Pairs needed to cover every null of the longest line from DC to f_max.
int pairs_full_band(double l_max_m, double f_max_hz, double eps_real,
                    double margin_deg);

/// Same count restricted to the requested bandwidth f_max - f_min.
int pairs_banded(double l_max_m, double f_min_hz, double f_max_hz,
                 double eps_real, double margin_deg);

/// Smallest pair count in [m_min, m_max] that divides m_max evenly,
/// preserving a cyclic band structure. m_max always qualifies.
int pairs_harmonic(int m_min, int m_max);

/// Number of lines whose pair count C(N,2) best matches m (round half up).
int lines_from_pairs(int m);

/// Full pipeline; n_lines is never below 2.
LineCountResult recommend(double l_max_m, double f_min_hz, double f_max_hz,
                          double eps_real, double margin_deg);

} // namespace mltrl::line_count

#endif
