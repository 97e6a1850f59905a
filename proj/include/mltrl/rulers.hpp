#ifndef MLTRL_RULERS_HPP
#define MLTRL_RULERS_HPP

#include <set>
#include <vector>

#include "mltrl/eigenmetrics.hpp"
#include "mltrl/medium.hpp"
#include "mltrl/trl_classic.hpp"

namespace mltrl::rulers {

enum class Family { Perfect, Golomb, Wichmann };

/// Integer mark set, sorted, starting at zero.
struct Ruler {
    std::vector<int> marks;
    Family family = Family::Golomb;

    int order() const { return static_cast<int>(marks.size()); }
    int max_mark() const { return marks.empty() ? 0 : marks.back(); }
};

/// Pairwise difference census of a ruler.
struct RulerReport {
    bool is_golomb = false;          // all pairwise differences distinct
    std::set<int> covered;           // distances measurable by some pair
    std::set<int> gaps;              // missing distances in 1..max_mark
    bool complete() const { return gaps.empty(); }
};

/// Table lookup. Perfect rulers exist for orders 2-4, Golomb marks are
/// embedded for orders 2-20, Wichmann for orders 3-13.
Ruler ruler_for_order(int n_lines, Family family);

/// Exact difference census.
RulerReport verify_ruler(const Ruler& r);

/// Line lengths scaled from a ruler, with the covered classical bands.
struct RulerDesign {
    double l0_m = 0.0;               // unit length, the smallest step
    Ruler ruler;
    LineSet lengths;
    std::vector<trl::BandSpec> covered_bands;
};

/// Sizes the unit length from f_max for the requested band, picks the ruler
/// order (from the line-count pipeline when n_lines <= 0), and scales marks
/// into lengths.
RulerDesign design_by_ruler(double f_min_hz, double f_max_hz, double margin_deg,
                            const DispersionModel& model, int band_n = 0,
                            int n_lines = 0, Family family = Family::Golomb);

} // namespace mltrl::rulers

#endif
