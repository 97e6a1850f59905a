#include "mltrl/rulers.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "mltrl/line_count.hpp"

namespace mltrl::rulers {

namespace {

// Perfect rulers: pairwise differences cover 1..max exactly once.
const std::map<int, std::vector<int>> kPerfect = {
    {2, {0, 1}},
    {3, {0, 1, 3}},
    {4, {0, 1, 4, 6}},
};

// Optimal Golomb rulers (canonical mark sets, shortest known per order).
const std::map<int, std::vector<int>> kGolomb = {
    {2, {0, 1}},
    {3, {0, 1, 3}},
    {4, {0, 1, 4, 6}},
    {5, {0, 1, 4, 9, 11}},
    {6, {0, 1, 4, 10, 12, 17}},
    {7, {0, 1, 4, 10, 18, 23, 25}},
    {8, {0, 1, 4, 9, 15, 22, 32, 34}},
    {9, {0, 1, 5, 12, 25, 27, 35, 41, 44}},
    {10, {0, 1, 6, 10, 23, 26, 34, 41, 53, 55}},
    {11, {0, 1, 4, 13, 28, 33, 47, 54, 64, 70, 72}},
    {12, {0, 2, 6, 24, 29, 40, 43, 55, 68, 75, 76, 85}},
    {13, {0, 2, 5, 25, 37, 43, 59, 70, 85, 89, 98, 99, 106}},
    {14, {0, 4, 6, 20, 35, 52, 59, 77, 78, 86, 89, 99, 122, 127}},
    {15, {0, 4, 20, 30, 57, 59, 62, 76, 100, 111, 123, 136, 144, 145, 151}},
    {16, {0, 1, 4, 11, 26, 32, 56, 68, 76, 115, 117, 134, 150, 163, 168, 177}},
    {17, {0, 5, 7, 17, 52, 56, 67, 80, 81, 100, 122, 138, 159, 165, 168, 191, 199}},
    {18, {0, 2, 10, 22, 53, 56, 82, 83, 89, 98, 130, 148, 153, 167, 188, 192, 205, 216}},
    {19, {0, 1, 6, 25, 32, 72, 100, 108, 120, 130, 153, 169, 187, 190, 204, 231, 233, 242, 246}},
    {20, {0, 1, 8, 11, 68, 77, 94, 116, 121, 156, 158, 179, 194, 208, 212, 228, 240, 253, 259, 283}},
};

// Wichmann complete rulers: differences cover 1..max, redundancy allowed.
// Longest published construction per order.
const std::map<int, std::vector<int>> kWichmann = {
    {3, {0, 1, 3}},
    {4, {0, 1, 4, 6}},
    {5, {0, 1, 4, 7, 9}},
    {6, {0, 1, 4, 7, 10, 12}},
    {7, {0, 1, 4, 7, 10, 13, 15}},
    {8, {0, 1, 3, 6, 13, 17, 21, 22}},
    {9, {0, 1, 3, 6, 13, 20, 24, 28, 29}},
    {10, {0, 1, 3, 6, 13, 20, 27, 31, 35, 36}},
    {11, {0, 1, 3, 6, 13, 20, 27, 34, 38, 42, 43}},
    {12, {0, 1, 3, 6, 13, 20, 27, 34, 41, 45, 49, 50}},
    {13, {0, 1, 3, 6, 13, 20, 27, 34, 41, 48, 52, 56, 57}},
};

const std::map<int, std::vector<int>>& table_for(Family family) {
    switch (family) {
        case Family::Perfect: return kPerfect;
        case Family::Golomb: return kGolomb;
        case Family::Wichmann: return kWichmann;
    }
    return kGolomb;
}

const char* family_name(Family family) {
    switch (family) {
        case Family::Perfect: return "perfect";
        case Family::Golomb: return "golomb";
        case Family::Wichmann: return "wichmann";
    }
    return "?";
}

} // namespace

Ruler ruler_for_order(int n_lines, Family family) {
    const auto& table = table_for(family);
    auto it = table.find(n_lines);
    if (it == table.end()) {
        std::ostringstream os;
        os << family_name(family) << " ruler of order " << n_lines
           << " is not in the embedded table (orders " << table.begin()->first
           << ".." << table.rbegin()->first << ")";
        throw UnsupportedOrderError(os.str());
    }
    return Ruler{it->second, family};
}

RulerReport verify_ruler(const Ruler& r) {
    if (r.marks.size() < 2 || r.marks.front() != 0)
        throw InvalidInput("ruler needs >= 2 marks starting at 0");
    for (std::size_t i = 1; i < r.marks.size(); ++i)
        if (r.marks[i] <= r.marks[i - 1])
            throw InvalidInput("ruler marks must be strictly increasing");

    RulerReport rep;
    std::map<int, int> counts;
    for (std::size_t i = 0; i < r.marks.size(); ++i)
        for (std::size_t j = i + 1; j < r.marks.size(); ++j)
            ++counts[r.marks[j] - r.marks[i]];

    rep.is_golomb = true;
    for (const auto& [d, c] : counts) {
        rep.covered.insert(d);
        if (c > 1) rep.is_golomb = false;
    }
    for (int d = 1; d <= r.max_mark(); ++d)
        if (!rep.covered.count(d)) rep.gaps.insert(d);
    return rep;
}

RulerDesign design_by_ruler(double f_min_hz, double f_max_hz, double margin_deg,
                            const DispersionModel& model, int band_n,
                            int n_lines, Family family) {
    if (!(f_min_hz > 0.0) || !(f_min_hz < f_max_hz))
        throw InvalidInput("design_by_ruler requires 0 < f_min < f_max");
    if (band_n < 0) throw InvalidInput("band index must be >= 0");

    // Representative eps' for the closed-form steps is taken at the lower
    // target; the unit length itself is sized with eps' at f_max.
    const double eps_lo = permittivity_at(model, f_min_hz).eps_real;
    const double eps_hi = permittivity_at(model, f_max_hz).eps_real;

    const double l0 =
        trl::length_for_band(f_max_hz, eps_hi, margin_deg, band_n, trl::Anchor::High);

    if (n_lines <= 0) {
        const double l_max_target =
            trl::length_for_band(f_min_hz, eps_lo, margin_deg, 0, trl::Anchor::Low);
        n_lines = line_count::recommend(l_max_target, f_min_hz, f_max_hz, eps_lo,
                                        margin_deg)
                      .n_lines;
    }

    RulerDesign d;
    d.ruler = ruler_for_order(n_lines, family);
    d.l0_m = l0;
    std::vector<double> lengths;
    lengths.reserve(d.ruler.marks.size());
    for (int mark : d.ruler.marks) lengths.push_back(mark * l0);
    d.lengths = LineSet(std::move(lengths));

    // Covered bands: within each cyclic period the lower edge comes from the
    // longest line and the upper edge from the unit-length pair.
    const int k_max = d.ruler.max_mark();
    const double l_longest = k_max * l0;
    const auto [lo0, unused_hi] = trl::band_edges(l_longest, eps_hi, margin_deg, 0);
    (void)unused_hi;
    const double period = kC0 / (2.0 * l0 * std::sqrt(eps_hi));
    for (int b = 0; b <= band_n; ++b) {
        trl::BandSpec band;
        band.band_index = b;
        band.phase_margin_deg = margin_deg;
        band.f_min_hz = b * period + lo0;
        band.f_max_hz = b * period + (1.0 - margin_deg / 180.0) * period;
        d.covered_bands.push_back(band);
    }

    if (d.covered_bands[static_cast<std::size_t>(band_n)].f_min_hz > f_min_hz &&
        band_n > 0) {
        std::ostringstream os;
        os << "band " << band_n << " coverage starts at "
           << d.covered_bands[static_cast<std::size_t>(band_n)].f_min_hz
           << " Hz, above the requested " << f_min_hz << " Hz";
        throw InfeasibleError(os.str());
    }
    return d;
}

} // namespace mltrl::rulers
