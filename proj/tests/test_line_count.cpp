#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mltrl/line_count.hpp"
#include "mltrl/errors.hpp"

using namespace mltrl::line_count;

TEST_CASE("full-band pair count for the 6 cm example") {
    CHECK(pairs_full_band(0.06, 8.5215e9, 2.6, 30.0) == 6);
}

TEST_CASE("full-band count degenerates to one pair at DC") {
    CHECK(pairs_full_band(0.06, 1.0, 2.6, 30.0) == 1);
}

TEST_CASE("full-band count roughly doubles with length") {
    const int m1 = pairs_full_band(0.06, 8.5215e9, 2.6, 30.0);
    const int m2 = pairs_full_band(0.12, 8.5215e9, 2.6, 30.0);
    CHECK(m2 >= 2 * m1 - 2);
    CHECK(m2 <= 2 * m1 + 2);
}

TEST_CASE("banded pair count") {
    CHECK(pairs_banded(0.06, 3e9, 8.5215e9, 2.6, 30.0) == 4);
    // f_min at DC reduces to the full-band count
    CHECK(pairs_banded(0.06, 0.0, 8.5215e9, 2.6, 30.0) ==
          pairs_full_band(0.06, 8.5215e9, 2.6, 30.0));
    CHECK(pairs_banded(0.06, 8.5215e9 - 1.0, 8.5215e9, 2.6, 30.0) == 1);
}

TEST_CASE("harmonic pair search") {
    CHECK(pairs_harmonic(4, 6) == 6);
    CHECK(pairs_harmonic(5, 5) == 5);
    CHECK(pairs_harmonic(3, 6) == 3);
    CHECK(pairs_harmonic(2, 7) == 7); // prime upper count falls through
    CHECK_THROWS_AS(pairs_harmonic(0, 5), mltrl::InvalidInput);
    CHECK_THROWS_AS(pairs_harmonic(6, 5), mltrl::InvalidInput);
}

TEST_CASE("line count from pair count") {
    CHECK(lines_from_pairs(6) == 4);
    CHECK(lines_from_pairs(3) == 3);
    CHECK(lines_from_pairs(1) == 2);
}

TEST_CASE("pair count of N lines inverts exactly") {
    for (int n = 2; n <= 30; ++n)
        CHECK(lines_from_pairs(n * (n - 1) / 2) == n);
}

TEST_CASE("harmonic result divides m_max and respects m_min") {
    for (int m_min = 1; m_min <= 12; ++m_min)
        for (int m_max = m_min; m_max <= 24; ++m_max) {
            const int m = pairs_harmonic(m_min, m_max);
            CHECK(m >= m_min);
            CHECK(m <= m_max);
            CHECK(m_max % m == 0);
        }
}

TEST_CASE("recommendation pipeline never drops below two lines") {
    const auto tiny = recommend(0.001, 1e6, 2e6, 2.0, 30.0);
    CHECK(tiny.n_lines >= 2);
    const auto r = recommend(0.06, 3e9, 8.5215e9, 2.6, 30.0);
    CHECK(r.m_max == 6);
    CHECK(r.m_min == 4);
    CHECK(r.m == 6);           // 4 and 5 do not divide 6
    CHECK(r.harmonic_fallback == true);
    CHECK(r.n_lines == 4);
}
