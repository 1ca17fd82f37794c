#include <catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "smgo/sobol.hpp"

using smgo::SobolSequence;

TEST_CASE("splitmix64 matches the published reference outputs") {
    std::uint64_t state = 0;
    CHECK(smgo::splitmix64(state) == 0xE220A8397B1DCDAFULL);
    CHECK(smgo::splitmix64(state) == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("derive_seed separates sub-streams") {
    const std::uint64_t a = smgo::derive_seed(7, 0);
    const std::uint64_t b = smgo::derive_seed(7, 1);
    const std::uint64_t c = smgo::derive_seed(8, 0);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(smgo::derive_seed(7, 0) == a);
}

TEST_CASE("u64_to_unit covers [0,1) with 53-bit resolution") {
    CHECK(smgo::u64_to_unit(0) == 0.0);
    CHECK(smgo::u64_to_unit(~0ULL) < 1.0);
    CHECK(smgo::u64_to_unit(~0ULL) > 0.9999999999999998);
    CHECK(smgo::u64_to_unit(1ULL << 63) == 0.5);
}

TEST_CASE("unshifted sequence reproduces the reference low-discrepancy points") {
    // Frozen outputs of a standard direction-number table (first 6 dimensions,
    // indices 0..8). All values are dyadic rationals, hence exact.
    const double expected[9][6] = {
        {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
        {0.75, 0.25, 0.25, 0.25, 0.75, 0.75},
        {0.25, 0.75, 0.75, 0.75, 0.25, 0.25},
        {0.375, 0.375, 0.625, 0.875, 0.375, 0.125},
        {0.875, 0.875, 0.125, 0.375, 0.875, 0.625},
        {0.625, 0.125, 0.875, 0.625, 0.625, 0.875},
        {0.125, 0.625, 0.375, 0.125, 0.125, 0.375},
        {0.1875, 0.3125, 0.9375, 0.4375, 0.5625, 0.3125},
    };
    SobolSequence seq(6);
    for (std::size_t i = 0; i < 9; ++i) {
        const std::vector<double> p = seq.point(i);
        for (std::size_t d = 0; d < 6; ++d) {
            INFO("index " << i << " dim " << d);
            CHECK(p[d] == expected[i][d]);
        }
    }
}

TEST_CASE("deeper indices and higher dimensions match frozen references") {
    SobolSequence seq(16);
    CHECK(seq.point(21)[0] == 0.96875);
    CHECK(seq.point(21)[7] == 0.71875);
    CHECK(seq.point(21)[15] == 0.40625);
    CHECK(seq.point(37)[0] == 0.921875);
    CHECK(seq.point(37)[7] == 0.796875);
    CHECK(seq.point(37)[15] == 0.484375);
    CHECK(seq.point(63)[0] == 0.015625);
    CHECK(seq.point(63)[7] == 0.140625);
    CHECK(seq.point(63)[15] == 0.765625);
}

TEST_CASE("points stay in the half-open unit box and are pairwise distinct") {
    SobolSequence seq(5);
    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < 256; ++i) {
        const std::vector<double> p = seq.point(i);
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v < 1.0);
        }
        CHECK(seen.insert(p).second);
    }
}

TEST_CASE("digital shift is deterministic, box-preserving, and nontrivial") {
    SobolSequence plain(4);
    SobolSequence shifted(4, 12345);
    SobolSequence shifted_again(4, 12345);
    SobolSequence other(4, 54321);
    bool any_diff = false;
    bool seeds_differ = false;
    for (std::size_t i = 0; i < 64; ++i) {
        const auto a = shifted.point(i);
        const auto b = shifted_again.point(i);
        CHECK(a == b);
        for (double v : a) {
            CHECK(v >= 0.0);
            CHECK(v < 1.0);
        }
        if (a != plain.point(i))
            any_diff = true;
        if (a != other.point(i))
            seeds_differ = true;
    }
    CHECK(any_diff);
    CHECK(seeds_differ);
}

TEST_CASE("shift seed zero means no shift") {
    SobolSequence plain(3);
    SobolSequence zero(3, 0);
    for (std::size_t i = 0; i < 32; ++i)
        CHECK(plain.point(i) == zero.point(i));
}

TEST_CASE("dimension limits are enforced") {
    CHECK_THROWS_AS(SobolSequence(0), std::invalid_argument);
    CHECK_THROWS_AS(SobolSequence(17), std::invalid_argument);
    CHECK_NOTHROW(SobolSequence(16));
}
