#include <catch2/catch_amalgamated.hpp>

#include <rcspin/sector.hpp>

#include "oracle.hpp"

#include <set>
#include <stdexcept>
#include <vector>

using namespace rcspin;

namespace {

ConstraintProfile random_profile(double mu_over_n, int n, std::uint64_t realisation,
                                 Boundary boundary = Boundary::periodic) {
    return sample_constraints(mu_over_n * n, 1, n, 1, boundary, 12345, realisation);
}

}  // namespace

TEST_CASE("hard-blockade ring sector is the known 7-state set", "[sector]") {
    const SectorBasis basis = build_sector(pxp_profile(4));
    CHECK(basis.dimension() == 7);
    CHECK(basis.states == std::vector<FockState>{0, 1, 2, 4, 5, 8, 10});
    CHECK(basis.contains(0b0101));
    CHECK_FALSE(basis.contains(0b0111));
    CHECK(basis.index_of(0b1010).value() == 6);
    CHECK_FALSE(basis.index_of(0b1111).has_value());
}

TEST_CASE("allowed flips follow the blockade rule", "[sector]") {
    const FlipMasks masks = make_flip_masks(pxp_profile(4));
    CHECK(allowed_flips(0b0000, masks) == 0b1111);   // empty ring: all sites may flip
    CHECK(allowed_flips(0b0001, masks) == 0b0101);   // site 0 up blocks 1 and 3
}

TEST_CASE("ring sector dimensions follow the Lucas sequence", "[sector]") {
    for (const int n : {4, 6, 8, 10, 12, 14}) {
        const SectorBasis basis = build_sector(pxp_profile(n));
        CHECK(basis.dimension() == oracle::lucas(n));
    }
    CHECK(build_sector(pxp_profile(6)).dimension() == 18);
}

TEST_CASE("open-chain sector dimensions follow the Fibonacci sequence", "[sector]") {
    for (const int n : {4, 6, 8, 10, 12}) {
        const SectorBasis basis = build_sector(pxp_profile(n, Boundary::open));
        CHECK(basis.dimension() == oracle::fibonacci(n + 2));
    }
}

TEST_CASE("alternating product states have the expected bitmasks", "[sector]") {
    CHECK(z2_state(12) == 0x555);
    CHECK(z2_state(12, 1) == 0xAAA);
    CHECK(z2_state(4) == 0b0101);
    CHECK_THROWS_AS(z2_state(0), std::invalid_argument);
    CHECK_THROWS_AS(z2_state(64), std::invalid_argument);
    CHECK_THROWS_AS(z2_state(8, 2), std::invalid_argument);
}

TEST_CASE("sector closure matches an independent breadth-first search", "[sector]") {
    for (const Boundary bc : {Boundary::periodic, Boundary::open}) {
        for (int k = 0; k < 15; ++k) {
            const int n = 6 + 2 * (k % 3);
            const double mu_over_n = 0.1 + 0.1 * static_cast<double>(k % 4);
            const ConstraintProfile profile =
                random_profile(mu_over_n, n, static_cast<std::uint64_t>(k), bc);
            const SectorBasis basis = build_sector(profile);
            const std::set<std::uint64_t> expected =
                oracle::component_of(0, profile.ranges, n, bc == Boundary::periodic);
            REQUIRE(basis.dimension() == expected.size());
            CHECK(std::set<std::uint64_t>(basis.states.begin(), basis.states.end()) == expected);
        }
    }
}

TEST_CASE("long ranges only ever see distinct blockers", "[sector]") {
    // Wrapped neighbourhoods overlap themselves once 2r >= N; the closure must
    // then agree with a rule that de-duplicates positions explicitly.
    for (int k = 0; k < 8; ++k) {
        const ConstraintProfile profile = random_profile(0.45, 6, static_cast<std::uint64_t>(k));
        const SectorBasis basis = build_sector(profile);
        const std::set<std::uint64_t> expected =
            oracle::component_of(0, profile.ranges, 6, true);
        CHECK(std::set<std::uint64_t>(basis.states.begin(), basis.states.end()) == expected);
    }
}

TEST_CASE("closures from other roots match the oracle too", "[sector]") {
    const ConstraintProfile profile = pxp_profile(8);
    const FockState z2 = z2_state(8);
    const SectorBasis from_z2 = build_sector_from(profile, z2);
    CHECK(from_z2.contains(z2));
    const std::set<std::uint64_t> expected = oracle::component_of(z2, profile.ranges, 8, true);
    CHECK(std::set<std::uint64_t>(from_z2.states.begin(), from_z2.states.end()) == expected);
    // the alternating state shares the root component on the blockade ring
    CHECK(from_z2.states == build_sector(profile).states);
}

TEST_CASE("sector construction enforces its capacity", "[sector]") {
    CHECK_THROWS_AS(build_sector(pxp_profile(12), 100), SectorCapacityError);
    CHECK_NOTHROW(build_sector(pxp_profile(12), 322));
}

TEST_CASE("full census agrees with an independent union-find", "[sector]") {
    for (int k = 0; k < 10; ++k) {
        const int n = 6 + 2 * (k % 3);
        const ConstraintProfile profile =
            random_profile(0.15 + 0.1 * static_cast<double>(k % 3), n,
                           static_cast<std::uint64_t>(100 + k));
        const ComponentCensus census = all_components(profile);
        const oracle::Census expected = oracle::full_census(profile.ranges, n, true);
        CHECK(census.sizes == expected.sizes_descending);
        CHECK(census.f_component_size == expected.root_component_size);

        std::uint64_t total = 0;
        for (const std::uint64_t s : census.sizes) total += s;
        CHECK(total == (1ull << n));
        CHECK(std::is_sorted(census.sizes.rbegin(), census.sizes.rend()));
        CHECK(census.f_component_size == build_sector(profile).dimension());
    }
}

TEST_CASE("census refuses chains beyond the exhaustive limit", "[sector]") {
    CHECK_THROWS_AS(all_components(pxp_profile(22)), std::invalid_argument);
}
