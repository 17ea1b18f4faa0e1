#include <catch2/catch_amalgamated.hpp>

#include <rcspin/evolve.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

using namespace rcspin;

namespace {

SparseHamiltonian build_for(const ConstraintProfile& profile) {
    return build_hamiltonian(build_sector(profile), profile);
}

/// Unconstrained chain: every range zero, sector = full hypercube, and the
/// return probability of |f> factorizes into cos(t)^(2N) per site.
ConstraintProfile free_profile(int n) {
    return sample_constraints(0.0, 0, n, 0);
}

double max_series_error(const ReturnSeries& series, int n_sites) {
    double worst = 0.0;
    for (std::size_t k = 0; k < series.values.size(); ++k) {
        const double expected = std::pow(std::cos(series.grid.time(k)), 2 * n_sites);
        worst = std::max(worst, std::abs(series.values[k] - expected));
    }
    return worst;
}

}  // namespace

TEST_CASE("unconstrained chains factorize into independent site rotations", "[evolve]") {
    const TimeGrid grid(6.0, 0.05);
    for (const int n : {2, 4, 8}) {
        const SparseHamiltonian h = build_for(free_profile(n));
        REQUIRE(h.dimension() == (std::size_t{1} << n));

        EvolveOptions exact;
        exact.method = EvolveMethod::exact;
        CHECK(max_series_error(return_probability(h, 0, grid, exact), n) < 1e-10);

        EvolveOptions krylov;
        krylov.method = EvolveMethod::krylov;
        CHECK(max_series_error(return_probability(h, 0, grid, krylov), n) < 1e-8);
    }
}

TEST_CASE("exact propagation preserves the norm", "[evolve]") {
    const ConstraintProfile profile = sample_constraints(1.8, 1, 10, 1, Boundary::periodic, 41, 2);
    const SparseHamiltonian h = build_for(profile);
    const TimeGrid grid(8.0, 0.1);
    const std::vector<StateVector> states = evolve_exact(h, fock_vector(h.basis, 0), grid);
    REQUIRE(states.size() == grid.size());
    for (const StateVector& psi : states)
        CHECK(std::abs(psi.norm() - 1.0) < 1e-9);
}

TEST_CASE("the two propagators agree on states and return probabilities", "[evolve]") {
    const TimeGrid grid(6.0, 0.05);

    SECTION("random constrained sectors") {
        for (int k = 0; k < 4; ++k) {
            const ConstraintProfile profile =
                sample_constraints(0.2 * 10, 1, 10, 1,
                                   k % 2 ? Boundary::open : Boundary::periodic, 19,
                                   static_cast<std::uint64_t>(k));
            const SparseHamiltonian h = build_for(profile);
            const StateVector psi0 = fock_vector(h.basis, 0);
            const std::vector<StateVector> exact = evolve_exact(h, psi0, grid);
            const std::vector<StateVector> krylov = evolve_krylov(h, psi0, grid);
            REQUIRE(exact.size() == krylov.size());
            for (std::size_t t = 0; t < exact.size(); ++t)
                CHECK((exact[t] - krylov[t]).norm() < 1e-8);
        }
    }

    SECTION("hard-blockade ring from the alternating state") {
        const SparseHamiltonian h = build_for(pxp_profile(12));
        const FockState z2 = z2_state(12);
        EvolveOptions exact;
        exact.method = EvolveMethod::exact;
        EvolveOptions krylov;
        krylov.method = EvolveMethod::krylov;
        const ReturnSeries a = return_probability(h, z2, grid, exact);
        const ReturnSeries b = return_probability(h, z2, grid, krylov);
        for (std::size_t k = 0; k < a.values.size(); ++k)
            CHECK(std::abs(a.values[k] - b.values[k]) < 1e-8);
    }
}

TEST_CASE("conjugated forward evolution undoes the original run", "[evolve]") {
    // H is real symmetric, so exp(-iHT) conj(psi(T)) = conj(psi(0)).
    const ConstraintProfile profile = sample_constraints(2.0, 1, 10, 1, Boundary::periodic, 7, 1);
    const SparseHamiltonian h = build_for(profile);
    const TimeGrid grid(5.0, 0.05);
    const StateVector psi0 = fock_vector(h.basis, 0);

    const std::vector<StateVector> forward = evolve_exact(h, psi0, grid);
    const std::vector<StateVector> back = evolve_exact(h, forward.back().conjugate(), grid);
    CHECK((back.back() - psi0.conjugate()).norm() < 1e-10);

    const std::vector<StateVector> kforward = evolve_krylov(h, psi0, grid);
    const std::vector<StateVector> kback = evolve_krylov(h, kforward.back().conjugate(), grid);
    CHECK((kback.back() - psi0.conjugate()).norm() < 1e-7);
}

TEST_CASE("a zero-length grid returns just the initial point", "[evolve]") {
    const SparseHamiltonian h = build_for(pxp_profile(6));
    const TimeGrid grid(0.0, 0.05);
    REQUIRE(grid.size() == 1);

    const ReturnSeries series = return_probability(h, 0, grid);
    REQUIRE(series.values.size() == 1);
    CHECK(series.values[0] == Catch::Approx(1.0).margin(1e-14));

    const std::vector<StateVector> states = evolve_krylov(h, fock_vector(h.basis, 0), grid);
    REQUIRE(states.size() == 1);
    CHECK((states[0] - fock_vector(h.basis, 0)).norm() == 0.0);
}

TEST_CASE("propagators reject malformed input", "[evolve]") {
    const SparseHamiltonian h = build_for(pxp_profile(6));
    const TimeGrid grid(1.0, 0.1);

    StateVector wrong_dim = StateVector::Zero(3);
    wrong_dim(0) = 1.0;
    CHECK_THROWS_AS(evolve_exact(h, wrong_dim, grid), std::invalid_argument);
    CHECK_THROWS_AS(evolve_krylov(h, wrong_dim, grid), std::invalid_argument);

    StateVector unnormalized = StateVector::Zero(static_cast<Eigen::Index>(h.dimension()));
    unnormalized(0) = 0.5;
    CHECK_THROWS_AS(evolve_exact(h, unnormalized, grid), std::invalid_argument);

    CHECK_THROWS_AS(fock_vector(h.basis, 0b111), std::invalid_argument);
    CHECK_THROWS_AS(return_probability(h, 0b111, grid), std::invalid_argument);

    CHECK_THROWS_AS(TimeGrid(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(-1.0, 0.1), std::invalid_argument);

    CHECK_THROWS_AS(evolve_krylov(h, fock_vector(h.basis, 0), grid, 30, 1e-10, 0),
                    std::runtime_error);
}

TEST_CASE("return probabilities start at one and stay in range", "[evolve]") {
    const TimeGrid grid(6.0, 0.05);
    for (int k = 0; k < 6; ++k) {
        const ConstraintProfile profile =
            sample_constraints(0.25 * 8, 1, 8, 1, Boundary::periodic, 23,
                               static_cast<std::uint64_t>(k));
        const SparseHamiltonian h = build_for(profile);
        const ReturnSeries series = return_probability(h, 0, grid);
        CHECK(std::abs(series.values[0] - 1.0) < 1e-12);
        for (const double v : series.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("spectral return series match the propagator route", "[evolve]") {
    const ConstraintProfile profile = pxp_profile(10);
    const SparseHamiltonian h = build_for(profile);
    const SpectralData spec = diagonalize(h);
    const TimeGrid grid(6.0, 0.05);

    const std::size_t row = h.basis.index_of(z2_state(10)).value();
    const ReturnSeries direct = return_series_from_spectral(spec, row, grid);

    const std::vector<StateVector> states = evolve_exact(h, fock_vector(h.basis, z2_state(10)), grid);
    for (std::size_t t = 0; t < grid.size(); ++t) {
        const double amp = std::norm(states[t](static_cast<Eigen::Index>(row)));
        CHECK(std::abs(direct.values[t] - amp) < 1e-10);
    }
}

TEST_CASE("the blocked all-states sweep reproduces individual rows", "[evolve]") {
    const ConstraintProfile profile = pxp_profile(8);
    const SparseHamiltonian h = build_for(profile);
    const SpectralData spec = diagonalize(h);
    const TimeGrid grid(4.0, 0.1);

    std::vector<std::vector<double>> all(h.dimension());
    for_each_return_series(spec, grid, [&](std::size_t row, std::span<const double> values) {
        all[row].assign(values.begin(), values.end());
    }, /*block_rows=*/5);   // force several partial blocks

    for (const std::size_t row : {std::size_t{0}, h.dimension() / 2, h.dimension() - 1}) {
        const ReturnSeries one = return_series_from_spectral(spec, row, grid);
        REQUIRE(all[row].size() == one.values.size());
        for (std::size_t t = 0; t < one.values.size(); ++t)
            CHECK(std::abs(all[row][t] - one.values[t]) < 1e-10);
    }
}

TEST_CASE("site densities respect symmetry and the blockade budget", "[evolve]") {
    const SparseHamiltonian h = build_for(pxp_profile(12));
    const TimeGrid grid(5.0, 0.1);

    SECTION("alternating start point") {
        const DensityProfile d = site_density(h, fock_vector(h.basis, z2_state(12)), grid);
        REQUIRE(d.n_sites == 12);
        REQUIRE(d.occupation.size() == grid.size() * 12);
        for (int i = 0; i < 12; ++i)
            CHECK(d.at(0, i) == Catch::Approx(i % 2 == 0 ? 1.0 : 0.0).margin(1e-12));
        for (std::size_t t = 0; t < grid.size(); ++t) {
            double total = 0.0;
            for (int i = 0; i < 12; ++i) total += d.at(t, i);
            CHECK(total <= 6.0 + 1e-9);   // the ring blockade caps up-spins at N/2
        }
    }

    SECTION("translation-invariant start point") {
        const DensityProfile d = site_density(h, fock_vector(h.basis, 0), grid);
        for (std::size_t t = 0; t < grid.size(); ++t)
            for (int i = 1; i < 12; ++i)
                CHECK(std::abs(d.at(t, i) - d.at(t, 0)) < 1e-9);
    }
}

TEST_CASE("exact evolution refuses sectors beyond the dense limit", "[evolve]") {
    const SparseHamiltonian h = build_for(pxp_profile(12));
    const TimeGrid grid(1.0, 0.1);
    CHECK_THROWS_AS(evolve_exact(h, fock_vector(h.basis, 0), grid, /*dense_limit=*/100),
                    std::invalid_argument);

    EvolveOptions opts;   // auto method must fall back to the iterative path
    opts.dense_limit = 100;
    CHECK_NOTHROW(return_probability(h, 0, TimeGrid(0.5, 0.1), opts));
}
