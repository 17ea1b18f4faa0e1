#pragma once

/**
 * Truncated Lanczos iterations.
 *
 * Builds the Krylov tridiagonalization of a sector Hamiltonian from a Fock
 * state, evaluates the return probability of the order-m effective
 * Hamiltonian, and searches for the minimal order m_c whose time-averaged
 * deviation from the exact return probability drops below a cost tolerance.
 *
 * The recursion is textbook three-term symmetric Lanczos — subtracting both
 * the current and the previous Krylov vector — plus full
 * reorthogonalization against all stored vectors, so the tridiagonal matrix
 * is the exact projection of H onto the Krylov subspace.
 */

#include <rcspin/constraints.hpp>
#include <rcspin/evolve.hpp>
#include <rcspin/hamiltonian.hpp>
#include <rcspin/lls.hpp>
#include <rcspin/parallel.hpp>
#include <rcspin/rng.hpp>
#include <rcspin/sector.hpp>
#include <rcspin/time_grid.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcspin {

inline constexpr double default_breakdown_tol = 1e-10;
inline constexpr double default_cost_tol = 0.01;

/// Krylov tridiagonalization from a Fock state. `diagonal` holds
/// u_0..u_{m-1}, `offdiagonal` holds v_1..v_{m-1}; `exhausted` is set when
/// the recursion terminates because the next off-diagonal coefficient falls
/// below the breakdown tolerance (the Krylov space is then invariant and
/// its dimension equals `order()`).
struct LanczosBasis {
    FockState root = 0;
    std::vector<double> diagonal;
    std::vector<double> offdiagonal;
    std::vector<Eigen::VectorXd> vectors;
    bool exhausted = false;

    [[nodiscard]] std::size_t order() const { return diagonal.size(); }
};

/// Extend `basis` in place up to `target_order` Lanczos vectors (no-op if
/// already there or exhausted). Vectors already built are reused, never
/// recomputed.
inline void lanczos_extend(const SparseHamiltonian& h, LanczosBasis& basis,
                           std::size_t target_order,
                           double breakdown_tol = default_breakdown_tol) {
    if (target_order < 1) throw std::invalid_argument("lanczos_extend: order must be >= 1");
    const Eigen::Index dim = static_cast<Eigen::Index>(h.dimension());

    if (basis.vectors.empty()) {
        const auto idx = h.basis.index_of(basis.root);
        if (!idx) throw std::invalid_argument("lanczos_extend: root state is not in the sector");
        Eigen::VectorXd v0 = Eigen::VectorXd::Zero(dim);
        v0(static_cast<Eigen::Index>(*idx)) = 1.0;
        basis.vectors.push_back(std::move(v0));
    }

    Eigen::VectorXd w(dim);
    while (basis.order() < target_order && !basis.exhausted) {
        const std::size_t n = basis.order();   // index of the vector being processed
        if (n == basis.vectors.size())
            // The candidate for this order was below tolerance in a previous
            // call; exhausted would have been set, so this cannot happen.
            throw std::logic_error("lanczos_extend: basis in inconsistent state");
        const Eigen::VectorXd& v = basis.vectors[n];
        apply_hamiltonian(h, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
                          std::span<double>(w.data(), static_cast<std::size_t>(w.size())));
        const double u = v.dot(w);
        basis.diagonal.push_back(u);
        w -= u * v;
        if (n > 0) w -= basis.offdiagonal[n - 1] * basis.vectors[n - 1];
        for (const Eigen::VectorXd& prev : basis.vectors) w -= prev.dot(w) * prev;
        const double vnorm = w.norm();
        if (vnorm < breakdown_tol) {
            basis.exhausted = true;
            break;
        }
        basis.offdiagonal.push_back(vnorm);
        basis.vectors.push_back(w / vnorm);
    }
}

[[nodiscard]] inline LanczosBasis lanczos_extend(const SparseHamiltonian& h, FockState alpha,
                                                 std::size_t target_order,
                                                 double breakdown_tol = default_breakdown_tol) {
    LanczosBasis basis;
    basis.root = alpha;
    lanczos_extend(h, basis, target_order, breakdown_tol);
    return basis;
}

/// Return probability of the order-m effective Hamiltonian:
/// L(t) = |(exp(-iTt))_{00}|^2 with T the stored tridiagonal matrix.
[[nodiscard]] inline ReturnSeries tli_return(const LanczosBasis& basis, const TimeGrid& grid) {
    if (basis.order() < 1) throw std::invalid_argument("tli_return: empty basis");
    const Eigen::Index m = static_cast<Eigen::Index>(basis.order());
    const Eigen::Map<const Eigen::VectorXd> diag(basis.diagonal.data(), m);
    const Eigen::Map<const Eigen::VectorXd> offdiag(basis.offdiagonal.data(), m - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, offdiag);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("tli_return: tridiagonal eigensolver failed");

    Eigen::VectorXd weight(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double s = solver.eigenvectors()(0, k);
        weight(k) = s * s;
    }
    ReturnSeries series;
    series.grid = grid;
    series.values.resize(grid.size());
    for (std::size_t t = 0; t < grid.size(); ++t) {
        const double time = grid.time(t);
        std::complex<double> amp = 0.0;
        for (Eigen::Index k = 0; k < m; ++k)
            amp += weight(k) * std::polar(1.0, -solver.eigenvalues()(k) * time);
        series.values[t] = std::norm(amp);
    }
    return series;
}

/// Time-averaged absolute deviation between two series on the same grid:
/// the trapezoid rule for (1/t_max) * integral of |exact - approx| dt.
[[nodiscard]] inline double cost(const ReturnSeries& exact, const ReturnSeries& approx) {
    if (!(exact.grid == approx.grid)) throw std::invalid_argument("cost: grid mismatch");
    if (exact.values.size() != approx.values.size())
        throw std::invalid_argument("cost: series length mismatch");
    if (exact.values.empty()) throw std::invalid_argument("cost: empty series");
    if (exact.values.size() == 1) return std::abs(exact.values[0] - approx.values[0]);

    double integral = 0.0;
    double prev = std::abs(exact.values[0] - approx.values[0]);
    for (std::size_t k = 1; k < exact.values.size(); ++k) {
        const double cur = std::abs(exact.values[k] - approx.values[k]);
        integral += 0.5 * (prev + cur) * exact.grid.dt;
        prev = cur;
    }
    return integral / exact.grid.time(exact.values.size() - 1);
}

struct TliResult {
    FockState state = 0;
    std::size_t m_c = 0;
    double achieved_cost = 0.0;
    /// Full Krylov dimension when breakdown was observed during the search,
    /// 0 when the search finished before exhausting the subspace.
    std::size_t krylov_dim = 0;
};

struct TliOptions {
    double cost_tol = default_cost_tol;
    double breakdown_tol = default_breakdown_tol;
    EvolveOptions evolve;
};

/// Smallest order m with cost(exact, tli_return(m)) <= cost_tol, found by a
/// linear scan that extends one Lanczos basis incrementally (cost need not
/// be monotone in m, so no bisection). Breakdown is a success path: the
/// truncated dynamics is then exact on the invariant subspace.
[[nodiscard]] inline TliResult find_mc(const SparseHamiltonian& h, FockState alpha,
                                       const TimeGrid& grid, const TliOptions& opts = {}) {
    const ReturnSeries exact = return_probability(h, alpha, grid, opts.evolve);
    LanczosBasis basis = lanczos_extend(h, alpha, 1, opts.breakdown_tol);

    TliResult result;
    result.state = alpha;
    for (;;) {
        const double deviation = cost(exact, tli_return(basis, grid));
        if (deviation <= opts.cost_tol) {
            result.m_c = basis.order();
            result.achieved_cost = deviation;
            result.krylov_dim = basis.exhausted ? basis.order() : 0;
            return result;
        }
        if (basis.exhausted)
            throw std::runtime_error(
                "find_mc: cost " + std::to_string(deviation) + " above tolerance at breakdown (order " +
                std::to_string(basis.order()) + ") for state " + std::to_string(alpha));
        const std::size_t before = basis.order();
        lanczos_extend(h, basis, before + 1, opts.breakdown_tol);
        if (basis.order() == before && !basis.exhausted)
            throw std::logic_error("find_mc: Lanczos basis failed to extend");
    }
}

// --- ensemble sweep of m_c ---------------------------------------------------

/// Aggregated minimal orders at one sweep point. The primary aggregate
/// averages within each realisation first; the LLS-weighted aggregate pools
/// every long-lived state with equal weight.
struct McPoint {
    double mu = 0.0;
    int n_sites = 0;
    std::uint64_t realisations_total = 0;   ///< scanned (non-excluded)
    std::uint64_t realisations_used = 0;    ///< hosting at least one LLS
    std::uint64_t excluded = 0;
    std::uint64_t n_lls_used = 0;
    double mean_mc = 0.0;
    double mean_mc_over_n = 0.0;
    double mean_mc_over_dh = 0.0;
    double lls_weighted_mc = 0.0;
    double lls_weighted_mc_over_n = 0.0;
    double lls_weighted_mc_over_dh = 0.0;
};

struct McOptions {
    int epsilon = 1;
    int min_range = 1;
    Boundary boundary = Boundary::periodic;
    std::size_t sector_capacity = default_sector_capacity;
    std::uint64_t candidate_cap = default_candidate_cap;
    LLSCriterion criterion;
    double cost_tol = default_cost_tol;
    double breakdown_tol = default_breakdown_tol;
    EvolveOptions evolve;
    std::size_t workers = 1;
};

/// For each (mu, realisation): find the long-lived states of the sector and
/// the minimal order of each, then average per realisation and across
/// realisations. Seeding matches ensemble_statistics, so the same
/// (master_seed, mu index, realisation) addresses the same disorder profile.
[[nodiscard]] inline std::vector<McPoint> mc_statistics(std::span<const double> mu_values,
                                                        int n_sites,
                                                        std::uint64_t n_realisations,
                                                        const TimeGrid& grid,
                                                        std::uint64_t master_seed,
                                                        const McOptions& opts = {}) {
    if (mu_values.empty()) throw std::invalid_argument("mc_statistics: empty mu grid");
    if (n_realisations == 0) throw std::invalid_argument("mc_statistics: need >= 1 realisation");

    struct Cell {
        bool excluded = false;
        std::uint64_t n_lls = 0;
        std::uint64_t dimension = 0;
        double mean_mc = 0.0;   ///< within-realisation mean, 0 when no LLS
    };
    std::vector<Cell> cells(mu_values.size() * n_realisations);

    parallel_for_indexed(cells.size(), opts.workers, [&](std::size_t task) {
        const std::size_t mu_idx = task / n_realisations;
        const std::uint64_t real_idx = task % n_realisations;
        Cell& cell = cells[task];
        try {
            const ConstraintProfile profile = sample_constraints(
                mu_values[mu_idx], opts.epsilon, n_sites, opts.min_range, opts.boundary,
                derive_seed(master_seed, sweep_key(mu_values[mu_idx]), real_idx), real_idx);
            const SectorBasis basis = build_sector(profile, opts.sector_capacity);
            const SparseHamiltonian h = build_hamiltonian(basis, profile);
            ScanOptions scan_opts;
            scan_opts.candidate_cap = opts.candidate_cap;
            scan_opts.evolve = opts.evolve;
            const ScanResult scan = scan_sector(h, grid, opts.criterion, scan_opts);
            cell.dimension = scan.dimension;

            TliOptions tli_opts;
            tli_opts.cost_tol = opts.cost_tol;
            tli_opts.breakdown_tol = opts.breakdown_tol;
            tli_opts.evolve = opts.evolve;
            double sum_mc = 0.0;
            for (const LLSRecord& rec : scan.records) {
                if (!rec.qualifies) continue;
                ++cell.n_lls;
                sum_mc += static_cast<double>(find_mc(h, rec.state, grid, tli_opts).m_c);
            }
            if (cell.n_lls > 0) cell.mean_mc = sum_mc / static_cast<double>(cell.n_lls);
        } catch (const std::exception&) {
            cell.excluded = true;
        }
    });

    std::vector<McPoint> points;
    points.reserve(mu_values.size());
    for (std::size_t mu_idx = 0; mu_idx < mu_values.size(); ++mu_idx) {
        McPoint pt;
        pt.mu = mu_values[mu_idx];
        pt.n_sites = n_sites;
        double sum_mean = 0.0, sum_mean_dh = 0.0;
        double sum_lls_mc = 0.0, sum_lls_mc_dh = 0.0;
        for (std::uint64_t r = 0; r < n_realisations; ++r) {
            const Cell& cell = cells[mu_idx * n_realisations + r];
            if (cell.excluded) {
                ++pt.excluded;
                continue;
            }
            ++pt.realisations_total;
            if (cell.n_lls == 0) continue;
            ++pt.realisations_used;
            pt.n_lls_used += cell.n_lls;
            sum_mean += cell.mean_mc;
            sum_mean_dh += cell.mean_mc / static_cast<double>(cell.dimension);
            sum_lls_mc += cell.mean_mc * static_cast<double>(cell.n_lls);
            sum_lls_mc_dh += cell.mean_mc * static_cast<double>(cell.n_lls) /
                             static_cast<double>(cell.dimension);
        }
        if (pt.realisations_used > 0) {
            const double n_real = static_cast<double>(pt.realisations_used);
            pt.mean_mc = sum_mean / n_real;
            pt.mean_mc_over_n = pt.mean_mc / static_cast<double>(n_sites);
            pt.mean_mc_over_dh = sum_mean_dh / n_real;
            const double n_lls = static_cast<double>(pt.n_lls_used);
            pt.lls_weighted_mc = sum_lls_mc / n_lls;
            pt.lls_weighted_mc_over_n = pt.lls_weighted_mc / static_cast<double>(n_sites);
            pt.lls_weighted_mc_over_dh = sum_lls_mc_dh / n_lls;
        }
        points.push_back(pt);
    }
    return points;
}

} // namespace rcspin
