#pragma once

/**
 * Full diagonalization of sector Hamiltonians, eigenstate overlaps, and
 * level-spacing-ratio statistics.
 */

#include <rcspin/hamiltonian.hpp>
#include <rcspin/parallel.hpp>
#include <rcspin/rng.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rcspin {

inline constexpr std::size_t default_dense_limit = 4096;

/**
 * Eigendecomposition of a sector Hamiltonian. Eigenvalues ascend; columns of
 * `eigenvectors` match them (empty when not retained). The basis bitmasks are
 * kept so Fock states can be located without the originating basis object.
 */
struct SpectralData {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;          ///< 0x0 when keep_vectors = false
    std::vector<FockState> basis_states;
    int n_sites = 0;

    [[nodiscard]] std::size_t dimension() const {
        return static_cast<std::size_t>(eigenvalues.size());
    }
    [[nodiscard]] bool has_vectors() const { return eigenvectors.size() > 0; }
};

/// Dense real-symmetric eigensolve of the sector matrix. Eigenvector signs
/// follow a fixed convention: the largest-magnitude component of each column
/// is positive (first occurrence wins ties), so phases are reproducible.
[[nodiscard]] inline SpectralData diagonalize(const SparseHamiltonian& h,
                                              bool keep_vectors = true,
                                              std::size_t dense_limit = default_dense_limit) {
    const std::size_t dim = h.dimension();
    if (dim == 0) throw std::invalid_argument("diagonalize: empty basis");
    if (dim > dense_limit)
        throw std::invalid_argument("diagonalize: dimension " + std::to_string(dim) +
                                    " exceeds the dense limit of " + std::to_string(dense_limit));

    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                                  static_cast<Eigen::Index>(dim));
    for (std::size_t a = 0; a < dim; ++a)
        for (const std::uint32_t b : h.neighbors(a))
            dense(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.compute(dense, keep_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("diagonalize: eigensolver failed to converge");

    SpectralData out;
    out.eigenvalues = solver.eigenvalues();
    out.basis_states = h.basis.states;
    out.n_sites = h.basis.n_sites;
    if (keep_vectors) {
        out.eigenvectors = solver.eigenvectors();
        for (Eigen::Index k = 0; k < out.eigenvectors.cols(); ++k) {
            Eigen::Index imax = 0;
            out.eigenvectors.col(k).cwiseAbs().maxCoeff(&imax);
            if (out.eigenvectors(imax, k) < 0.0) out.eigenvectors.col(k) *= -1.0;
        }
    }
    return out;
}

/// Squared overlaps |<alpha|E_k>|^2, paired with E_k.
[[nodiscard]] inline std::vector<std::pair<double, double>> overlaps(const SpectralData& spec,
                                                                     FockState alpha) {
    if (!spec.has_vectors())
        throw std::invalid_argument("overlaps: eigenvectors were not retained");
    const auto it = std::lower_bound(spec.basis_states.begin(), spec.basis_states.end(), alpha);
    if (it == spec.basis_states.end() || *it != alpha)
        throw std::invalid_argument("overlaps: state is not in the sector basis");
    const Eigen::Index row = static_cast<Eigen::Index>(it - spec.basis_states.begin());

    std::vector<std::pair<double, double>> out;
    out.reserve(spec.dimension());
    for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
        const double c = spec.eigenvectors(row, k);
        out.emplace_back(spec.eigenvalues(k), c * c);
    }
    return out;
}

/** Consecutive-gap ratio statistics r_n = min(d_n, d_{n+1})/max(d_n, d_{n+1}). */
struct SpacingStats {
    std::vector<double> ratios;
    double mean = 0.0;
    std::size_t n_levels_used = 0;   ///< distinct levels after degeneracy collapse
    std::size_t collapsed = 0;       ///< levels merged away by the tolerance
    double degeneracy_tol = 0.0;
};

inline constexpr double default_degeneracy_tol = 1e-8;

/// Gap ratios over the distinct levels of an ascending spectrum. Levels
/// closer than `degeneracy_tol` to the previous distinct level are merged
/// first; zero modes otherwise flood the statistic with zero gaps. With
/// `central_fraction` < 1 only that central share of the distinct levels is
/// kept (spectral-edge levels discarded symmetrically) before ratios are
/// formed; the default keeps the whole spectrum.
[[nodiscard]] inline SpacingStats spacing_ratios(std::span<const double> eigenvalues,
                                                 double degeneracy_tol = default_degeneracy_tol,
                                                 double central_fraction = 1.0) {
    if (!(central_fraction > 0.0) || central_fraction > 1.0)
        throw std::invalid_argument("spacing_ratios: central_fraction must lie in (0, 1]");
    SpacingStats stats;
    stats.degeneracy_tol = degeneracy_tol;

    std::vector<double> levels;
    levels.reserve(eigenvalues.size());
    for (const double e : eigenvalues) {
        if (levels.empty() || e - levels.back() > degeneracy_tol)
            levels.push_back(e);
        else
            ++stats.collapsed;
    }
    if (central_fraction < 1.0 && levels.size() > 3) {
        const auto keep = std::max<std::size_t>(
            3, static_cast<std::size_t>(std::ceil(central_fraction *
                                                  static_cast<double>(levels.size()))));
        const std::size_t lo = (levels.size() - keep) / 2;
        levels = std::vector<double>(levels.begin() + static_cast<std::ptrdiff_t>(lo),
                                     levels.begin() + static_cast<std::ptrdiff_t>(lo + keep));
    }
    stats.n_levels_used = levels.size();
    if (levels.size() < 3)
        throw std::invalid_argument("spacing_ratios: need at least 3 distinct levels");

    stats.ratios.reserve(levels.size() - 2);
    double acc = 0.0;
    for (std::size_t n = 1; n + 1 < levels.size(); ++n) {
        const double d0 = levels[n] - levels[n - 1];
        const double d1 = levels[n + 1] - levels[n];
        const double r = std::min(d0, d1) / std::max(d0, d1);
        stats.ratios.push_back(r);
        acc += r;
    }
    stats.mean = acc / static_cast<double>(stats.ratios.size());
    return stats;
}

/** Ensemble-averaged <r> at one sweep point. */
struct LevelStatPoint {
    double mu = 0.0;
    int n_sites = 0;
    double mean_r = 0.0;
    double stderr_r = 0.0;
    std::uint64_t realisations_used = 0;
    std::uint64_t skipped = 0;   ///< sectors over the dense limit or too small
};

struct LevelStatOptions {
    int epsilon = 1;
    int min_range = 1;
    Boundary boundary = Boundary::periodic;
    std::size_t dense_limit = default_dense_limit;
    std::size_t sector_capacity = default_sector_capacity;
    double degeneracy_tol = default_degeneracy_tol;
    double central_fraction = 1.0;   ///< share of distinct levels kept, edges trimmed
    unsigned workers = 1;
};

/// Mean gap ratio of the |f> sector, averaged over disorder realisations,
/// one point per entry of `mu_values`. Realisations whose sector exceeds the
/// dense limit (or has fewer than 3 distinct levels) are skipped and counted.
[[nodiscard]] inline std::vector<LevelStatPoint> ensemble_level_stats(
    std::span<const double> mu_values, int n_sites, std::uint64_t n_realisations,
    std::uint64_t master_seed, const LevelStatOptions& opts = {}) {
    std::vector<LevelStatPoint> points(mu_values.size());
    const std::size_t tasks_per_mu = static_cast<std::size_t>(n_realisations);
    const std::size_t n_tasks = mu_values.size() * tasks_per_mu;

    struct Cell {
        double r = 0.0;
        bool used = false;
    };
    std::vector<Cell> cells(n_tasks);

    parallel_for_indexed(n_tasks, opts.workers, [&](std::size_t task) {
        const std::size_t mu_idx = task / tasks_per_mu;
        const std::uint64_t real_idx = task % tasks_per_mu;
        const std::uint64_t seed = derive_seed(master_seed, sweep_key(mu_values[mu_idx]), real_idx);
        const ConstraintProfile profile =
            sample_constraints(mu_values[mu_idx], opts.epsilon, n_sites, opts.min_range,
                               opts.boundary, seed, real_idx);
        try {
            const SectorBasis basis = build_sector(profile, opts.sector_capacity);
            if (basis.dimension() > opts.dense_limit) return;
            const SparseHamiltonian h = build_hamiltonian(basis, profile);
            const SpectralData spec = diagonalize(h, /*keep_vectors=*/false, opts.dense_limit);
            const std::vector<double> evals(spec.eigenvalues.data(),
                                            spec.eigenvalues.data() + spec.eigenvalues.size());
            const SpacingStats stats =
                spacing_ratios(evals, opts.degeneracy_tol, opts.central_fraction);
            cells[task] = {stats.mean, true};
        } catch (const std::invalid_argument&) {
            // sector too large or spectrum too degenerate; leave the cell unused
        }
    });

    for (std::size_t mu_idx = 0; mu_idx < mu_values.size(); ++mu_idx) {
        LevelStatPoint& pt = points[mu_idx];
        pt.mu = mu_values[mu_idx];
        pt.n_sites = n_sites;
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t r = 0; r < tasks_per_mu; ++r) {
            const Cell& c = cells[mu_idx * tasks_per_mu + r];
            if (!c.used) {
                ++pt.skipped;
                continue;
            }
            ++pt.realisations_used;
            sum += c.r;
            sumsq += c.r * c.r;
        }
        if (pt.realisations_used > 0) {
            const double n = static_cast<double>(pt.realisations_used);
            pt.mean_r = sum / n;
            if (pt.realisations_used > 1) {
                const double var = std::max(0.0, (sumsq - n * pt.mean_r * pt.mean_r) / (n - 1.0));
                pt.stderr_r = std::sqrt(var / n);
            }
        }
    }
    return points;
}

} // namespace rcspin
