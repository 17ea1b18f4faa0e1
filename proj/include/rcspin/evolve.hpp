#pragma once

/**
 * Time evolution under a sector Hamiltonian.
 *
 * Two propagators share one contract: `exact` expands in the full
 * eigenbasis (dense-limit sizes), `krylov` advances step by step in a
 * short-iterate Lanczos subspace with adaptive substepping. `auto_` picks
 * exact whenever the sector fits the dense limit.
 */

#include <rcspin/hamiltonian.hpp>
#include <rcspin/spectral.hpp>
#include <rcspin/time_grid.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rcspin {

enum class EvolveMethod { exact, krylov, auto_ };

struct EvolveOptions {
    EvolveMethod method = EvolveMethod::auto_;
    std::size_t dense_limit = default_dense_limit;
    std::size_t krylov_dim = 30;
    double substep_tol = 1e-10;
    std::size_t max_substeps = 4096;   ///< per grid step, before giving up
};

using StateVector = Eigen::VectorXcd;

/// Unit vector on the Fock state `alpha` in the sector basis.
[[nodiscard]] inline StateVector fock_vector(const SectorBasis& basis, FockState alpha) {
    const auto idx = basis.index_of(alpha);
    if (!idx) throw std::invalid_argument("fock_vector: state is not in the sector basis");
    StateVector v = StateVector::Zero(static_cast<Eigen::Index>(basis.dimension()));
    v(static_cast<Eigen::Index>(*idx)) = 1.0;
    return v;
}

inline void require_normalized(const StateVector& psi) {
    if (std::abs(psi.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("initial state is not normalized");
}

// --- exact path ----------------------------------------------------------

/// L(t_k) for the basis state at `row`, from an eigendecomposition:
/// L(t) = |sum_k U_{row,k}^2 exp(-i E_k t)|^2.
[[nodiscard]] inline ReturnSeries return_series_from_spectral(const SpectralData& spec,
                                                              std::size_t row,
                                                              const TimeGrid& grid) {
    if (!spec.has_vectors())
        throw std::invalid_argument("return_series_from_spectral: eigenvectors required");
    const Eigen::Index dim = spec.eigenvalues.size();
    Eigen::VectorXd w(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const double c = spec.eigenvectors(static_cast<Eigen::Index>(row), k);
        w(k) = c * c;
    }
    ReturnSeries series;
    series.grid = grid;
    series.values.resize(grid.size());
    for (std::size_t t = 0; t < grid.size(); ++t) {
        const double time = grid.time(t);
        std::complex<double> amp = 0.0;
        for (Eigen::Index k = 0; k < dim; ++k)
            amp += w(k) * std::polar(1.0, -spec.eigenvalues(k) * time);
        series.values[t] = std::norm(amp);
    }
    return series;
}

/// Return probabilities of every basis state at once, row blocks of the
/// matrix |W Z|^2 with W = U.^2 and Z_{k,t} = exp(-i E_k t_t). Calls
/// fn(row, values) for each basis state in ascending row order.
template <typename RowFn>
void for_each_return_series(const SpectralData& spec, const TimeGrid& grid, RowFn&& fn,
                            std::size_t block_rows = 256) {
    if (!spec.has_vectors())
        throw std::invalid_argument("for_each_return_series: eigenvectors required");
    const Eigen::Index dim = spec.eigenvalues.size();
    const Eigen::Index n_t = static_cast<Eigen::Index>(grid.size());

    Eigen::MatrixXcd phases(dim, n_t);
    for (Eigen::Index t = 0; t < n_t; ++t)
        for (Eigen::Index k = 0; k < dim; ++k)
            phases(k, t) = std::polar(1.0, -spec.eigenvalues(k) * grid.time(static_cast<std::size_t>(t)));

    std::vector<double> values(grid.size());
    for (Eigen::Index row0 = 0; row0 < dim; row0 += static_cast<Eigen::Index>(block_rows)) {
        const Eigen::Index rows = std::min<Eigen::Index>(static_cast<Eigen::Index>(block_rows),
                                                         dim - row0);
        const Eigen::MatrixXd w =
            spec.eigenvectors.middleRows(row0, rows).array().square().matrix();
        const Eigen::MatrixXcd amp = w * phases;
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index t = 0; t < n_t; ++t)
                values[static_cast<std::size_t>(t)] = std::norm(amp(r, t));
            fn(static_cast<std::size_t>(row0 + r), std::span<const double>(values));
        }
    }
}

/// Reference propagator via full diagonalization; norm preserved to 1e-12.
[[nodiscard]] inline std::vector<StateVector> evolve_exact(const SparseHamiltonian& h,
                                                           const StateVector& psi0,
                                                           const TimeGrid& grid,
                                                           std::size_t dense_limit = default_dense_limit) {
    if (static_cast<std::size_t>(psi0.size()) != h.dimension())
        throw std::invalid_argument("evolve_exact: state dimension mismatch");
    require_normalized(psi0);
    const SpectralData spec = diagonalize(h, /*keep_vectors=*/true, dense_limit);
    const Eigen::VectorXcd coeffs = spec.eigenvectors.transpose() * psi0;

    std::vector<StateVector> out;
    out.reserve(grid.size());
    Eigen::VectorXcd scaled(coeffs.size());
    for (std::size_t t = 0; t < grid.size(); ++t) {
        const double time = grid.time(t);
        for (Eigen::Index k = 0; k < coeffs.size(); ++k)
            scaled(k) = coeffs(k) * std::polar(1.0, -spec.eigenvalues(k) * time);
        out.emplace_back(spec.eigenvectors * scaled);
    }
    return out;
}

// --- Krylov path ----------------------------------------------------------

namespace detail {

/// One Lanczos subspace at the current state: orthonormal vectors, real
/// tridiagonal coefficients, and the eigendecomposition of T.
struct KrylovStep {
    std::vector<StateVector> vectors;
    Eigen::VectorXd diag;
    Eigen::VectorXd offdiag;        ///< one shorter than diag
    Eigen::VectorXd t_eigenvalues;
    Eigen::MatrixXd t_eigenvectors;
    bool exhausted = false;

    [[nodiscard]] Eigen::Index order() const { return diag.size(); }

    /// y(h) = exp(-i T h) e_1 in the Krylov coordinates.
    [[nodiscard]] Eigen::VectorXcd propagate_coeffs(double h) const {
        Eigen::VectorXcd y = Eigen::VectorXcd::Zero(order());
        for (Eigen::Index k = 0; k < order(); ++k) {
            const std::complex<double> phase = std::polar(1.0, -t_eigenvalues(k) * h);
            for (Eigen::Index j = 0; j < order(); ++j)
                y(j) += t_eigenvectors(j, k) * phase * t_eigenvectors(0, k);
        }
        return y;
    }
};

inline KrylovStep make_krylov_step(const SparseHamiltonian& h, const StateVector& psi,
                                   std::size_t max_dim, double breakdown_tol = 1e-12) {
    const Eigen::Index dim = static_cast<Eigen::Index>(h.dimension());
    const std::size_t m = std::min<std::size_t>(max_dim, h.dimension());

    KrylovStep step;
    step.vectors.reserve(m);
    std::vector<double> a, b;
    step.vectors.push_back(psi / psi.norm());

    StateVector w(dim);
    for (std::size_t n = 0; n < m; ++n) {
        const StateVector& v = step.vectors[n];
        apply_hamiltonian(h, std::span<const std::complex<double>>(v.data(), v.size()),
                          std::span<std::complex<double>>(w.data(), w.size()));
        const double alpha = w.dot(v).real();
        a.push_back(alpha);
        if (n + 1 == m) break;
        w -= alpha * v;
        if (n > 0) w -= b.back() * step.vectors[n - 1];
        // full reorthogonalization keeps the basis orthonormal at long orders
        for (const StateVector& u : step.vectors) w -= u.dot(w) * u;
        const double beta = w.norm();
        if (beta < breakdown_tol) {
            step.exhausted = true;
            break;
        }
        b.push_back(beta);
        step.vectors.push_back(w / beta);
    }

    step.diag = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
    step.offdiag = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(step.diag, step.offdiag);
    step.t_eigenvalues = solver.eigenvalues();
    step.t_eigenvectors = solver.eigenvectors();
    return step;
}

} // namespace detail

/// Short-iterate Lanczos propagator. Each grid step is covered by substeps
/// chosen so the magnitude of the last Krylov coefficient stays below
/// `substep_tol`; the state is renormalized after every substep.
[[nodiscard]] inline std::vector<StateVector> evolve_krylov(const SparseHamiltonian& h,
                                                            const StateVector& psi0,
                                                            const TimeGrid& grid,
                                                            std::size_t krylov_dim = 30,
                                                            double substep_tol = 1e-10,
                                                            std::size_t max_substeps = 4096) {
    if (static_cast<std::size_t>(psi0.size()) != h.dimension())
        throw std::invalid_argument("evolve_krylov: state dimension mismatch");
    require_normalized(psi0);

    std::vector<StateVector> out;
    out.reserve(grid.size());
    StateVector psi = psi0;
    out.push_back(psi);

    for (std::size_t t = 1; t < grid.size(); ++t) {
        double remaining = grid.dt;
        std::size_t substeps = 0;
        while (remaining > 0.0) {
            if (++substeps > max_substeps)
                throw std::runtime_error("evolve_krylov: substep budget exhausted");
            const detail::KrylovStep step = detail::make_krylov_step(h, psi, krylov_dim);
            double hstep = remaining;
            Eigen::VectorXcd y = step.propagate_coeffs(hstep);
            if (!step.exhausted) {
                while (std::abs(y(y.size() - 1)) >= substep_tol && hstep > remaining * 1e-12) {
                    hstep *= 0.5;
                    y = step.propagate_coeffs(hstep);
                }
                if (std::abs(y(y.size() - 1)) >= substep_tol)
                    throw std::runtime_error("evolve_krylov: local error cannot meet tolerance");
            }
            StateVector next = StateVector::Zero(psi.size());
            for (Eigen::Index j = 0; j < y.size(); ++j) next += y(j) * step.vectors[static_cast<std::size_t>(j)];
            psi = next / next.norm();
            remaining -= hstep;
        }
        out.push_back(psi);
    }
    return out;
}

// --- observables ----------------------------------------------------------

[[nodiscard]] inline EvolveMethod resolve_method(const EvolveOptions& opts, std::size_t dim) {
    if (opts.method != EvolveMethod::auto_) return opts.method;
    return dim <= opts.dense_limit ? EvolveMethod::exact : EvolveMethod::krylov;
}

/// Return probability L(t) = |<alpha|exp(-iHt)|alpha>|^2 of a Fock state.
[[nodiscard]] inline ReturnSeries return_probability(const SparseHamiltonian& h, FockState alpha,
                                                     const TimeGrid& grid,
                                                     const EvolveOptions& opts = {}) {
    const auto idx = h.basis.index_of(alpha);
    if (!idx) throw std::invalid_argument("return_probability: state is not in the sector");

    ReturnSeries series;
    series.grid = grid;
    if (resolve_method(opts, h.dimension()) == EvolveMethod::exact) {
        const SpectralData spec = diagonalize(h, /*keep_vectors=*/true, opts.dense_limit);
        return return_series_from_spectral(spec, *idx, grid);
    }
    const StateVector psi0 = fock_vector(h.basis, alpha);
    const std::vector<StateVector> states =
        evolve_krylov(h, psi0, grid, opts.krylov_dim, opts.substep_tol, opts.max_substeps);
    series.values.resize(grid.size());
    for (std::size_t t = 0; t < states.size(); ++t)
        series.values[t] = std::norm(states[t](static_cast<Eigen::Index>(*idx)));
    return series;
}

/// Up-spin occupation n_i(t_k) = sum_a |psi_a(t_k)|^2 bit_i(state_a).
[[nodiscard]] inline DensityProfile site_density(const SparseHamiltonian& h,
                                                 const StateVector& psi0, const TimeGrid& grid,
                                                 const EvolveOptions& opts = {}) {
    const int n = h.basis.n_sites;
    const std::vector<StateVector> states =
        resolve_method(opts, h.dimension()) == EvolveMethod::exact
            ? evolve_exact(h, psi0, grid, opts.dense_limit)
            : evolve_krylov(h, psi0, grid, opts.krylov_dim, opts.substep_tol, opts.max_substeps);

    DensityProfile profile;
    profile.grid = grid;
    profile.n_sites = n;
    profile.occupation.assign(grid.size() * static_cast<std::size_t>(n), 0.0);
    for (std::size_t t = 0; t < states.size(); ++t) {
        double* row = profile.occupation.data() + t * static_cast<std::size_t>(n);
        for (std::size_t a = 0; a < h.dimension(); ++a) {
            const double p = std::norm(states[t](static_cast<Eigen::Index>(a)));
            std::uint64_t bits = h.basis.states[a];
            while (bits) {
                const int i = std::countr_zero(bits);
                bits &= bits - 1;
                row[i] += p;
            }
        }
    }
    return profile;
}

} // namespace rcspin
