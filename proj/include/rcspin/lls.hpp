#pragma once

/**
 * Long-lived-state detection and ensemble statistics.
 *
 * A basis state is long-lived when its return probability crosses a
 * threshold upward at least `min_crossings` times within the time window.
 * `scan_sector` classifies every state of a sector (or a deterministic
 * uniform sample once the sector exceeds `candidate_cap`);
 * `ensemble_statistics` sweeps disorder realisations over a mu grid and
 * aggregates the LLS probability p and density rho. Aggregation is factored
 * through `aggregate_outcomes` so that merging per-realisation records from
 * split runs reproduces a monolithic run bit for bit.
 */

#include <rcspin/constraints.hpp>
#include <rcspin/evolve.hpp>
#include <rcspin/hamiltonian.hpp>
#include <rcspin/parallel.hpp>
#include <rcspin/rng.hpp>
#include <rcspin/sector.hpp>
#include <rcspin/time_grid.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcspin {

struct LLSCriterion {
    double threshold = 0.5;
    int min_crossings = 3;
};

struct LLSRecord {
    FockState state = 0;
    int crossings = 0;
    bool qualifies = false;
};

/// Upward crossings on the sampled grid: indices k >= 1 with
/// values[k-1] < threshold and values[k] >= threshold. The initial point is
/// never counted, since it has no predecessor below the threshold.
[[nodiscard]] inline int count_threshold_crossings(std::span<const double> values,
                                                   double threshold) {
    if (values.empty()) throw std::invalid_argument("count_threshold_crossings: empty series");
    int crossings = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k - 1] < threshold && values[k] >= threshold) ++crossings;
    return crossings;
}

[[nodiscard]] inline int count_threshold_crossings(const ReturnSeries& series, double threshold) {
    return count_threshold_crossings(std::span<const double>(series.values), threshold);
}

[[nodiscard]] inline LLSRecord classify_lls(FockState state, std::span<const double> values,
                                            const LLSCriterion& criterion) {
    LLSRecord record;
    record.state = state;
    record.crossings = count_threshold_crossings(values, criterion.threshold);
    record.qualifies = record.crossings >= criterion.min_crossings;
    return record;
}

[[nodiscard]] inline LLSRecord classify_lls(FockState state, const ReturnSeries& series,
                                            const LLSCriterion& criterion) {
    return classify_lls(state, std::span<const double>(series.values), criterion);
}

inline constexpr std::uint64_t default_candidate_cap = 50000;

/// Classification of one sector under one criterion.
struct ScanResult {
    LLSCriterion criterion;
    std::vector<LLSRecord> records;   ///< per scanned state, empty when not kept
    std::uint64_t n_lls = 0;
    std::uint64_t dimension = 0;      ///< D_H
    std::uint64_t sample_size = 0;    ///< == dimension unless sampled
    bool sampled = false;
    /// LLS fraction; the unbiased sample estimate n_lls/sample_size when sampled.
    [[nodiscard]] double rho() const {
        return sample_size == 0 ? 0.0 : static_cast<double>(n_lls) / static_cast<double>(sample_size);
    }
};

struct ScanOptions {
    std::uint64_t candidate_cap = default_candidate_cap;
    EvolveOptions evolve;
    bool keep_records = true;
    std::size_t workers = 1;   ///< per-state parallelism on the Krylov path
};

namespace detail {

/// Deterministic uniform sample of `count` distinct row indices, keyed on the
/// sector's profile checksum (partial Fisher-Yates), returned sorted.
[[nodiscard]] inline std::vector<std::uint64_t> sample_rows(std::uint64_t dimension,
                                                            std::uint64_t count,
                                                            std::uint64_t key) {
    std::vector<std::uint64_t> rows(dimension);
    for (std::uint64_t i = 0; i < dimension; ++i) rows[i] = i;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t j = i + uniform_below(chain64(key, i), dimension - i);
        std::swap(rows[i], rows[j]);
    }
    rows.resize(count);
    std::sort(rows.begin(), rows.end());
    return rows;
}

} // namespace detail

/// Classify the sector's states under several criteria in one dynamics pass.
/// Uses the dense spectral engine when the sector fits the dense limit and
/// falls back to per-state Krylov propagation otherwise.
[[nodiscard]] inline std::vector<ScanResult> scan_sector(const SparseHamiltonian& h,
                                                         const TimeGrid& grid,
                                                         std::span<const LLSCriterion> criteria,
                                                         const ScanOptions& opts = {}) {
    if (criteria.empty()) throw std::invalid_argument("scan_sector: no criteria given");
    const std::uint64_t dim = h.dimension();
    if (dim == 0) throw std::invalid_argument("scan_sector: empty sector");

    const bool sampled = dim > opts.candidate_cap;
    std::vector<std::uint64_t> rows;
    if (sampled)
        rows = detail::sample_rows(dim, opts.candidate_cap,
                                   chain64(h.basis.profile_checksum, 0x73616d706c65ULL));
    const std::uint64_t sample_size = sampled ? opts.candidate_cap : dim;

    std::vector<ScanResult> results(criteria.size());
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        results[c].criterion = criteria[c];
        results[c].dimension = dim;
        results[c].sample_size = sample_size;
        results[c].sampled = sampled;
        if (opts.keep_records) results[c].records.reserve(sample_size);
    }

    const auto classify_state = [&](std::size_t row, std::span<const double> values) {
        for (std::size_t c = 0; c < criteria.size(); ++c) {
            const LLSRecord rec = classify_lls(h.basis.states[row], values, criteria[c]);
            if (rec.qualifies) ++results[c].n_lls;
            if (opts.keep_records) results[c].records.push_back(rec);
        }
    };

    if (dim <= opts.evolve.dense_limit) {
        const SpectralData spec = diagonalize(h, /*keep_vectors=*/true, opts.evolve.dense_limit);
        for_each_return_series(spec, grid, [&](std::size_t row, std::span<const double> values) {
            if (sampled && !std::binary_search(rows.begin(), rows.end(), row)) return;
            classify_state(row, values);
        });
        return results;
    }

    // Krylov path: evolve each candidate state independently.
    if (!sampled) {
        rows.resize(dim);
        for (std::uint64_t i = 0; i < dim; ++i) rows[i] = i;
    }
    std::vector<std::vector<double>> series(rows.size());
    parallel_for_indexed(rows.size(), opts.workers, [&](std::size_t i) {
        const FockState alpha = h.basis.states[rows[i]];
        try {
            EvolveOptions ev = opts.evolve;
            ev.method = EvolveMethod::krylov;
            series[i] = return_probability(h, alpha, grid, ev).values;
        } catch (const std::exception& e) {
            throw std::runtime_error("scan_sector: propagation failed for state " +
                                     std::to_string(alpha) + ": " + e.what());
        }
    });
    for (std::size_t i = 0; i < rows.size(); ++i)
        classify_state(rows[i], std::span<const double>(series[i]));
    return results;
}

[[nodiscard]] inline ScanResult scan_sector(const SparseHamiltonian& h, const TimeGrid& grid,
                                            const LLSCriterion& criterion,
                                            const ScanOptions& opts = {}) {
    return scan_sector(h, grid, std::span<const LLSCriterion>(&criterion, 1), opts)[0];
}

// --- ensemble sweep --------------------------------------------------------

/// Everything needed to re-aggregate one realisation of one sweep point.
struct RealisationOutcome {
    double mu = 0.0;
    int n_sites = 0;
    std::uint64_t realisation_index = 0;
    std::uint64_t seed = 0;             ///< derived seed the profile was drawn with
    std::uint64_t dimension = 0;        ///< D_H, 0 when excluded
    std::uint64_t sample_size = 0;
    std::vector<std::uint64_t> n_lls;   ///< one entry per criterion
    bool excluded = false;
    std::string error;                  ///< diagnostic when excluded
};

/// Aggregated sweep point for one criterion.
struct EnsemblePoint {
    double mu = 0.0;
    int n_sites = 0;
    LLSCriterion criterion;
    std::uint64_t realisations = 0;   ///< realisations used (excluded not counted)
    std::uint64_t excluded = 0;
    double p = 0.0;                   ///< fraction of realisations with >= 1 LLS
    double p_err = 0.0;               ///< binomial standard error
    double rho_mean = 0.0;
    double rho_stderr = 0.0;          ///< sample standard error of the mean
    double mean_sector_dim = 0.0;
};

struct EnsembleOptions {
    int epsilon = 1;
    int min_range = 1;
    Boundary boundary = Boundary::periodic;
    std::size_t sector_capacity = default_sector_capacity;
    std::uint64_t candidate_cap = default_candidate_cap;
    EvolveOptions evolve;
    std::size_t workers = 1;
    /// First realisation index; lets a sweep be split across runs whose merged
    /// records equal a monolithic run over the union of index ranges.
    std::uint64_t realisation_offset = 0;
};

/// Deterministic re-aggregation of per-realisation records. Records are
/// sorted by (mu, realisation_index, seed) and grouped by exact mu equality,
/// so any split of the same records yields bit-identical points.
[[nodiscard]] inline std::vector<std::vector<EnsemblePoint>>
aggregate_outcomes(std::vector<RealisationOutcome> records,
                   std::span<const LLSCriterion> criteria) {
    std::sort(records.begin(), records.end(),
              [](const RealisationOutcome& a, const RealisationOutcome& b) {
                  if (a.mu != b.mu) return a.mu < b.mu;
                  if (a.realisation_index != b.realisation_index)
                      return a.realisation_index < b.realisation_index;
                  return a.seed < b.seed;
              });

    std::vector<std::vector<EnsemblePoint>> out(criteria.size());
    std::size_t begin = 0;
    while (begin < records.size()) {
        std::size_t end = begin;
        while (end < records.size() && records[end].mu == records[begin].mu) ++end;

        for (std::size_t c = 0; c < criteria.size(); ++c) {
            EnsemblePoint pt;
            pt.mu = records[begin].mu;
            pt.n_sites = records[begin].n_sites;
            pt.criterion = criteria[c];
            double sum_rho = 0.0, sum_dim = 0.0;
            std::uint64_t with_lls = 0;
            for (std::size_t i = begin; i < end; ++i) {
                const RealisationOutcome& r = records[i];
                if (r.excluded) {
                    ++pt.excluded;
                    continue;
                }
                if (r.n_lls.size() != criteria.size())
                    throw std::invalid_argument("aggregate_outcomes: criterion count mismatch");
                ++pt.realisations;
                if (r.n_lls[c] >= 1) ++with_lls;
                sum_rho += static_cast<double>(r.n_lls[c]) / static_cast<double>(r.sample_size);
                sum_dim += static_cast<double>(r.dimension);
            }
            if (pt.realisations > 0) {
                const double n = static_cast<double>(pt.realisations);
                pt.p = static_cast<double>(with_lls) / n;
                pt.p_err = std::sqrt(pt.p * (1.0 - pt.p) / n);
                pt.rho_mean = sum_rho / n;
                pt.mean_sector_dim = sum_dim / n;
                if (pt.realisations > 1) {
                    double ss = 0.0;
                    for (std::size_t i = begin; i < end; ++i) {
                        const RealisationOutcome& r = records[i];
                        if (r.excluded) continue;
                        const double x =
                            static_cast<double>(r.n_lls[c]) / static_cast<double>(r.sample_size);
                        ss += (x - pt.rho_mean) * (x - pt.rho_mean);
                    }
                    pt.rho_stderr = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
                }
            }
            out[c].push_back(pt);
        }
        begin = end;
    }
    return out;
}

struct EnsembleSweep {
    std::vector<std::vector<EnsemblePoint>> points;   ///< [criterion][mu point]
    std::vector<RealisationOutcome> records;          ///< sorted by (mu, realisation)
};

/// Sweep: for each mu and realisation, draw a profile with seed
/// derive_seed(master_seed, sweep_key(mu), realisation), build the sector of
/// the fully facilitating state, scan it, and aggregate. Realisations whose
/// sector exceeds capacity (or whose propagation fails) are excluded and
/// counted. Results are independent of the worker count.
[[nodiscard]] inline EnsembleSweep ensemble_statistics(std::span<const double> mu_values,
                                                       int n_sites,
                                                       std::uint64_t n_realisations,
                                                       const TimeGrid& grid,
                                                       std::span<const LLSCriterion> criteria,
                                                       std::uint64_t master_seed,
                                                       const EnsembleOptions& opts = {}) {
    if (mu_values.empty()) throw std::invalid_argument("ensemble_statistics: empty mu grid");
    if (n_realisations == 0) throw std::invalid_argument("ensemble_statistics: need >= 1 realisation");
    if (criteria.empty()) throw std::invalid_argument("ensemble_statistics: no criteria given");

    EnsembleSweep sweep;
    sweep.records.resize(mu_values.size() * n_realisations);

    parallel_for_indexed(sweep.records.size(), opts.workers, [&](std::size_t task) {
        const std::size_t mu_idx = task / n_realisations;
        const std::uint64_t real_idx = opts.realisation_offset + task % n_realisations;
        RealisationOutcome& rec = sweep.records[task];
        rec.mu = mu_values[mu_idx];
        rec.n_sites = n_sites;
        rec.realisation_index = real_idx;
        rec.seed = derive_seed(master_seed, sweep_key(rec.mu), real_idx);
        rec.n_lls.assign(criteria.size(), 0);
        try {
            const ConstraintProfile profile =
                sample_constraints(rec.mu, opts.epsilon, n_sites, opts.min_range, opts.boundary,
                                   rec.seed, real_idx);
            const SectorBasis basis = build_sector(profile, opts.sector_capacity);
            const SparseHamiltonian h = build_hamiltonian(basis, profile);
            ScanOptions scan_opts;
            scan_opts.candidate_cap = opts.candidate_cap;
            scan_opts.evolve = opts.evolve;
            scan_opts.keep_records = false;
            const std::vector<ScanResult> scans = scan_sector(h, grid, criteria, scan_opts);
            rec.dimension = scans[0].dimension;
            rec.sample_size = scans[0].sample_size;
            for (std::size_t c = 0; c < criteria.size(); ++c) rec.n_lls[c] = scans[c].n_lls;
        } catch (const std::exception& e) {
            rec.excluded = true;
            rec.error = e.what();
        }
    });

    sweep.points = aggregate_outcomes(sweep.records, criteria);
    return sweep;
}

[[nodiscard]] inline EnsembleSweep ensemble_statistics(std::span<const double> mu_values,
                                                       int n_sites, std::uint64_t n_realisations,
                                                       const TimeGrid& grid,
                                                       const LLSCriterion& criterion,
                                                       std::uint64_t master_seed,
                                                       const EnsembleOptions& opts = {}) {
    return ensemble_statistics(mu_values, n_sites, n_realisations, grid,
                               std::span<const LLSCriterion>(&criterion, 1), master_seed, opts);
}

} // namespace rcspin
