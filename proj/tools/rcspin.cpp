/**
 * rcspin — command-line driver.
 *
 * Subcommands: evolve, scan, ensemble, tli, defect, levels, merge, selftest.
 * Every data-producing run writes CSV output plus a JSON manifest holding
 * the resolved configuration and per-realisation seed table.
 *
 * Exit codes: 0 success, 1 configuration error, 2 runtime failure,
 * 3 selftest failure.
 */

#include <rcspin/rcspin.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace {

using namespace rcspin;

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_runtime = 2;
constexpr int exit_selftest = 3;

std::string join_argv(int argc, char** argv) {
    std::string joined;
    for (int i = 0; i < argc; ++i) {
        if (i) joined += ' ';
        joined += argv[i];
    }
    return joined;
}

/// Resolve the mu sweep: --mu-over-n values scaled by N, else the single
/// absolute --mu.
std::vector<double> sweep_mu_values(const Settings& s, bool use_default_sweep) {
    std::vector<double> over_n = s.mu_over_n;
    if (over_n.empty() && use_default_sweep) over_n = default_mu_over_n_sweep();
    if (over_n.empty()) return {s.mu};
    std::vector<double> mus(over_n.size());
    for (std::size_t i = 0; i < over_n.size(); ++i) mus[i] = over_n[i] * s.n_sites;
    return mus;
}

FockState parse_state(const std::string& text, int n_sites) {
    if (text == "f" || text == "0") return 0;
    if (text == "z2") return z2_state(n_sites);
    if (text == "z2b") return z2_state(n_sites, 1);
    try {
        return parse_u64(text);
    } catch (const std::exception&) {
        throw ConfigError({"--state must be 'f', 'z2', 'z2b', or a bitmask integer, got '" +
                           text + "'"});
    }
}

RunManifest start_manifest(const std::string& subcommand, const Settings& s, int argc,
                           char** argv) {
    RunManifest manifest;
    manifest.command_line = join_argv(argc, argv);
    manifest.subcommand = subcommand;
    manifest.settings = s;
    manifest.master_seed = s.seed;
    manifest.started_at = iso8601_now();
    return manifest;
}

void finish_manifest(RunManifest& manifest, const std::string& out_prefix) {
    manifest.finished_at = iso8601_now();
    const std::string path = out_prefix + "_manifest.json";
    write_manifest(manifest, path);
    std::printf("manifest: %s\n", path.c_str());
}

void write_csv_file(const std::string& path, const std::function<void(std::ostream&)>& body,
                    RunManifest& manifest) {
    auto out = open_output(path);
    body(out);
    out.close();
    manifest.add_output(path);
    std::printf("wrote: %s\n", path.c_str());
}

ConstraintProfile make_profile(const Settings& s) {
    return sample_constraints(s.mu, s.epsilon, s.n_sites, s.min_range, s.boundary, s.seed,
                              s.realisation_offset);
}

// --- subcommand bodies -------------------------------------------------------

int run_evolve(const Settings& s, const std::string& state_text, const std::string& out_prefix,
               int argc, char** argv) {
    const ConstraintProfile profile = make_profile(s);
    const SectorBasis basis = build_sector(profile, s.sector_capacity);
    const FockState alpha = parse_state(state_text, s.n_sites);
    if (!basis.contains(alpha))
        throw ConfigError({"initial state " + std::to_string(alpha) +
                           " is not in the sector of the fully facilitating state"});
    const SparseHamiltonian h = build_hamiltonian(basis, profile);
    const TimeGrid grid = make_grid(s);
    const EvolveOptions evolve_opts = make_evolve_options(s);

    RunManifest manifest = start_manifest("evolve", s, argc, argv);
    manifest.extra = {{"profile", profile}, {"state", alpha}, {"sector_dimension", basis.dimension()}};

    const ReturnSeries series = return_probability(h, alpha, grid, evolve_opts);
    const DensityProfile density = site_density(h, fock_vector(basis, alpha), grid, evolve_opts);
    write_csv_file(out_prefix + "_return.csv",
                   [&](std::ostream& out) { write_series_csv(out, series); }, manifest);
    write_csv_file(out_prefix + "_density.csv",
                   [&](std::ostream& out) { write_density_csv(out, density); }, manifest);

    const LLSRecord rec = classify_lls(alpha, series, make_criterion(s));
    std::printf("D_H=%zu state=%llu crossings=%d qualifies=%d\n", h.dimension(),
                static_cast<unsigned long long>(alpha), rec.crossings, rec.qualifies ? 1 : 0);
    finish_manifest(manifest, out_prefix);
    return exit_ok;
}

int run_scan(const Settings& s, const std::string& out_prefix, int argc, char** argv) {
    const ConstraintProfile profile = make_profile(s);
    const SectorBasis basis = build_sector(profile, s.sector_capacity);
    const SparseHamiltonian h = build_hamiltonian(basis, profile);
    const TimeGrid grid = make_grid(s);

    ScanOptions scan_opts;
    scan_opts.candidate_cap = s.candidate_cap;
    scan_opts.evolve = make_evolve_options(s);
    scan_opts.workers = s.workers ? s.workers : default_workers();

    RunManifest manifest = start_manifest("scan", s, argc, argv);
    const ScanResult result = scan_sector(h, grid, make_criterion(s), scan_opts);
    manifest.extra = {{"profile", profile},
                      {"sector_dimension", result.dimension},
                      {"sample_size", result.sample_size},
                      {"sampled", result.sampled},
                      {"n_lls", result.n_lls},
                      {"rho", result.rho()}};

    write_csv_file(out_prefix + ".csv", [&](std::ostream& out) { write_scan_csv(out, result); },
                   manifest);
    std::printf("D_H=%llu n_lls=%llu rho=%s%s\n",
                static_cast<unsigned long long>(result.dimension),
                static_cast<unsigned long long>(result.n_lls), format_double(result.rho()).c_str(),
                result.sampled ? " (sampled)" : "");
    finish_manifest(manifest, out_prefix);
    return exit_ok;
}

int run_ensemble(const Settings& s, const std::string& out_prefix, int argc, char** argv) {
    const std::vector<double> mus = sweep_mu_values(s, /*use_default_sweep=*/true);
    const TimeGrid grid = make_grid(s);
    const LLSCriterion criterion = make_criterion(s);

    EnsembleOptions opts;
    opts.epsilon = s.epsilon;
    opts.min_range = s.min_range;
    opts.boundary = s.boundary;
    opts.sector_capacity = s.sector_capacity;
    opts.candidate_cap = s.candidate_cap;
    opts.evolve = make_evolve_options(s);
    opts.workers = s.workers ? s.workers : default_workers();
    opts.realisation_offset = s.realisation_offset;

    RunManifest manifest = start_manifest("ensemble", s, argc, argv);
    fill_seed_table(manifest, mus, s.realisations, s.realisation_offset);

    const EnsembleSweep sweep = ensemble_statistics(std::span<const double>(mus), s.n_sites,
                                                    s.realisations, grid, criterion, s.seed, opts);

    const RecordsMeta meta{s.n_sites, grid,       criterion,      s.epsilon,
                           s.min_range, s.boundary, s.candidate_cap};
    write_csv_file(out_prefix + ".csv",
                   [&](std::ostream& out) {
                       write_ensemble_csv(out, std::span<const EnsemblePoint>(sweep.points[0]));
                   },
                   manifest);
    write_csv_file(out_prefix + "_records.csv",
                   [&](std::ostream& out) {
                       write_records_csv(out, meta,
                                         std::span<const RealisationOutcome>(sweep.records));
                   },
                   manifest);
    for (const EnsemblePoint& pt : sweep.points[0])
        std::printf("mu/N=%s p=%s rho=%s\n", format_double(pt.mu / pt.n_sites).c_str(),
                    format_double(pt.p).c_str(), format_double(pt.rho_mean).c_str());
    finish_manifest(manifest, out_prefix);
    return exit_ok;
}

int run_tli(const Settings& s, const std::string& out_prefix, int argc, char** argv) {
    const std::vector<double> mus = sweep_mu_values(s, /*use_default_sweep=*/true);
    const TimeGrid grid = make_grid(s);

    McOptions opts;
    opts.epsilon = s.epsilon;
    opts.min_range = s.min_range;
    opts.boundary = s.boundary;
    opts.sector_capacity = s.sector_capacity;
    opts.candidate_cap = s.candidate_cap;
    opts.criterion = make_criterion(s);
    opts.cost_tol = s.cost_tol;
    opts.evolve = make_evolve_options(s);
    opts.workers = s.workers ? s.workers : default_workers();

    RunManifest manifest = start_manifest("tli", s, argc, argv);
    fill_seed_table(manifest, mus, s.realisations, 0);

    const std::vector<McPoint> points =
        mc_statistics(std::span<const double>(mus), s.n_sites, s.realisations, grid, s.seed, opts);

    nlohmann::json aggregates = nlohmann::json::array();
    for (const McPoint& pt : points)
        aggregates.push_back({{"mu", pt.mu},
                              {"realisations_total", pt.realisations_total},
                              {"realisations_used", pt.realisations_used},
                              {"excluded", pt.excluded},
                              {"n_lls_used", pt.n_lls_used},
                              {"mean_mc", pt.mean_mc},
                              {"lls_weighted_mc", pt.lls_weighted_mc},
                              {"lls_weighted_mc_over_n", pt.lls_weighted_mc_over_n},
                              {"lls_weighted_mc_over_dh", pt.lls_weighted_mc_over_dh}});
    manifest.extra = {{"aggregates", aggregates}};

    write_csv_file(out_prefix + ".csv",
                   [&](std::ostream& out) {
                       write_tli_csv(out, std::span<const McPoint>(points));
                   },
                   manifest);
    for (const McPoint& pt : points)
        std::printf("mu/N=%s mean_mc=%s (over %llu LLS)\n",
                    format_double(pt.mu / pt.n_sites).c_str(), format_double(pt.mean_mc).c_str(),
                    static_cast<unsigned long long>(pt.n_lls_used));
    finish_manifest(manifest, out_prefix);
    return exit_ok;
}

int run_defect(const Settings& s, int site, int strength, const std::string& state_text,
               const std::string& out_prefix, int argc, char** argv) {
    const ConstraintProfile profile =
        apply_defect(pxp_profile(s.n_sites, s.boundary), DefectSpec{site, strength});
    const SectorBasis basis = build_sector(profile, s.sector_capacity);
    const FockState alpha = parse_state(state_text, s.n_sites);
    if (!basis.contains(alpha))
        throw ConfigError({"initial state " + std::to_string(alpha) +
                           " is not in the defect sector"});
    const SparseHamiltonian h = build_hamiltonian(basis, profile);
    const TimeGrid grid = make_grid(s);
    const EvolveOptions evolve_opts = make_evolve_options(s);

    RunManifest manifest = start_manifest("defect", s, argc, argv);
    manifest.extra = {{"profile", profile},
                      {"defect", {{"site", site}, {"strength", strength}}},
                      {"state", alpha},
                      {"sector_dimension", basis.dimension()}};

    const ReturnSeries series = return_probability(h, alpha, grid, evolve_opts);
    const DensityProfile density = site_density(h, fock_vector(basis, alpha), grid, evolve_opts);
    write_csv_file(out_prefix + "_return.csv",
                   [&](std::ostream& out) { write_series_csv(out, series); }, manifest);
    write_csv_file(out_prefix + "_density.csv",
                   [&](std::ostream& out) { write_density_csv(out, density); }, manifest);

    if (basis.dimension() <= s.dense_limit) {
        const SpectralData spec = diagonalize(h, /*keep_vectors=*/true, s.dense_limit);
        const auto scatter = overlaps(spec, alpha);
        write_csv_file(out_prefix + "_overlaps.csv",
                       [&](std::ostream& out) {
                           write_overlaps_csv(
                               out, std::span<const std::pair<double, double>>(scatter));
                       },
                       manifest);
    } else {
        std::fprintf(stderr, "note: sector dimension %zu above dense limit, overlap scatter skipped\n",
                     basis.dimension());
    }

    const LLSRecord rec = classify_lls(alpha, series, make_criterion(s));
    std::printf("D_H=%zu q=%d site=%d crossings=%d qualifies=%d\n", h.dimension(), strength, site,
                rec.crossings, rec.qualifies ? 1 : 0);
    finish_manifest(manifest, out_prefix);
    return exit_ok;
}

int run_levels(const Settings& s, const std::string& out_prefix, int argc, char** argv) {
    const std::vector<double> mus = sweep_mu_values(s, /*use_default_sweep=*/true);

    LevelStatOptions opts;
    opts.epsilon = s.epsilon;
    opts.min_range = s.min_range;
    opts.boundary = s.boundary;
    opts.dense_limit = s.dense_limit;
    opts.sector_capacity = s.sector_capacity;
    opts.degeneracy_tol = s.degeneracy_tol;
    opts.central_fraction = s.central_fraction;
    opts.workers = s.workers ? s.workers : default_workers();

    RunManifest manifest = start_manifest("levels", s, argc, argv);
    fill_seed_table(manifest, mus, s.realisations, 0);

    const std::vector<LevelStatPoint> points = ensemble_level_stats(
        std::span<const double>(mus), s.n_sites, s.realisations, s.seed, opts);

    write_csv_file(out_prefix + ".csv",
                   [&](std::ostream& out) {
                       write_levels_csv(out, std::span<const LevelStatPoint>(points));
                   },
                   manifest);
    for (const LevelStatPoint& pt : points)
        std::printf("mu/N=%s mean_r=%s +- %s\n", format_double(pt.mu / pt.n_sites).c_str(),
                    format_double(pt.mean_r).c_str(), format_double(pt.stderr_r).c_str());
    finish_manifest(manifest, out_prefix);
    return exit_ok;
}

int run_merge(const std::vector<std::string>& inputs, const std::string& out_prefix, int argc,
              char** argv) {
    if (inputs.size() < 1) throw ConfigError({"merge needs at least one records file"});

    RecordsMeta meta;
    std::vector<RealisationOutcome> records;
    std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> seen;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        RecordsFile file = read_records_csv(inputs[i]);
        if (i == 0) {
            meta = file.meta;
        } else if (!(file.meta == meta)) {
            throw ConfigError({"records file " + inputs[i] +
                               " was produced under a different sweep context (grid, criterion, "
                               "model, or cap differ); refusing to merge"});
        }
        for (RealisationOutcome& rec : file.records) {
            const auto key = std::make_tuple(sweep_key(rec.mu), rec.seed, rec.realisation_index);
            if (!seen.insert(key).second)
                throw ConfigError({"duplicate realisation in " + inputs[i] + ": mu=" +
                                   format_double(rec.mu) + " seed=" + std::to_string(rec.seed) +
                                   " index=" + std::to_string(rec.realisation_index)});
            records.push_back(std::move(rec));
        }
    }

    const LLSCriterion criterion = meta.criterion;
    const auto points =
        aggregate_outcomes(records, std::span<const LLSCriterion>(&criterion, 1));

    RunManifest manifest;
    manifest.command_line = join_argv(argc, argv);
    manifest.subcommand = "merge";
    manifest.settings.n_sites = meta.n_sites;
    manifest.settings.t_max = meta.grid.t_max;
    manifest.settings.dt = meta.grid.dt;
    manifest.settings.threshold = criterion.threshold;
    manifest.settings.min_crossings = criterion.min_crossings;
    manifest.settings.epsilon = meta.epsilon;
    manifest.settings.min_range = meta.min_range;
    manifest.settings.boundary = meta.boundary;
    manifest.settings.candidate_cap = meta.candidate_cap;
    manifest.started_at = iso8601_now();
    manifest.extra = {{"inputs", inputs}, {"merged_records", records.size()}};

    // Records are re-sorted exactly as aggregate_outcomes orders them, so a
    // merged records file re-merges to the same bytes.
    std::vector<RealisationOutcome> sorted = records;
    std::sort(sorted.begin(), sorted.end(),
              [](const RealisationOutcome& a, const RealisationOutcome& b) {
                  if (a.mu != b.mu) return a.mu < b.mu;
                  if (a.realisation_index != b.realisation_index)
                      return a.realisation_index < b.realisation_index;
                  return a.seed < b.seed;
              });

    write_csv_file(out_prefix + ".csv",
                   [&](std::ostream& out) {
                       write_ensemble_csv(out, std::span<const EnsemblePoint>(points[0]));
                   },
                   manifest);
    write_csv_file(out_prefix + "_records.csv",
                   [&](std::ostream& out) {
                       write_records_csv(out, meta,
                                         std::span<const RealisationOutcome>(sorted));
                   },
                   manifest);
    std::printf("merged %zu records from %zu files into %zu sweep points\n", records.size(),
                inputs.size(), points[0].size());
    finish_manifest(manifest, out_prefix);
    return exit_ok;
}

// --- selftest ----------------------------------------------------------------

struct SelftestReport {
    int failures = 0;
    void check(const std::string& name, bool ok, const std::string& detail = "") {
        if (ok) {
            std::printf("[ok]   %s\n", name.c_str());
        } else {
            ++failures;
            std::printf("[fail] %s%s\n", name.c_str(),
                        detail.empty() ? "" : (": " + detail).c_str());
        }
    }
};

int run_selftest() {
    SelftestReport report;

    // analytic free-spin oracle: decoupled spins give L(t) = cos^{2N}(t)
    for (int n : {2, 4, 8}) {
        const ConstraintProfile profile =
            sample_constraints(0.0, 0, n, 0, Boundary::periodic, 1, 0);
        const SparseHamiltonian h = build_hamiltonian(build_sector(profile), profile);
        const TimeGrid grid{18.0, 0.05};
        const ReturnSeries series = return_probability(h, 0, grid);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            worst = std::max(worst, std::abs(series.values[k] -
                                             std::pow(std::cos(grid.time(k)), 2 * n)));
        report.check("free-spin return probability N=" + std::to_string(n),
                     worst < 1e-10, "max deviation " + format_double(worst));
    }

    // hard-blockade sector dimensions follow the Lucas sequence
    for (const auto& [n, expected] : std::vector<std::pair<int, std::size_t>>{
             {4, 7}, {6, 18}, {12, 322}}) {
        const ConstraintProfile profile = pxp_profile(n, Boundary::periodic);
        const SectorBasis basis = build_sector(profile);
        report.check("blockade sector dimension N=" + std::to_string(n),
                     basis.dimension() == expected,
                     "got " + std::to_string(basis.dimension()));
    }

    // crossing counting on analytic series
    {
        std::vector<double> cosq;
        for (double t = 0.0; t <= 4.0 * M_PI + 1e-12; t += 0.01)
            cosq.push_back(std::pow(std::cos(t), 4));
        report.check("crossing count cos^4 window",
                     count_threshold_crossings(std::span<const double>(cosq), 0.5) == 4);
        std::vector<double> decay;
        for (int k = 0; k <= 100; ++k) decay.push_back(1.0 / (1.0 + k));
        report.check("crossing count monotone decay",
                     count_threshold_crossings(std::span<const double>(decay), 0.5) == 0);
        const std::vector<double> flat(100, 1.0);
        report.check("crossing count constant series",
                     count_threshold_crossings(std::span<const double>(flat), 0.5) == 0);
    }

    // Lanczos structure on the free model
    {
        const ConstraintProfile profile =
            sample_constraints(0.0, 0, 6, 0, Boundary::periodic, 1, 0);
        const SparseHamiltonian h = build_hamiltonian(build_sector(profile), profile);
        const LanczosBasis basis = lanczos_extend(h, 0, 100);
        report.check("free-model Krylov breakdown at N+1",
                     basis.exhausted && basis.order() == 7,
                     "order " + std::to_string(basis.order()));
        report.check("Lanczos zero diagonal", std::abs(basis.diagonal[0]) < 1e-14);
        report.check("Lanczos first offdiagonal = sqrt(degree)",
                     std::abs(basis.offdiagonal[0] - std::sqrt(6.0)) < 1e-12);
        const TimeGrid grid{18.0, 0.05};
        const ReturnSeries exact = return_probability(h, 0, grid);
        report.check("cost vanishes at breakdown order",
                     cost(exact, tli_return(basis, grid)) < 1e-8);
        ReturnSeries shifted = exact;
        for (double& v : shifted.values) v += 0.25;
        report.check("cost of constant offset",
                     std::abs(cost(exact, shifted) - 0.25) < 1e-12);
    }

    // propagator cross-check on a blockade sector
    {
        const ConstraintProfile profile = pxp_profile(10, Boundary::periodic);
        const SparseHamiltonian h = build_hamiltonian(build_sector(profile), profile);
        const TimeGrid grid{10.0, 0.05};
        EvolveOptions exact_opts;
        exact_opts.method = EvolveMethod::exact;
        EvolveOptions krylov_opts;
        krylov_opts.method = EvolveMethod::krylov;
        const ReturnSeries a = return_probability(h, z2_state(10), grid, exact_opts);
        const ReturnSeries b = return_probability(h, z2_state(10), grid, krylov_opts);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            worst = std::max(worst, std::abs(a.values[k] - b.values[k]));
        report.check("exact vs Krylov propagator", worst < 1e-8,
                     "max deviation " + format_double(worst));
    }

    // spacing-ratio references
    {
        std::vector<double> equal(100);
        for (std::size_t k = 0; k < equal.size(); ++k) equal[k] = static_cast<double>(k);
        const SpacingStats stats = spacing_ratios(std::span<const double>(equal));
        report.check("spacing ratios of an equally spaced ladder",
                     std::abs(stats.mean - 1.0) < 1e-12);

        std::vector<double> poisson;
        double level = 0.0;
        for (std::uint64_t k = 0; k < 200000; ++k) {
            const double u = static_cast<double>(stream_word(mix64(99), k)) /
                             static_cast<double>(UINT64_MAX);
            level += -std::log(1.0 - u);
            poisson.push_back(level);
        }
        const SpacingStats pstats = spacing_ratios(std::span<const double>(poisson));
        report.check("Poisson spacing-ratio reference",
                     std::abs(pstats.mean - (2.0 * std::log(2.0) - 1.0)) < 5e-3,
                     "mean " + format_double(pstats.mean));
    }

    // spacing-ratio reference: random real symmetric matrix (orthogonal class)
    {
        const int dim = 2000;
        Eigen::MatrixXd sym(dim, dim);
        const std::uint64_t stream = mix64(137);
        std::uint64_t word_index = 0;
        auto normal_pair = [&](double& a, double& b) {
            const double u1 = (static_cast<double>(stream_word(stream, word_index++)) + 0.5) /
                              (static_cast<double>(UINT64_MAX) + 1.0);
            const double u2 = (static_cast<double>(stream_word(stream, word_index++)) + 0.5) /
                              (static_cast<double>(UINT64_MAX) + 1.0);
            const double radius = std::sqrt(-2.0 * std::log(u1));
            a = radius * std::cos(2.0 * M_PI * u2);
            b = radius * std::sin(2.0 * M_PI * u2);
        };
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) {
                double a = 0.0, b = 0.0;
                normal_pair(a, b);
                sym(i, j) = sym(j, i) = i == j ? a : 0.5 * (a + b);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
        const Eigen::VectorXd& evals = solver.eigenvalues();
        const std::vector<double> spectrum(evals.data(), evals.data() + evals.size());
        const SpacingStats gstats = spacing_ratios(std::span<const double>(spectrum));
        report.check("orthogonal-class spacing-ratio reference",
                     std::abs(gstats.mean - 0.536) < 0.01,
                     "mean " + format_double(gstats.mean));
    }

    // constraint-draw uniformity
    {
        std::map<int, int> histogram;
        const int draws = 30000;
        for (int r = 0; r < draws; ++r) {
            const ConstraintProfile profile =
                sample_constraints(3.0, 1, 2, 0, Boundary::periodic, 5, static_cast<std::uint64_t>(r));
            ++histogram[profile.ranges[0]];
        }
        bool uniform = histogram.size() == 3;
        for (const auto& [value, count] : histogram)
            uniform = uniform && value >= 2 && value <= 4 &&
                      std::abs(count - draws / 3.0) < 5.0 * std::sqrt(draws / 3.0);
        report.check("uniform integer constraint draws", uniform);
    }

    std::printf("%s\n", report.failures == 0 ? "selftest passed" : "selftest FAILED");
    return report.failures == 0 ? exit_ok : exit_selftest;
}

/// Find --config/--out in argv ahead of full parsing so file values can seed
/// the defaults that CLI11 then overrides.
std::optional<std::string> prescan_flag(int argc, char** argv, const std::string& flag) {
    for (int i = 1; i < argc - 1; ++i)
        if (argv[i] == flag) return std::string(argv[i + 1]);
    return std::nullopt;
}

} // namespace

int main(int argc, char** argv) {
    using namespace rcspin;

    Settings settings;
    std::vector<std::string> preset_keys;
    try {
        if (const auto config_path = prescan_flag(argc, argv, "--config"))
            settings = load_config_file(*config_path, settings, &preset_keys);
        for (const std::string& var : apply_env_overrides(settings)) {
            std::string key = var.substr(std::string(env_prefix).size());
            for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            preset_keys.push_back(key);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_config;
    }

    CLI::App app{"randomly constrained spin chains: sectors, dynamics, and ensembles"};
    app.require_subcommand(1);

    std::string out_prefix;
    std::string state_text = "f";
    int defect_site = -1;
    int defect_strength = 2;
    std::vector<std::string> merge_inputs;
    std::string mu_over_n_text;

    const auto add_model_options = [&](CLI::App* cmd) {
        cmd->add_option("--n", settings.n_sites, "number of sites");
        cmd->add_option("--epsilon", settings.epsilon, "half-width of the constraint-range draw");
        cmd->add_option("--min-range", settings.min_range, "clamp floor for drawn ranges");
        cmd->add_option_function<std::string>(
            "--boundary",
            [&](const std::string& v) { settings.boundary = boundary_from_string(v); },
            "periodic | open");
        cmd->add_option("--seed", settings.seed, "master seed");
    };
    const auto add_grid_options = [&](CLI::App* cmd) {
        cmd->add_option("--tmax", settings.t_max, "observation window");
        cmd->add_option("--dt", settings.dt, "time step");
        cmd->add_option_function<std::string>(
            "--method", [&](const std::string& v) { settings.method = v; },
            "evolve method: exact | krylov | auto");
        cmd->add_option("--dense-limit", settings.dense_limit,
                        "largest dimension diagonalized densely");
    };
    const auto add_criterion_options = [&](CLI::App* cmd) {
        cmd->add_option("--threshold", settings.threshold, "long-lived-state threshold");
        cmd->add_option("--min-crossings", settings.min_crossings,
                        "required upward crossings");
    };
    const auto add_sweep_options = [&](CLI::App* cmd) {
        cmd->add_option("--mu", settings.mu, "absolute mean constraint range");
        cmd->add_option("--mu-over-n", mu_over_n_text,
                        "sweep of mu/N values: start:stop:step or comma list");
        cmd->add_option("--realisations", settings.realisations, "realisations per sweep point");
        cmd->add_option("--realisation-offset", settings.realisation_offset,
                        "first realisation index (for split runs)");
        cmd->add_option("--workers", settings.workers, "worker threads (0 = hardware)");
        cmd->add_option("--candidate-cap", settings.candidate_cap,
                        "max initial states scanned per sector");
    };
    std::string config_path_unused;

    CLI::App* evolve_cmd =
        app.add_subcommand("evolve", "return probability and site density of one state");
    add_model_options(evolve_cmd);
    add_grid_options(evolve_cmd);
    add_criterion_options(evolve_cmd);
    evolve_cmd->add_option("--mu", settings.mu, "absolute mean constraint range");
    evolve_cmd->add_option("--realisation-offset", settings.realisation_offset,
                           "realisation index of the drawn profile");
    evolve_cmd->add_option("--state", state_text, "initial state: f | z2 | z2b | bitmask");
    evolve_cmd->add_option("--sector-capacity", settings.sector_capacity,
                           "abort if the sector grows beyond this");

    CLI::App* scan_cmd = app.add_subcommand("scan", "classify every sector state of one profile");
    add_model_options(scan_cmd);
    add_grid_options(scan_cmd);
    add_criterion_options(scan_cmd);
    scan_cmd->add_option("--mu", settings.mu, "absolute mean constraint range");
    scan_cmd->add_option("--realisation-offset", settings.realisation_offset,
                         "realisation index of the drawn profile");
    scan_cmd->add_option("--workers", settings.workers, "worker threads (0 = hardware)");
    scan_cmd->add_option("--candidate-cap", settings.candidate_cap,
                         "max initial states scanned");

    CLI::App* ensemble_cmd =
        app.add_subcommand("ensemble", "p and rho across a mu/N sweep (Fock-space fraction data)");
    add_model_options(ensemble_cmd);
    add_grid_options(ensemble_cmd);
    add_criterion_options(ensemble_cmd);
    add_sweep_options(ensemble_cmd);

    CLI::App* tli_cmd =
        app.add_subcommand("tli", "minimal truncated-Lanczos order statistics across a sweep");
    add_model_options(tli_cmd);
    add_grid_options(tli_cmd);
    add_criterion_options(tli_cmd);
    add_sweep_options(tli_cmd);
    tli_cmd->add_option("--cost-tol", settings.cost_tol, "cost tolerance for the minimal order");

    CLI::App* defect_cmd =
        app.add_subcommand("defect", "hard-blockade chain with one enlarged constraint range");
    add_model_options(defect_cmd);
    add_grid_options(defect_cmd);
    add_criterion_options(defect_cmd);
    defect_cmd->add_option("--site", defect_site, "defect site (default n/2)");
    defect_cmd->add_option("--q", defect_strength, "defect constraint range");
    defect_cmd->add_option("--state", state_text, "initial state: f | z2 | z2b | bitmask");

    CLI::App* levels_cmd =
        app.add_subcommand("levels", "mean level-spacing ratio across a mu/N sweep");
    add_model_options(levels_cmd);
    add_sweep_options(levels_cmd);
    levels_cmd->add_option("--dense-limit", settings.dense_limit,
                           "largest dimension diagonalized");
    levels_cmd->add_option("--degeneracy-tol", settings.degeneracy_tol,
                           "collapse eigenvalues closer than this");
    levels_cmd->add_option("--central-fraction", settings.central_fraction,
                           "share of distinct levels kept for gap ratios");

    CLI::App* merge_cmd = app.add_subcommand("merge", "aggregate per-realisation records files");
    merge_cmd->add_option("inputs", merge_inputs, "records CSV files")->required();

    CLI::App* selftest_cmd = app.add_subcommand("selftest", "run the analytic-oracle suite");

    for (auto* cmd : {evolve_cmd, scan_cmd, ensemble_cmd, tli_cmd, defect_cmd, levels_cmd, merge_cmd}) {
        cmd->add_option("--out", out_prefix, "output path prefix");
        cmd->add_option("--config", config_path_unused,
                        "configuration file (key = value lines)");
    }
    selftest_cmd->add_option("--config", config_path_unused,
                             "configuration file (key = value lines)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    CLI::App* active = app.get_subcommands().front();
    if (out_prefix.empty()) out_prefix = active->get_name();

    // a flag repeated in config/environment and on the command line: flag wins
    for (const std::string& key : preset_keys) {
        std::string flag = "--" + key;
        for (char& c : flag)
            if (c == '_') c = '-';
        if (active->count(flag) > 0)
            std::fprintf(stderr, "note: %s overrides the config/environment value\n", flag.c_str());
    }

    try {
        if (!mu_over_n_text.empty()) settings.mu_over_n = parse_sweep(mu_over_n_text);
        validate_settings(settings);

        if (active == evolve_cmd) return run_evolve(settings, state_text, out_prefix, argc, argv);
        if (active == scan_cmd) return run_scan(settings, out_prefix, argc, argv);
        if (active == ensemble_cmd) return run_ensemble(settings, out_prefix, argc, argv);
        if (active == tli_cmd) return run_tli(settings, out_prefix, argc, argv);
        if (active == defect_cmd) {
            const int site = defect_site >= 0 ? defect_site : settings.n_sites / 2;
            const std::string defect_state =
                defect_cmd->count("--state") > 0 ? state_text : "z2";
            return run_defect(settings, site, defect_strength, defect_state, out_prefix, argc,
                              argv);
        }
        if (active == levels_cmd) return run_levels(settings, out_prefix, argc, argv);
        if (active == merge_cmd) return run_merge(merge_inputs, out_prefix, argc, argv);
        if (active == selftest_cmd) return run_selftest();
        std::fprintf(stderr, "unknown subcommand\n");
        return exit_config;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return exit_config;
    } catch (const std::out_of_range& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return exit_runtime;
    }
}
