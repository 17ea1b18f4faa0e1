#pragma once

/**
 * CSV emission and parsing.
 *
 * Floating-point values are written with std::to_chars (shortest
 * representation that round-trips), so identical numbers always produce
 * identical bytes and re-reading a records file recovers exact values.
 * No CSV body contains timestamps; reproducibility checks may compare
 * whole files.
 */

#include <rcspin/constraints.hpp>
#include <rcspin/lls.hpp>
#include <rcspin/spectral.hpp>
#include <rcspin/time_grid.hpp>
#include <rcspin/tli.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace rcspin {

[[nodiscard]] inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

[[nodiscard]] inline double parse_double(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::invalid_argument("parse_double: bad number '" + std::string(text) + "'");
    return v;
}

[[nodiscard]] inline std::uint64_t parse_u64(std::string_view text) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::invalid_argument("parse_u64: bad integer '" + std::string(text) + "'");
    return v;
}

[[nodiscard]] inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

[[nodiscard]] inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

// --- time-series formats ----------------------------------------------------

/// Header row of times, then one value row per series.
inline void write_series_csv(std::ostream& out, const TimeGrid& grid,
                             std::span<const std::span<const double>> rows) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (k) out << ',';
        out << format_double(grid.time(k));
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != grid.size())
            throw std::invalid_argument("write_series_csv: row length does not match grid");
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << ',';
            out << format_double(row[k]);
        }
        out << '\n';
    }
}

inline void write_series_csv(std::ostream& out, const ReturnSeries& series) {
    const std::span<const double> row(series.values);
    write_series_csv(out, series.grid, std::span<const std::span<const double>>(&row, 1));
}

/// One value row per site, aligned with the header row of times.
inline void write_density_csv(std::ostream& out, const DensityProfile& profile) {
    std::vector<std::vector<double>> by_site(static_cast<std::size_t>(profile.n_sites));
    for (auto& row : by_site) row.resize(profile.grid.size());
    for (std::size_t k = 0; k < profile.grid.size(); ++k)
        for (int i = 0; i < profile.n_sites; ++i)
            by_site[static_cast<std::size_t>(i)][k] = profile.at(k, i);
    std::vector<std::span<const double>> rows;
    rows.reserve(by_site.size());
    for (const auto& row : by_site) rows.emplace_back(row);
    write_series_csv(out, profile.grid, std::span<const std::span<const double>>(rows));
}

// --- tabular formats ----------------------------------------------------------

inline void write_overlaps_csv(std::ostream& out,
                               std::span<const std::pair<double, double>> overlaps) {
    out << "E_k,overlap\n";
    for (const auto& [energy, weight] : overlaps)
        out << format_double(energy) << ',' << format_double(weight) << '\n';
}

inline void write_scan_csv(std::ostream& out, const ScanResult& scan) {
    out << "state,crossings,qualifies\n";
    for (const LLSRecord& rec : scan.records)
        out << rec.state << ',' << rec.crossings << ',' << (rec.qualifies ? 1 : 0) << '\n';
}

inline void write_ensemble_csv(std::ostream& out, std::span<const EnsemblePoint> points) {
    out << "mu,mu_over_N,N,realisations,p,p_err,rho_mean,rho_stderr,mean_D_H,excluded\n";
    for (const EnsemblePoint& pt : points) {
        out << format_double(pt.mu) << ',' << format_double(pt.mu / pt.n_sites) << ','
            << pt.n_sites << ',' << pt.realisations << ',' << format_double(pt.p) << ','
            << format_double(pt.p_err) << ',' << format_double(pt.rho_mean) << ','
            << format_double(pt.rho_stderr) << ',' << format_double(pt.mean_sector_dim) << ','
            << pt.excluded << '\n';
    }
}

inline void write_tli_csv(std::ostream& out, std::span<const McPoint> points) {
    out << "mu,mu_over_N,N,mean_mc,mean_mc_over_N,mean_mc_over_DH,n_lls_used,realisations\n";
    for (const McPoint& pt : points) {
        out << format_double(pt.mu) << ',' << format_double(pt.mu / pt.n_sites) << ','
            << pt.n_sites << ',' << format_double(pt.mean_mc) << ','
            << format_double(pt.mean_mc_over_n) << ',' << format_double(pt.mean_mc_over_dh)
            << ',' << pt.n_lls_used << ',' << pt.realisations_used << '\n';
    }
}

inline void write_levels_csv(std::ostream& out, std::span<const LevelStatPoint> points) {
    out << "mu,mu_over_N,N,mean_r,stderr,realisations,skipped\n";
    for (const LevelStatPoint& pt : points) {
        out << format_double(pt.mu) << ',' << format_double(pt.mu / pt.n_sites) << ','
            << pt.n_sites << ',' << format_double(pt.mean_r) << ','
            << format_double(pt.stderr_r) << ',' << pt.realisations_used << ','
            << pt.skipped << '\n';
    }
}

// --- per-realisation records (the merge interchange format) -------------------

/// Sweep context stamped into a records file; merge refuses files whose
/// contexts differ.
struct RecordsMeta {
    int n_sites = 0;
    TimeGrid grid;
    LLSCriterion criterion;
    int epsilon = 1;
    int min_range = 1;
    Boundary boundary = Boundary::periodic;
    std::uint64_t candidate_cap = default_candidate_cap;

    friend bool operator==(const RecordsMeta& a, const RecordsMeta& b) {
        return a.n_sites == b.n_sites && a.grid == b.grid &&
               a.criterion.threshold == b.criterion.threshold &&
               a.criterion.min_crossings == b.criterion.min_crossings &&
               a.epsilon == b.epsilon && a.min_range == b.min_range &&
               a.boundary == b.boundary && a.candidate_cap == b.candidate_cap;
    }
};

inline constexpr std::string_view records_format_tag = "rcspin-records v1";
inline constexpr std::string_view records_header =
    "mu,mu_over_N,N,realisation_index,seed,dimension,sample_size,n_lls,excluded";

inline void write_records_csv(std::ostream& out, const RecordsMeta& meta,
                              std::span<const RealisationOutcome> records) {
    out << "# " << records_format_tag << '\n';
    out << "# n=" << meta.n_sites << '\n';
    out << "# tmax=" << format_double(meta.grid.t_max) << '\n';
    out << "# dt=" << format_double(meta.grid.dt) << '\n';
    out << "# threshold=" << format_double(meta.criterion.threshold) << '\n';
    out << "# min_crossings=" << meta.criterion.min_crossings << '\n';
    out << "# epsilon=" << meta.epsilon << '\n';
    out << "# min_range=" << meta.min_range << '\n';
    out << "# boundary=" << to_string(meta.boundary) << '\n';
    out << "# candidate_cap=" << meta.candidate_cap << '\n';
    out << records_header << '\n';
    for (const RealisationOutcome& rec : records) {
        if (rec.n_lls.size() != 1)
            throw std::invalid_argument("write_records_csv: records must carry one criterion");
        out << format_double(rec.mu) << ',' << format_double(rec.mu / rec.n_sites) << ','
            << rec.n_sites << ',' << rec.realisation_index << ',' << rec.seed << ','
            << rec.dimension << ',' << rec.sample_size << ',' << rec.n_lls[0] << ','
            << (rec.excluded ? 1 : 0) << '\n';
    }
}

struct RecordsFile {
    RecordsMeta meta;
    std::vector<RealisationOutcome> records;
};

[[nodiscard]] inline RecordsFile read_records_csv(std::istream& in, const std::string& name) {
    const auto fail = [&](const std::string& what) {
        throw std::runtime_error("records file " + name + ": " + what);
    };
    RecordsFile file;
    std::string line;
    bool tagged = false, header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string_view body = std::string_view(line).substr(1);
            while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
            if (body == records_format_tag) {
                tagged = true;
                continue;
            }
            const std::size_t eq = body.find('=');
            if (eq == std::string_view::npos) fail("malformed metadata line '" + line + "'");
            const std::string_view key = body.substr(0, eq);
            const std::string_view value = body.substr(eq + 1);
            if (key == "n") file.meta.n_sites = static_cast<int>(parse_u64(value));
            else if (key == "tmax") file.meta.grid.t_max = parse_double(value);
            else if (key == "dt") file.meta.grid.dt = parse_double(value);
            else if (key == "threshold") file.meta.criterion.threshold = parse_double(value);
            else if (key == "min_crossings")
                file.meta.criterion.min_crossings = static_cast<int>(parse_u64(value));
            else if (key == "epsilon") file.meta.epsilon = static_cast<int>(parse_u64(value));
            else if (key == "min_range") file.meta.min_range = static_cast<int>(parse_u64(value));
            else if (key == "boundary") file.meta.boundary = boundary_from_string(std::string(value));
            else if (key == "candidate_cap") file.meta.candidate_cap = parse_u64(value);
            else fail("unknown metadata key '" + std::string(key) + "'");
            continue;
        }
        if (!header_seen) {
            if (line != records_header) fail("unexpected column header '" + line + "'");
            header_seen = true;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 9) fail("expected 9 columns, got " + std::to_string(fields.size()));
        RealisationOutcome rec;
        rec.mu = parse_double(fields[0]);
        rec.n_sites = static_cast<int>(parse_u64(fields[2]));
        rec.realisation_index = parse_u64(fields[3]);
        rec.seed = parse_u64(fields[4]);
        rec.dimension = parse_u64(fields[5]);
        rec.sample_size = parse_u64(fields[6]);
        rec.n_lls = {parse_u64(fields[7])};
        rec.excluded = parse_u64(fields[8]) != 0;
        file.records.push_back(std::move(rec));
    }
    if (!tagged) fail("missing format tag");
    if (!header_seen) fail("missing column header");
    return file;
}

[[nodiscard]] inline RecordsFile read_records_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open records file: " + path);
    return read_records_csv(in, path);
}

} // namespace rcspin
