#pragma once

/**
 * Run manifests.
 *
 * Every CLI run writes a JSON manifest next to its outputs: the exact
 * command line, the fully resolved configuration, the master seed plus the
 * derived per-realisation seed table, the code version, wall-clock
 * timestamps, and a checksum per output file. The configuration and seed
 * table are sufficient to re-execute any single realisation in isolation.
 * Timestamps live only here — CSV bodies stay byte-comparable.
 */

#include <rcspin/config.hpp>
#include <rcspin/rng.hpp>
#include <rcspin/version.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcspin {

/// FNV-1a over a byte stream.
[[nodiscard]] inline std::uint64_t fnv1a_bytes(const void* data, std::size_t size,
                                               std::uint64_t hash = 0xcbf29ce484222325ull) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

[[nodiscard]] inline std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot checksum missing file: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        hash = fnv1a_bytes(buf, static_cast<std::size_t>(in.gcount()), hash);
    return hash;
}

[[nodiscard]] inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct SeedTableEntry {
    double mu = 0.0;
    std::uint64_t realisation_index = 0;
    std::uint64_t seed = 0;
};

inline void to_json(nlohmann::json& j, const SeedTableEntry& e) {
    j = nlohmann::json{{"mu", e.mu}, {"realisation_index", e.realisation_index}, {"seed", e.seed}};
}

struct OutputRecord {
    std::string path;
    std::uint64_t checksum = 0;
};

inline void to_json(nlohmann::json& j, const OutputRecord& o) {
    j = nlohmann::json{{"path", o.path}, {"checksum_fnv1a", o.checksum}};
}

struct RunManifest {
    std::string command_line;
    std::string subcommand;
    Settings settings;
    std::uint64_t master_seed = 0;
    std::vector<SeedTableEntry> seed_table;
    std::string started_at;
    std::string finished_at;
    std::vector<OutputRecord> outputs;
    nlohmann::json extra;   ///< subcommand-specific payload (profiles, aggregates)

    void add_output(const std::string& path) { outputs.push_back({path, fnv1a_file(path)}); }
};

inline void to_json(nlohmann::json& j, const RunManifest& m) {
    j = nlohmann::json{{"tool", "rcspin"},
                       {"version", version_string},
                       {"command_line", m.command_line},
                       {"subcommand", m.subcommand},
                       {"config", m.settings},
                       {"master_seed", m.master_seed},
                       {"seed_table", m.seed_table},
                       {"started_at", m.started_at},
                       {"finished_at", m.finished_at},
                       {"outputs", m.outputs}};
    if (!m.extra.is_null()) j["extra"] = m.extra;
}

/// Fill the seed table exactly as the sweeps derive their seeds.
inline void fill_seed_table(RunManifest& manifest, const std::vector<double>& mu_values,
                            std::uint64_t n_realisations, std::uint64_t offset) {
    manifest.seed_table.clear();
    manifest.seed_table.reserve(mu_values.size() * n_realisations);
    for (double mu : mu_values)
        for (std::uint64_t r = 0; r < n_realisations; ++r)
            manifest.seed_table.push_back(
                {mu, offset + r, derive_seed(manifest.master_seed, sweep_key(mu), offset + r)});
}

inline void write_manifest(const RunManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open manifest file: " + path);
    out << nlohmann::json(manifest).dump(2) << '\n';
}

} // namespace rcspin
