#pragma once

/**
 * Disorder realisations of the constraint ranges r_i.
 *
 * Each site i carries an integer range r_i: the spin at i may flip only if
 * every spin within distance r_i on both sides is down. Ranges are drawn
 * uniformly from the integers in [round(mu)-epsilon, round(mu)+epsilon] and
 * clamped from below by min_range.
 */

#include <rcspin/rng.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace rcspin {

enum class Boundary { periodic, open };

inline const char* to_string(Boundary b) {
    return b == Boundary::periodic ? "periodic" : "open";
}

inline Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "open") return Boundary::open;
    throw std::invalid_argument("unknown boundary rule: " + s);
}

/** One realisation of the constraint ranges, with the draw that produced it. */
struct ConstraintProfile {
    int n_sites = 0;
    std::vector<int> ranges;          ///< r_i per site, each >= min_range
    double mu = 0.0;
    int epsilon = 0;
    int min_range = 1;
    Boundary boundary = Boundary::periodic;
    std::uint64_t seed = 0;
    std::uint64_t realisation_index = 0;

    /// FNV-1a over the canonical field encoding; ties bases and cached
    /// sectors to the profile they were built from.
    [[nodiscard]] std::uint64_t checksum() const {
        std::uint64_t h = 0xCBF29CE484222325ull;
        auto eat = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xFF;
                h *= 0x100000001B3ull;
            }
        };
        eat(static_cast<std::uint64_t>(n_sites));
        for (int r : ranges) eat(static_cast<std::uint64_t>(r));
        std::uint64_t mu_bits;
        static_assert(sizeof(mu_bits) == sizeof(mu));
        std::memcpy(&mu_bits, &mu, sizeof(mu_bits));
        eat(mu_bits);
        eat(static_cast<std::uint64_t>(epsilon));
        eat(static_cast<std::uint64_t>(min_range));
        eat(boundary == Boundary::periodic ? 0 : 1);
        eat(seed);
        eat(realisation_index);
        return h;
    }
};

/** Single-site modification of a profile: r_{i0} = q. */
struct DefectSpec {
    int site = 0;      ///< i0
    int strength = 1;  ///< q >= 1
};

/// Draw one realisation of the ranges. Pure function of
/// (seed, realisation_index, site), so realisations are reconstructible in
/// isolation and independent across indices.
[[nodiscard]] inline ConstraintProfile sample_constraints(
    double mu, int epsilon, int n_sites, int min_range = 1,
    Boundary boundary = Boundary::periodic, std::uint64_t seed = 0,
    std::uint64_t realisation_index = 0) {
    if (n_sites < 2) throw std::invalid_argument("sample_constraints: n_sites must be >= 2");
    if (mu < 0.0) throw std::invalid_argument("sample_constraints: mu must be >= 0");
    if (epsilon < 0) throw std::invalid_argument("sample_constraints: epsilon must be >= 0");
    if (min_range < 0) throw std::invalid_argument("sample_constraints: min_range must be >= 0");

    // "random integers" from [mu-eps, mu+eps]; non-integer mu is rounded to
    // the nearest integer before forming the interval.
    const long long mu_int = std::llround(mu);
    const long long lo = mu_int - epsilon;
    const std::uint64_t width = static_cast<std::uint64_t>(2 * epsilon + 1);

    ConstraintProfile p;
    p.n_sites = n_sites;
    p.ranges.resize(static_cast<std::size_t>(n_sites));
    p.mu = mu;
    p.epsilon = epsilon;
    p.min_range = min_range;
    p.boundary = boundary;
    p.seed = seed;
    p.realisation_index = realisation_index;
    for (int i = 0; i < n_sites; ++i) {
        const std::uint64_t key = stream_key(seed, realisation_index,
                                             static_cast<std::uint64_t>(i));
        const long long draw = lo + static_cast<long long>(uniform_below(key, width));
        p.ranges[static_cast<std::size_t>(i)] =
            static_cast<int>(std::max<long long>(draw, min_range));
    }
    return p;
}

/// The PXP point of the ensemble: every r_i = 1 (mu=1, eps=0).
[[nodiscard]] inline ConstraintProfile pxp_profile(int n_sites,
                                                   Boundary boundary = Boundary::periodic) {
    return sample_constraints(1.0, 0, n_sites, 1, boundary);
}

/// Returns `profile` with ranges[i0] replaced by q; everything else intact.
[[nodiscard]] inline ConstraintProfile apply_defect(const ConstraintProfile& profile,
                                                    const DefectSpec& defect) {
    if (defect.site < 0 || defect.site >= profile.n_sites)
        throw std::out_of_range("apply_defect: defect site outside the chain");
    if (defect.strength < 1)
        throw std::invalid_argument("apply_defect: defect strength must be >= 1");
    ConstraintProfile out = profile;
    out.ranges[static_cast<std::size_t>(defect.site)] = defect.strength;
    return out;
}

inline void to_json(nlohmann::json& j, const ConstraintProfile& p) {
    j = nlohmann::json{{"n_sites", p.n_sites},
                       {"ranges", p.ranges},
                       {"mu", p.mu},
                       {"epsilon", p.epsilon},
                       {"min_range", p.min_range},
                       {"boundary", to_string(p.boundary)},
                       {"seed", p.seed},
                       {"realisation_index", p.realisation_index}};
}

inline void from_json(const nlohmann::json& j, ConstraintProfile& p) {
    j.at("n_sites").get_to(p.n_sites);
    j.at("ranges").get_to(p.ranges);
    j.at("mu").get_to(p.mu);
    j.at("epsilon").get_to(p.epsilon);
    j.at("min_range").get_to(p.min_range);
    p.boundary = boundary_from_string(j.at("boundary").get<std::string>());
    j.at("seed").get_to(p.seed);
    j.at("realisation_index").get_to(p.realisation_index);
}

} // namespace rcspin
