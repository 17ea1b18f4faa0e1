#pragma once

/**
 * Connected Fock-space sectors of the constrained chain.
 *
 * A Fock state is an N-bit mask; bit i set means spin i is up
 * (non-facilitating). The dynamical graph joins states one allowed
 * single-spin flip apart, and the sector basis is the connected component
 * containing the fully facilitating state |f> = 0, found by breadth-first
 * search.
 */

#include <rcspin/constraints.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rcspin {

using FockState = std::uint64_t;

/// Thrown when a BFS would exceed the configured sector capacity.
struct SectorCapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Per-site blockade masks. Site i may flip in state s iff
 * (s & block[i]) == 0.
 *
 * Periodic chains take all indices mod N; a site is never its own blocker,
 * so wrapped positions that land on i itself are dropped and overlapping
 * wraps deduplicate through the mask union. Open chains ignore out-of-range
 * positions (absent sites impose no constraint).
 */
struct FlipMasks {
    int n_sites = 0;
    std::vector<std::uint64_t> block;
};

[[nodiscard]] inline FlipMasks make_flip_masks(const ConstraintProfile& profile) {
    const int n = profile.n_sites;
    if (n < 1 || n > 63) throw std::invalid_argument("make_flip_masks: need 1 <= n_sites <= 63");
    FlipMasks m;
    m.n_sites = n;
    m.block.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        std::uint64_t mask = 0;
        const int r = profile.ranges[static_cast<std::size_t>(i)];
        for (int j = 1; j <= r; ++j) {
            if (profile.boundary == Boundary::periodic) {
                const int left = ((i - j) % n + n) % n;
                const int right = (i + j) % n;
                if (left != i) mask |= std::uint64_t{1} << left;
                if (right != i) mask |= std::uint64_t{1} << right;
            } else {
                if (i - j >= 0) mask |= std::uint64_t{1} << (i - j);
                if (i + j < n) mask |= std::uint64_t{1} << (i + j);
            }
        }
        m.block[static_cast<std::size_t>(i)] = mask;
    }
    return m;
}

/// Bitmask of the sites allowed to flip in `state`; bit i set iff every
/// blocker of site i is down. The state of site i itself is irrelevant.
[[nodiscard]] inline std::uint64_t allowed_flips(FockState state, const FlipMasks& masks) {
    std::uint64_t out = 0;
    for (int i = 0; i < masks.n_sites; ++i)
        if ((state & masks.block[static_cast<std::size_t>(i)]) == 0)
            out |= std::uint64_t{1} << i;
    return out;
}

[[nodiscard]] inline std::uint64_t allowed_flips(FockState state,
                                                 const ConstraintProfile& profile) {
    return allowed_flips(state, make_flip_masks(profile));
}

/// Expand a flip bitmask into sorted site indices (test/debug convenience).
[[nodiscard]] inline std::vector<int> flip_sites(std::uint64_t flips) {
    std::vector<int> out;
    for (int i = 0; i < 64; ++i)
        if (flips >> i & 1) out.push_back(i);
    return out;
}

/// Néel-ordered state: up spins on every second site starting at `parity`
/// (0 → sites 0,2,4,…; 1 → sites 1,3,5,…).
[[nodiscard]] inline FockState z2_state(int n_sites, int parity = 0) {
    if (n_sites < 1 || n_sites > 63) throw std::invalid_argument("z2_state: need 1 <= n_sites <= 63");
    if (parity != 0 && parity != 1) throw std::invalid_argument("z2_state: parity must be 0 or 1");
    FockState s = 0;
    for (int i = parity; i < n_sites; i += 2) s |= FockState{1} << i;
    return s;
}

/**
 * Ordered basis of one connected component. States are sorted ascending by
 * bitmask value, which fixes the matrix layout and downstream eigenvector
 * phases.
 */
struct SectorBasis {
    int n_sites = 0;
    std::vector<FockState> states;   ///< sorted ascending, no duplicates
    std::uint64_t profile_checksum = 0;

    [[nodiscard]] std::size_t dimension() const { return states.size(); }

    /// Position of `s` in the basis, or nullopt if outside the sector.
    [[nodiscard]] std::optional<std::size_t> index_of(FockState s) const {
        const auto it = std::lower_bound(states.begin(), states.end(), s);
        if (it == states.end() || *it != s) return std::nullopt;
        return static_cast<std::size_t>(it - states.begin());
    }

    [[nodiscard]] bool contains(FockState s) const { return index_of(s).has_value(); }
};

inline constexpr std::size_t default_sector_capacity = 2'000'000;

/// Breadth-first closure of `root` under allowed flips. Aborts with
/// SectorCapacityError if more than `capacity` states are reached.
[[nodiscard]] inline SectorBasis build_sector_from(const ConstraintProfile& profile,
                                                   FockState root,
                                                   std::size_t capacity = default_sector_capacity) {
    const FlipMasks masks = make_flip_masks(profile);
    SectorBasis basis;
    basis.n_sites = profile.n_sites;
    basis.profile_checksum = profile.checksum();

    std::unordered_set<FockState> seen;
    seen.reserve(1024);
    std::vector<FockState> frontier{root}, next;
    seen.insert(root);
    while (!frontier.empty()) {
        next.clear();
        for (const FockState s : frontier) {
            std::uint64_t flips = allowed_flips(s, masks);
            while (flips) {
                const int i = std::countr_zero(flips);
                flips &= flips - 1;
                const FockState t = s ^ (std::uint64_t{1} << i);
                if (seen.insert(t).second) {
                    if (seen.size() > capacity)
                        throw SectorCapacityError(
                            "build_sector: component exceeds capacity of " +
                            std::to_string(capacity) + " states");
                    next.push_back(t);
                }
            }
        }
        frontier.swap(next);
    }

    basis.states.assign(seen.begin(), seen.end());
    std::sort(basis.states.begin(), basis.states.end());
    return basis;
}

/// Sector containing the fully facilitating state |f> = |00...0>.
[[nodiscard]] inline SectorBasis build_sector(const ConstraintProfile& profile,
                                              std::size_t capacity = default_sector_capacity) {
    return build_sector_from(profile, 0, capacity);
}

/** Exhaustive component census of the full 2^N Fock space. */
struct ComponentCensus {
    std::vector<std::uint64_t> sizes;      ///< all component sizes, descending
    std::uint64_t f_component_size = 0;    ///< size of the component of |f>
};

inline constexpr int default_exhaustive_limit = 20;

/// Union-find over all 2^N bitmasks under the allowed-flip relation.
/// Refuses chains longer than `exhaustive_limit` sites.
[[nodiscard]] inline ComponentCensus all_components(const ConstraintProfile& profile,
                                                    int exhaustive_limit = default_exhaustive_limit) {
    const int n = profile.n_sites;
    if (n > exhaustive_limit)
        throw std::invalid_argument("all_components: n_sites exceeds the exhaustive limit of " +
                                    std::to_string(exhaustive_limit));
    const FlipMasks masks = make_flip_masks(profile);
    const std::uint64_t total = std::uint64_t{1} << n;

    std::vector<std::uint32_t> parent(total);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&parent](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    for (std::uint64_t s = 0; s < total; ++s) {
        std::uint64_t flips = allowed_flips(s, masks);
        while (flips) {
            const int i = std::countr_zero(flips);
            flips &= flips - 1;
            const std::uint64_t t = s ^ (std::uint64_t{1} << i);
            const std::uint32_t a = find(static_cast<std::uint32_t>(s));
            const std::uint32_t b = find(static_cast<std::uint32_t>(t));
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }

    std::unordered_map<std::uint32_t, std::uint64_t> count;
    for (std::uint64_t s = 0; s < total; ++s) ++count[find(static_cast<std::uint32_t>(s))];

    ComponentCensus census;
    census.f_component_size = count.at(find(0));
    census.sizes.reserve(count.size());
    for (const auto& [root, size] : count) census.sizes.push_back(size);
    std::sort(census.sizes.begin(), census.sizes.end(), std::greater<>());
    return census;
}

} // namespace rcspin
