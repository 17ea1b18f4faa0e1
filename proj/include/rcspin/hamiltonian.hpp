#pragma once

/**
 * The Hamiltonian restricted to a sector is the 0/1 adjacency matrix of the
 * flip graph: entry (a,b) = 1 iff b = a XOR (1<<i) for some allowed site i.
 * Stored as CSR with implicit unit values and zero diagonal.
 */

#include <rcspin/sector.hpp>

#include <complex>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcspin {

struct SparseHamiltonian {
    SectorBasis basis;
    std::vector<std::uint32_t> row_ptr;   ///< size D+1
    std::vector<std::uint32_t> cols;      ///< neighbor indices, sorted per row

    [[nodiscard]] std::size_t dimension() const { return basis.dimension(); }
    [[nodiscard]] std::size_t edge_count() const { return cols.size() / 2; }

    [[nodiscard]] std::span<const std::uint32_t> neighbors(std::size_t row) const {
        return {cols.data() + row_ptr[row], cols.data() + row_ptr[row + 1]};
    }

    [[nodiscard]] std::size_t degree(std::size_t row) const {
        return row_ptr[row + 1] - row_ptr[row];
    }
};

/// Assemble the sector Hamiltonian. The basis must come from the same
/// profile; a checksum mismatch is rejected.
[[nodiscard]] inline SparseHamiltonian build_hamiltonian(const SectorBasis& basis,
                                                         const ConstraintProfile& profile) {
    if (basis.profile_checksum != profile.checksum())
        throw std::invalid_argument("build_hamiltonian: basis was built from a different profile");
    const FlipMasks masks = make_flip_masks(profile);
    const std::size_t dim = basis.dimension();

    SparseHamiltonian h;
    h.basis = basis;
    h.row_ptr.resize(dim + 1);
    h.row_ptr[0] = 0;
    for (std::size_t a = 0; a < dim; ++a) {
        const FockState s = basis.states[a];
        std::uint64_t flips = allowed_flips(s, masks);
        std::uint32_t deg = 0;
        while (flips) {
            const int i = std::countr_zero(flips);
            flips &= flips - 1;
            const auto idx = basis.index_of(s ^ (std::uint64_t{1} << i));
            if (!idx)
                throw std::logic_error("build_hamiltonian: basis is not closed under allowed flips");
            h.cols.push_back(static_cast<std::uint32_t>(*idx));
            ++deg;
        }
        std::sort(h.cols.end() - deg, h.cols.end());
        h.row_ptr[a + 1] = static_cast<std::uint32_t>(h.cols.size());
    }
    return h;
}

/// out = H in. No allocation; out must not alias in.
inline void apply_hamiltonian(const SparseHamiltonian& h, std::span<const double> in,
                              std::span<double> out) {
    const std::size_t dim = h.dimension();
    if (in.size() != dim || out.size() != dim)
        throw std::invalid_argument("apply_hamiltonian: dimension mismatch");
    for (std::size_t a = 0; a < dim; ++a) {
        double acc = 0.0;
        for (const std::uint32_t b : h.neighbors(a)) acc += in[b];
        out[a] = acc;
    }
}

inline void apply_hamiltonian(const SparseHamiltonian& h,
                              std::span<const std::complex<double>> in,
                              std::span<std::complex<double>> out) {
    const std::size_t dim = h.dimension();
    if (in.size() != dim || out.size() != dim)
        throw std::invalid_argument("apply_hamiltonian: dimension mismatch");
    for (std::size_t a = 0; a < dim; ++a) {
        std::complex<double> acc = 0.0;
        for (const std::uint32_t b : h.neighbors(a)) acc += in[b];
        out[a] = acc;
    }
}

// --- binary sector cache -----------------------------------------------
//
// Layout (all little-endian 64-bit words):
//   magic, n_sites, D_H, profile checksum,
//   D_H state bitmasks,
//   D_H+1 row_ptr words, nnz column words.

inline constexpr std::uint64_t sector_cache_magic = 0x52435350494E5331ull; // "RCSPINS1"

inline void dump_sector(const SparseHamiltonian& h, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("dump_sector: cannot open " + path);
    auto put = [f, &path](std::uint64_t w) {
        unsigned char b[8];
        for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(w >> (8 * k));
        if (std::fwrite(b, 1, 8, f) != 8) {
            std::fclose(f);
            throw std::runtime_error("dump_sector: short write to " + path);
        }
    };
    put(sector_cache_magic);
    put(static_cast<std::uint64_t>(h.basis.n_sites));
    put(h.dimension());
    put(h.basis.profile_checksum);
    for (const FockState s : h.basis.states) put(s);
    for (const std::uint32_t v : h.row_ptr) put(v);
    for (const std::uint32_t v : h.cols) put(v);
    std::fclose(f);
}

[[nodiscard]] inline SparseHamiltonian load_sector(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("load_sector: cannot open " + path);
    auto get = [f, &path]() {
        unsigned char b[8];
        if (std::fread(b, 1, 8, f) != 8) {
            std::fclose(f);
            throw std::runtime_error("load_sector: truncated file " + path);
        }
        std::uint64_t w = 0;
        for (int k = 0; k < 8; ++k) w |= static_cast<std::uint64_t>(b[k]) << (8 * k);
        return w;
    };
    if (get() != sector_cache_magic) {
        std::fclose(f);
        throw std::runtime_error("load_sector: bad magic in " + path);
    }
    SparseHamiltonian h;
    h.basis.n_sites = static_cast<int>(get());
    const std::uint64_t dim = get();
    h.basis.profile_checksum = get();
    h.basis.states.resize(dim);
    for (auto& s : h.basis.states) s = get();
    h.row_ptr.resize(dim + 1);
    for (auto& v : h.row_ptr) v = static_cast<std::uint32_t>(get());
    h.cols.resize(h.row_ptr.back());
    for (auto& v : h.cols) v = static_cast<std::uint32_t>(get());
    std::fclose(f);
    return h;
}

} // namespace rcspin
