#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rcspin {

/// Uniform sampling grid t_k = k*dt, k = 0..floor(t_max/dt).
/// Couplings are 1, so times are in inverse-coupling units.
struct TimeGrid {
    double t_max = 18.0;
    double dt = 0.05;

    TimeGrid() = default;
    TimeGrid(double t_max_, double dt_) : t_max(t_max_), dt(dt_) {
        if (dt <= 0.0) throw std::invalid_argument("TimeGrid: dt must be > 0");
        if (t_max < 0.0) throw std::invalid_argument("TimeGrid: t_max must be >= 0");
    }

    [[nodiscard]] std::size_t size() const {
        return static_cast<std::size_t>(t_max / dt + 1e-9) + 1;
    }
    [[nodiscard]] double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    [[nodiscard]] double last_time() const { return time(size() - 1); }

    [[nodiscard]] std::vector<double> times() const {
        std::vector<double> t(size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
        return t;
    }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.t_max == b.t_max && a.dt == b.dt;
    }
};

/// Return probability L(t_k) = |<alpha|exp(-iHt_k)|alpha>|^2 on a grid.
struct ReturnSeries {
    TimeGrid grid;
    std::vector<double> values;
};

/// Site-resolved up-spin occupation n_i(t_k) = <(1+Z_i)/2>.
/// Row-major storage, one row per time point, n_sites columns.
struct DensityProfile {
    TimeGrid grid;
    int n_sites = 0;
    std::vector<double> occupation;

    [[nodiscard]] double at(std::size_t k, int site) const {
        return occupation[k * static_cast<std::size_t>(n_sites) + static_cast<std::size_t>(site)];
    }
};

} // namespace rcspin
