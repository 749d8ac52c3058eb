#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "error.hpp"

namespace bflow {

// Uniform Cartesian cell grid over a rectangular box, dimension 2 or 3.
// Cell centers sit at lower + (i + 0.5) * dx per axis. The z entries are
// inert in 2D (cells[2] == 1).
struct Grid {
    int dim = 2;
    std::array<double, 3> lower{0, 0, 0};
    std::array<double, 3> upper{0, 0, 0};
    std::array<int, 3> cells{1, 1, 1};
    double dx = 0;
    std::int64_t total = 0;

    std::int64_t index(int i, int j, int k = 0) const {
        return i + static_cast<std::int64_t>(cells[0]) * (j + static_cast<std::int64_t>(cells[1]) * k);
    }
    std::array<int, 3> unpack(std::int64_t idx) const {
        const int i = static_cast<int>(idx % cells[0]);
        const std::int64_t rest = idx / cells[0];
        return {i, static_cast<int>(rest % cells[1]), static_cast<int>(rest / cells[1])};
    }
    double coord(int axis, int i) const { return lower[axis] + (i + 0.5) * dx; }
    std::array<double, 3> center(std::int64_t idx) const {
        const auto ijk = unpack(idx);
        return {coord(0, ijk[0]), coord(1, ijk[1]), dim == 3 ? coord(2, ijk[2]) : 0.0};
    }
    double cell_measure() const { return dim == 3 ? dx * dx * dx : dx * dx; }
    std::int64_t stride(int axis) const {
        if (axis == 0) return 1;
        if (axis == 1) return cells[0];
        return static_cast<std::int64_t>(cells[0]) * cells[1];
    }
    bool same_layout(const Grid& o) const {
        return dim == o.dim && cells == o.cells && lower == o.lower && upper == o.upper;
    }
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(const std::vector<double>& lower, const std::vector<double>& upper,
                  const std::vector<int>& cells);

// Per-cell real values on a grid.
struct Field {
    GridPtr grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(GridPtr g, double fill = 0.0)
        : grid(std::move(g)), values(static_cast<std::size_t>(grid->total), fill) {}

    double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

}  // namespace bflow
