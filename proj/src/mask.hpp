#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "grid.hpp"

namespace bflow {

// A bounded open set represented per cell: a cell belongs to the set iff its
// center satisfies the defining predicate. Empty and sub-resolution masks are
// flagged rather than silently accepted.
struct Mask {
    GridPtr grid;
    std::vector<std::uint8_t> inside;
    std::int64_t count = 0;
    bool degenerate = false;

    Mask() = default;
    explicit Mask(GridPtr g) : grid(std::move(g)), inside(static_cast<std::size_t>(grid->total), 0) {}

    bool at(std::int64_t i) const { return inside[static_cast<std::size_t>(i)] != 0; }
    void set(std::int64_t i, bool v) {
        auto& c = inside[static_cast<std::size_t>(i)];
        if ((c != 0) != v) {
            count += v ? 1 : -1;
            c = v ? 1 : 0;
        }
    }
    bool empty() const { return count == 0; }
    bool full() const { return count == grid->total; }
    void recount();
};

bool operator==(const Mask& a, const Mask& b);

// Shape description tree: ball, annulus, union, difference.
struct Shape {
    enum class Kind { Ball, Annulus, Union, Difference };
    Kind kind = Kind::Ball;
    std::array<double, 3> center{0, 0, 0};
    double r0 = 0, r1 = 0;  // ball: r0; annulus: inner r0, outer r1
    std::vector<Shape> children;
};

Shape parse_shape(std::string_view text, int dim);
Mask rasterize_shape(const Shape& shape, const GridPtr& grid);
Mask rasterize_shape(std::string_view text, const GridPtr& grid);

double volume(const Mask& m);

// Cellwise set helpers.
Mask mask_union(const Mask& a, const Mask& b);
Mask mask_difference(const Mask& a, const Mask& b);
bool subset_of(const Mask& inner, const Mask& outer);

// Strict containment: inner is a subset and no inner-boundary cell touches an
// outer-boundary cell (face adjacency).
bool strictly_contains(const Mask& inner, const Mask& outer);

// One-cell face dilation.
Mask dilate_cells(const Mask& m, int layers = 1);

bool touches_margin(const Mask& m, int margin_cells);

std::uint64_t mask_hash(const Mask& m);

}  // namespace bflow
