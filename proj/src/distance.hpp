#pragma once

#include <cstdint>
#include <vector>

#include "grid.hpp"
#include "mask.hpp"

namespace bflow {

// Interface face between an inside cell and an outside cell (or the domain
// edge, out_cell == -1). The set boundary is the collection of these faces.
struct BoundaryFace {
    std::int64_t in_cell = -1;
    std::int64_t out_cell = -1;
    int axis = 0;
    int sign = +1;  // out cell sits at in_cell + sign along axis
};

std::vector<BoundaryFace> boundary_faces(const Mask& m);

std::array<double, 3> face_midpoint(const Grid& g, const BoundaryFace& f);

// Exact signed Euclidean distance to the boundary interface: negative inside,
// positive outside. Distances are measured to per-face sites placed at the
// face midpoints, or, when a continuous level function is supplied, at its
// zero crossing along the face axis (sub-cell placement). nearest_face maps
// every cell to the face owning its nearest site.
struct DistanceTransform {
    Field dist;
    std::vector<BoundaryFace> faces;
    std::vector<double> site_offset;        // per face: crossing offset in (0,1) from in_cell
    std::vector<std::int32_t> nearest_face;  // per cell, index into faces
};

DistanceTransform signed_distance_transform(const Mask& m,
                                            const std::vector<double>* level = nullptr);

Field signed_distance(const Mask& m);

// Unsigned exact distance to the nearest inside cell center (zero on the set).
Field distance_to_cells(const Mask& m);

double hausdorff_distance(const Mask& a, const Mask& b);

// {x : d^s(x) < -h} and {x : d^s(x) < +r}.
Mask erode(const Mask& m, double h);
Mask dilate_by_radius(const Mask& m, double r);

}  // namespace bflow
