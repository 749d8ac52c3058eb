#include "grid.hpp"

#include <cstdio>
#include <string>

namespace bflow {

GridPtr make_grid(const std::vector<double>& lower, const std::vector<double>& upper,
                  const std::vector<int>& cells) {
    const std::size_t dim = lower.size();
    require(dim == 2 || dim == 3, ErrorCode::Config, "grid dimension must be 2 or 3");
    require(upper.size() == dim && cells.size() == dim, ErrorCode::Config,
            "lower/upper/cells must have matching dimension");

    auto g = std::make_shared<Grid>();
    g->dim = static_cast<int>(dim);
    for (std::size_t a = 0; a < dim; ++a) {
        require(upper[a] > lower[a], ErrorCode::Config,
                "upper must exceed lower on axis " + std::to_string(a));
        require(cells[a] >= 8, ErrorCode::Config,
                "need at least 8 cells per axis, got " + std::to_string(cells[a]));
        g->lower[a] = lower[a];
        g->upper[a] = upper[a];
        g->cells[a] = cells[a];
    }
    if (dim == 2) {
        g->cells[2] = 1;
        g->lower[2] = g->upper[2] = 0.0;
    }

    // All axes must imply the same cell size; axis 0 is canonical afterwards.
    g->dx = (g->upper[0] - g->lower[0]) / g->cells[0];
    for (std::size_t a = 1; a < dim; ++a) {
        const double dxa = (g->upper[a] - g->lower[a]) / g->cells[a];
        if (std::abs(dxa - g->dx) > 1e-9 * g->dx)
            fail(ErrorCode::Config, "anisotropic cells: axis " + std::to_string(a) +
                                        " implies dx=" + std::to_string(dxa) + " vs " +
                                        std::to_string(g->dx));
    }
    g->total = static_cast<std::int64_t>(g->cells[0]) * g->cells[1] * g->cells[2];
    return g;
}

}  // namespace bflow
