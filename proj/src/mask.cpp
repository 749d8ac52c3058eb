#include "mask.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace bflow {

void Mask::recount() {
    count = 0;
    for (auto c : inside) count += (c != 0);
}

bool operator==(const Mask& a, const Mask& b) {
    return a.grid->same_layout(*b.grid) && a.inside == b.inside;
}

namespace {

struct ShapeParser {
    std::string_view s;
    std::size_t pos = 0;
    int dim;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c))
            fail(ErrorCode::InvalidArgument,
                 "shape parse error at offset " + std::to_string(pos) + ": expected '" + c + "'");
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && (std::isalpha(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        if (start == pos) fail(ErrorCode::InvalidArgument, "shape parse error: expected a shape name");
        return std::string(s.substr(start, pos - start));
    }
    double number() {
        skip_ws();
        const char* begin = s.data() + pos;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail(ErrorCode::InvalidArgument, "shape parse error: expected a number");
        pos += static_cast<std::size_t>(end - begin);
        return v;
    }

    Shape shape() {
        const std::string name = ident();
        expect('(');
        Shape out;
        if (name == "ball") {
            out.kind = Shape::Kind::Ball;
            for (int a = 0; a < dim; ++a) {
                out.center[a] = number();
                expect(',');
            }
            out.r0 = number();
            require(out.r0 > 0, ErrorCode::InvalidArgument, "ball radius must be positive");
        } else if (name == "annulus") {
            out.kind = Shape::Kind::Annulus;
            for (int a = 0; a < dim; ++a) {
                out.center[a] = number();
                expect(',');
            }
            out.r0 = number();
            expect(',');
            out.r1 = number();
            require(out.r0 > 0 && out.r1 > out.r0, ErrorCode::InvalidArgument,
                    "annulus needs 0 < inner < outer radius");
        } else if (name == "union") {
            out.kind = Shape::Kind::Union;
            out.children.push_back(shape());
            while (eat(',')) out.children.push_back(shape());
            require(out.children.size() >= 2, ErrorCode::InvalidArgument, "union needs two or more shapes");
        } else if (name == "difference") {
            out.kind = Shape::Kind::Difference;
            out.children.push_back(shape());
            expect(',');
            out.children.push_back(shape());
        } else {
            fail(ErrorCode::InvalidArgument, "unknown shape '" + name + "'");
        }
        expect(')');
        return out;
    }
};

bool inside_shape(const Shape& sh, const std::array<double, 3>& x, int dim) {
    auto dist = [&](const std::array<double, 3>& c) {
        double s = 0;
        for (int a = 0; a < dim; ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
        return std::sqrt(s);
    };
    switch (sh.kind) {
        case Shape::Kind::Ball:
            return dist(sh.center) < sh.r0;
        case Shape::Kind::Annulus: {
            const double d = dist(sh.center);
            return d > sh.r0 && d < sh.r1;
        }
        case Shape::Kind::Union:
            for (const auto& c : sh.children)
                if (inside_shape(c, x, dim)) return true;
            return false;
        case Shape::Kind::Difference:
            return inside_shape(sh.children[0], x, dim) && !inside_shape(sh.children[1], x, dim);
    }
    return false;
}

void shape_bbox(const Shape& sh, int dim, std::array<double, 3>& lo, std::array<double, 3>& hi) {
    switch (sh.kind) {
        case Shape::Kind::Ball:
        case Shape::Kind::Annulus: {
            const double r = sh.kind == Shape::Kind::Ball ? sh.r0 : sh.r1;
            for (int a = 0; a < dim; ++a) {
                lo[a] = std::min(lo[a], sh.center[a] - r);
                hi[a] = std::max(hi[a], sh.center[a] + r);
            }
            break;
        }
        case Shape::Kind::Union:
            for (const auto& c : sh.children) shape_bbox(c, dim, lo, hi);
            break;
        case Shape::Kind::Difference:
            shape_bbox(sh.children[0], dim, lo, hi);
            break;
    }
}

}  // namespace

Shape parse_shape(std::string_view text, int dim) {
    ShapeParser p{text, 0, dim};
    Shape sh = p.shape();
    p.skip_ws();
    require(p.pos == text.size(), ErrorCode::InvalidArgument,
            "shape parse error: trailing characters after shape");
    return sh;
}

Mask rasterize_shape(const Shape& shape, const GridPtr& grid) {
    std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    shape_bbox(shape, grid->dim, lo, hi);
    for (int a = 0; a < grid->dim; ++a) {
        if (lo[a] < grid->lower[a] - 1e-12 || hi[a] > grid->upper[a] + 1e-12)
            fail(ErrorCode::Containment, "shape extends outside the grid domain on axis " +
                                             std::to_string(a));
    }

    Mask m(grid);
    for (std::int64_t idx = 0; idx < grid->total; ++idx) {
        if (inside_shape(shape, grid->center(idx), grid->dim)) {
            m.inside[static_cast<std::size_t>(idx)] = 1;
            ++m.count;
        }
    }
    m.degenerate = m.count <= 1;
    return m;
}

Mask rasterize_shape(std::string_view text, const GridPtr& grid) {
    return rasterize_shape(parse_shape(text, grid->dim), grid);
}

double volume(const Mask& m) {
    return static_cast<double>(m.count) * m.grid->cell_measure();
}

Mask mask_union(const Mask& a, const Mask& b) {
    require(a.grid->same_layout(*b.grid), ErrorCode::InvalidArgument, "masks live on different grids");
    Mask out(a.grid);
    for (std::size_t i = 0; i < out.inside.size(); ++i) out.inside[i] = a.inside[i] | b.inside[i];
    out.recount();
    out.degenerate = out.count <= 1;
    return out;
}

Mask mask_difference(const Mask& a, const Mask& b) {
    require(a.grid->same_layout(*b.grid), ErrorCode::InvalidArgument, "masks live on different grids");
    Mask out(a.grid);
    for (std::size_t i = 0; i < out.inside.size(); ++i) out.inside[i] = a.inside[i] & ~b.inside[i];
    out.recount();
    out.degenerate = out.count <= 1;
    return out;
}

bool subset_of(const Mask& inner, const Mask& outer) {
    require(inner.grid->same_layout(*outer.grid), ErrorCode::InvalidArgument,
            "masks live on different grids");
    for (std::size_t i = 0; i < inner.inside.size(); ++i)
        if (inner.inside[i] && !outer.inside[i]) return false;
    return true;
}

namespace {

// Cells of m with at least one face neighbor outside m (domain edge counts as
// outside only if the cell is inside; interpretation: interface cells).
std::vector<std::uint8_t> boundary_cells(const Mask& m) {
    const Grid& g = *m.grid;
    std::vector<std::uint8_t> b(static_cast<std::size_t>(g.total), 0);
    for (std::int64_t idx = 0; idx < g.total; ++idx) {
        if (!m.at(idx)) continue;
        const auto ijk = g.unpack(idx);
        bool edge = false;
        for (int a = 0; a < g.dim && !edge; ++a) {
            for (int s = -1; s <= 1 && !edge; s += 2) {
                const int v = ijk[a] + s;
                if (v < 0 || v >= g.cells[a] || !m.at(idx + s * g.stride(a))) edge = true;
            }
        }
        if (edge) b[static_cast<std::size_t>(idx)] = 1;
    }
    return b;
}

}  // namespace

bool strictly_contains(const Mask& inner, const Mask& outer) {
    if (!subset_of(inner, outer)) return false;
    if (inner.empty()) return false;
    const Grid& g = *inner.grid;
    const auto bi = boundary_cells(inner);
    const auto bo = boundary_cells(outer);
    for (std::int64_t idx = 0; idx < g.total; ++idx) {
        if (!bi[static_cast<std::size_t>(idx)]) continue;
        if (bo[static_cast<std::size_t>(idx)]) return false;
        const auto ijk = g.unpack(idx);
        for (int a = 0; a < g.dim; ++a) {
            for (int s = -1; s <= 1; s += 2) {
                const int v = ijk[a] + s;
                if (v < 0 || v >= g.cells[a]) continue;
                if (bo[static_cast<std::size_t>(idx + s * g.stride(a))]) return false;
            }
        }
    }
    return true;
}

Mask dilate_cells(const Mask& m, int layers) {
    const Grid& g = *m.grid;
    Mask cur = m;
    for (int l = 0; l < layers; ++l) {
        Mask next = cur;
        for (std::int64_t idx = 0; idx < g.total; ++idx) {
            if (cur.at(idx)) continue;
            const auto ijk = g.unpack(idx);
            for (int a = 0; a < g.dim; ++a) {
                for (int s = -1; s <= 1; s += 2) {
                    const int v = ijk[a] + s;
                    if (v >= 0 && v < g.cells[a] && cur.at(idx + s * g.stride(a))) {
                        next.set(idx, true);
                        a = g.dim;
                        break;
                    }
                }
            }
        }
        cur = std::move(next);
    }
    cur.degenerate = cur.count <= 1;
    return cur;
}

bool touches_margin(const Mask& m, int margin_cells) {
    const Grid& g = *m.grid;
    for (std::int64_t idx = 0; idx < g.total; ++idx) {
        if (!m.at(idx)) continue;
        const auto ijk = g.unpack(idx);
        for (int a = 0; a < g.dim; ++a)
            if (ijk[a] < margin_cells || ijk[a] >= g.cells[a] - margin_cells) return true;
    }
    return false;
}

std::uint64_t mask_hash(const Mask& m) {
    // FNV-1a over the occupancy bytes.
    std::uint64_t h = 1469598103934665603ull;
    for (auto c : m.inside) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace bflow
