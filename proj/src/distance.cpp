#include "distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (x - pos[s])^2 + val[s], sampled at the integer
// query positions 0..n-1. Site positions must be strictly increasing. Writes
// the envelope value and the winning site's payload.
void lower_envelope_1d(const std::vector<double>& pos, const std::vector<double>& val,
                       const std::vector<std::int32_t>& arg, int n, double* out,
                       std::int32_t* out_arg) {
    const int m = static_cast<int>(pos.size());
    static thread_local std::vector<int> hull;
    static thread_local std::vector<double> z;
    hull.assign(static_cast<std::size_t>(m), 0);
    z.assign(static_cast<std::size_t>(m) + 1, 0.0);

    int k = 0;
    hull[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int s = 1; s < m; ++s) {
        double inter;
        for (;;) {
            const int t = hull[k];
            inter = ((val[s] + pos[s] * pos[s]) - (val[t] + pos[t] * pos[t])) /
                    (2.0 * (pos[s] - pos[t]));
            if (inter <= z[k] && k > 0)
                --k;
            else
                break;
        }
        ++k;
        hull[k] = s;
        z[k] = inter;
        z[k + 1] = kInf;
    }

    int c = 0;
    for (int q = 0; q < n; ++q) {
        while (z[c + 1] < q) ++c;
        const int s = hull[c];
        const double d = q - pos[s];
        out[q] = d * d + val[s];
        out_arg[q] = arg[s];
    }
}

struct SiteList {
    // Sites bucketed per 1D line of the grid along a given axis.
    std::vector<std::vector<double>> pos;
    std::vector<std::vector<std::int32_t>> arg;
};

// Number of lines along `axis` and the mapping cell -> (line, offset).
std::int64_t line_count(const Grid& g, int axis) { return g.total / g.cells[axis]; }

std::int64_t line_of_cell(const Grid& g, int axis, const std::array<int, 3>& ijk) {
    switch (axis) {
        case 0: return ijk[1] + static_cast<std::int64_t>(g.cells[1]) * ijk[2];
        case 1: return ijk[0] + static_cast<std::int64_t>(g.cells[0]) * ijk[2];
        default: return ijk[0] + static_cast<std::int64_t>(g.cells[0]) * ijk[1];
    }
}

std::int64_t cell_of_line(const Grid& g, int axis, std::int64_t line, int offset) {
    switch (axis) {
        case 0: {
            const int j = static_cast<int>(line % g.cells[1]);
            const int k = static_cast<int>(line / g.cells[1]);
            return g.index(offset, j, k);
        }
        case 1: {
            const int i = static_cast<int>(line % g.cells[0]);
            const int k = static_cast<int>(line / g.cells[0]);
            return g.index(i, offset, k);
        }
        default: {
            const int i = static_cast<int>(line % g.cells[0]);
            const int j = static_cast<int>(line / g.cells[0]);
            return g.index(i, j, offset);
        }
    }
}

// Integer-site pass along `axis`: for every line, build the envelope over the
// finite entries of w and refresh w/warg in place.
void integer_pass(const Grid& g, int axis, std::vector<double>& w,
                  std::vector<std::int32_t>& warg) {
    const int n = g.cells[axis];
    const std::int64_t stride = g.stride(axis);
    const std::int64_t nlines = line_count(g, axis);
    std::vector<double> pos, val, out(static_cast<std::size_t>(n));
    std::vector<std::int32_t> arg, out_arg(static_cast<std::size_t>(n));
    pos.reserve(static_cast<std::size_t>(n));
    val.reserve(static_cast<std::size_t>(n));
    arg.reserve(static_cast<std::size_t>(n));

    for (std::int64_t line = 0; line < nlines; ++line) {
        const std::int64_t base = cell_of_line(g, axis, line, 0);
        pos.clear();
        val.clear();
        arg.clear();
        for (int t = 0; t < n; ++t) {
            const std::int64_t c = base + t * stride;
            if (w[static_cast<std::size_t>(c)] < kInf) {
                pos.push_back(static_cast<double>(t));
                val.push_back(w[static_cast<std::size_t>(c)]);
                arg.push_back(warg[static_cast<std::size_t>(c)]);
            }
        }
        if (pos.empty()) continue;
        lower_envelope_1d(pos, val, arg, n, out.data(), out_arg.data());
        for (int t = 0; t < n; ++t) {
            const std::int64_t c = base + t * stride;
            w[static_cast<std::size_t>(c)] = out[t];
            warg[static_cast<std::size_t>(c)] = out_arg[t];
        }
    }
}

struct RawSite {
    double pos;
    std::int32_t arg;
};

}  // namespace

std::vector<BoundaryFace> boundary_faces(const Mask& m) {
    const Grid& g = *m.grid;
    std::vector<BoundaryFace> faces;
    for (std::int64_t idx = 0; idx < g.total; ++idx) {
        if (!m.at(idx)) continue;
        const auto ijk = g.unpack(idx);
        for (int a = 0; a < g.dim; ++a) {
            for (int s = -1; s <= 1; s += 2) {
                const int v = ijk[a] + s;
                if (v < 0 || v >= g.cells[a]) {
                    faces.push_back({idx, -1, a, s});
                } else if (!m.at(idx + s * g.stride(a))) {
                    faces.push_back({idx, idx + s * g.stride(a), a, s});
                }
            }
        }
    }
    return faces;
}

std::array<double, 3> face_midpoint(const Grid& g, const BoundaryFace& f) {
    auto p = g.center(f.in_cell);
    p[f.axis] += 0.5 * f.sign * g.dx;
    return p;
}

DistanceTransform signed_distance_transform(const Mask& m, const std::vector<double>* level) {
    require(!m.empty() && !m.full(), ErrorCode::DegenerateSet,
            "signed distance needs a nonempty, non-full set");
    const Grid& g = *m.grid;

    DistanceTransform out;
    out.faces = boundary_faces(m);
    out.site_offset.assign(out.faces.size(), 0.5);
    if (level) {
        for (std::size_t f = 0; f < out.faces.size(); ++f) {
            const auto& face = out.faces[f];
            if (face.out_cell < 0) continue;
            const double li = (*level)[static_cast<std::size_t>(face.in_cell)];
            const double lo = (*level)[static_cast<std::size_t>(face.out_cell)];
            if (li < 0.0 && lo >= 0.0)
                out.site_offset[f] = std::clamp(li / (li - lo), 0.05, 0.95);
        }
    }

    std::vector<double> best(static_cast<std::size_t>(g.total), kInf);
    std::vector<std::int32_t> best_arg(static_cast<std::size_t>(g.total), -1);
    std::vector<double> w(static_cast<std::size_t>(g.total));
    std::vector<std::int32_t> warg(static_cast<std::size_t>(g.total));

    for (int fam = 0; fam < g.dim; ++fam) {
        // Bucket this family's sites per line.
        const std::int64_t nlines = line_count(g, fam);
        std::vector<std::vector<RawSite>> sites(static_cast<std::size_t>(nlines));
        for (std::size_t f = 0; f < out.faces.size(); ++f) {
            const auto& face = out.faces[f];
            if (face.axis != fam) continue;
            const auto ijk = g.unpack(face.in_cell);
            const double p = ijk[fam] + face.sign * out.site_offset[f];
            sites[static_cast<std::size_t>(line_of_cell(g, fam, ijk))].push_back(
                {p, static_cast<std::int32_t>(f)});
        }

        std::fill(w.begin(), w.end(), kInf);
        const int n = g.cells[fam];
        const std::int64_t stride = g.stride(fam);
        std::vector<double> pos, val, rowout(static_cast<std::size_t>(n));
        std::vector<std::int32_t> arg, rowarg(static_cast<std::size_t>(n));

        for (std::int64_t line = 0; line < nlines; ++line) {
            auto& sl = sites[static_cast<std::size_t>(line)];
            if (sl.empty()) continue;
            std::sort(sl.begin(), sl.end(),
                      [](const RawSite& a, const RawSite& b) { return a.pos < b.pos; });
            pos.clear();
            val.clear();
            arg.clear();
            for (const auto& s : sl) {
                if (!pos.empty() && s.pos - pos.back() < 1e-12) continue;
                pos.push_back(s.pos);
                val.push_back(0.0);
                arg.push_back(s.arg);
            }
            lower_envelope_1d(pos, val, arg, n, rowout.data(), rowarg.data());
            const std::int64_t base = cell_of_line(g, fam, line, 0);
            for (int t = 0; t < n; ++t) {
                const std::int64_t c = base + t * stride;
                w[static_cast<std::size_t>(c)] = rowout[t];
                warg[static_cast<std::size_t>(c)] = rowarg[t];
            }
        }

        for (int b = 0; b < g.dim; ++b) {
            if (b == fam) continue;
            integer_pass(g, b, w, warg);
        }
        for (std::int64_t c = 0; c < g.total; ++c) {
            if (w[static_cast<std::size_t>(c)] < best[static_cast<std::size_t>(c)]) {
                best[static_cast<std::size_t>(c)] = w[static_cast<std::size_t>(c)];
                best_arg[static_cast<std::size_t>(c)] = warg[static_cast<std::size_t>(c)];
            }
        }
    }

    out.dist = Field(m.grid);
    out.nearest_face = std::move(best_arg);
    for (std::int64_t c = 0; c < g.total; ++c) {
        const double d = g.dx * std::sqrt(best[static_cast<std::size_t>(c)]);
        out.dist[c] = m.at(c) ? -d : d;
    }
    return out;
}

Field signed_distance(const Mask& m) { return signed_distance_transform(m).dist; }

Field distance_to_cells(const Mask& m) {
    require(!m.empty(), ErrorCode::DegenerateSet, "distance to an empty set is undefined");
    const Grid& g = *m.grid;
    std::vector<double> w(static_cast<std::size_t>(g.total));
    std::vector<std::int32_t> warg(static_cast<std::size_t>(g.total), 0);
    for (std::int64_t c = 0; c < g.total; ++c)
        w[static_cast<std::size_t>(c)] = m.at(c) ? 0.0 : kInf;
    for (int b = 0; b < g.dim; ++b) integer_pass(g, b, w, warg);
    Field out(m.grid);
    for (std::int64_t c = 0; c < g.total; ++c)
        out[c] = g.dx * std::sqrt(w[static_cast<std::size_t>(c)]);
    return out;
}

double hausdorff_distance(const Mask& a, const Mask& b) {
    require(a.grid->same_layout(*b.grid), ErrorCode::InvalidArgument, "masks live on different grids");
    require(!a.empty() && !b.empty(), ErrorCode::DegenerateSet,
            "Hausdorff distance needs nonempty sets");
    const Field da = distance_to_cells(a);
    const Field db = distance_to_cells(b);
    double h = 0;
    for (std::int64_t c = 0; c < a.grid->total; ++c) {
        if (a.at(c)) h = std::max(h, db[c]);
        if (b.at(c)) h = std::max(h, da[c]);
    }
    return h;
}

Mask erode(const Mask& m, double h) {
    require(h > 0, ErrorCode::InvalidArgument, "erosion step must be positive");
    if (m.empty() || m.full()) return m;  // no interface to retract from
    const Field d = signed_distance(m);
    Mask out(m.grid);
    for (std::int64_t c = 0; c < m.grid->total; ++c)
        if (d[c] < -h) out.set(c, true);
    out.degenerate = out.count <= 1;
    return out;
}

Mask dilate_by_radius(const Mask& m, double r) {
    require(r >= 0, ErrorCode::InvalidArgument, "dilation radius must be nonnegative");
    if (r == 0 || m.empty() || m.full()) return m;
    const Field d = signed_distance(m);
    Mask out(m.grid);
    for (std::int64_t c = 0; c < m.grid->total; ++c)
        if (d[c] < r) out.set(c, true);
    out.degenerate = out.count <= 1;
    return out;
}

}  // namespace bflow
