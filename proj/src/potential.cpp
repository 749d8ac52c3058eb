#include "potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bflow {

namespace {

// Dirichlet data is anchored at the interface face midpoints: a boundary link
// contributes a ghost value mirrored through the face (ghost = -u for a zero
// face, 2 - u for a unit face), which keeps the matrix symmetric and puts the
// effective boundary half a cell closer than cell-anchored data would.
struct System {
    const Grid* g;
    std::vector<std::int32_t> unknown_of_cell;  // -1 where not an unknown
    std::vector<std::int64_t> cell_of_unknown;
    std::vector<double> diag;
    std::vector<double> rhs;
    int nneigh;  // 2N
};

System build_system(const Mask& source, const Mask& omega) {
    const Grid& g = *omega.grid;
    System s;
    s.g = &g;
    s.nneigh = 2 * g.dim;
    s.unknown_of_cell.assign(static_cast<std::size_t>(g.total), -1);
    for (std::int64_t c = 0; c < g.total; ++c) {
        if (omega.at(c) && !source.at(c)) {
            s.unknown_of_cell[static_cast<std::size_t>(c)] =
                static_cast<std::int32_t>(s.cell_of_unknown.size());
            s.cell_of_unknown.push_back(c);
        }
    }
    s.diag.assign(s.cell_of_unknown.size(), static_cast<double>(s.nneigh));
    s.rhs.assign(s.cell_of_unknown.size(), 0.0);
    for (std::size_t k = 0; k < s.cell_of_unknown.size(); ++k) {
        const std::int64_t c = s.cell_of_unknown[k];
        const auto ijk = g.unpack(c);
        for (int a = 0; a < g.dim; ++a) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                const int v = ijk[a] + sgn;
                if (v < 0 || v >= g.cells[a]) {
                    s.diag[k] += 1.0;  // box edge: zero face
                    continue;
                }
                const std::int64_t nb = c + sgn * g.stride(a);
                if (source.at(nb)) {
                    s.diag[k] += 1.0;
                    s.rhs[k] += 2.0;
                } else if (!omega.at(nb)) {
                    s.diag[k] += 1.0;
                }
            }
        }
    }
    return s;
}

void matvec(const System& s, const std::vector<double>& x, std::vector<double>& y) {
    const Grid& g = *s.g;
    for (std::size_t k = 0; k < s.cell_of_unknown.size(); ++k) {
        const std::int64_t c = s.cell_of_unknown[k];
        const auto ijk = g.unpack(c);
        double acc = s.diag[k] * x[k];
        for (int a = 0; a < g.dim; ++a) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                const int v = ijk[a] + sgn;
                if (v < 0 || v >= g.cells[a]) continue;
                const std::int32_t u = s.unknown_of_cell[static_cast<std::size_t>(c + sgn * g.stride(a))];
                if (u >= 0) acc -= x[static_cast<std::size_t>(u)];
            }
        }
        y[k] = acc;
    }
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct SolveStats {
    int iterations = 0;
    double unscaled_residual = 0;
};

SolveStats cg_solve(const System& s, std::vector<double>& x, double unscaled_tol, int max_iter) {
    const std::size_t n = s.cell_of_unknown.size();
    std::vector<double> r(n), p(n), ap(n);
    matvec(s, x, ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = s.rhs[k] - ap[k];
    p = r;
    double rz = 0;
    for (double v : r) rz += v * v;

    SolveStats st;
    st.unscaled_residual = max_abs(r);
    for (int it = 0; it < max_iter && st.unscaled_residual > unscaled_tol; ++it) {
        matvec(s, p, ap);
        double pap = 0;
        for (std::size_t k = 0; k < n; ++k) pap += p[k] * ap[k];
        if (pap <= 0) break;  // round-off exhausted
        const double alpha = rz / pap;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        if ((it + 1) % 64 == 0) {  // guard against recurrence drift
            matvec(s, x, ap);
            for (std::size_t k = 0; k < n; ++k) r[k] = s.rhs[k] - ap[k];
        }
        double rz_new = 0;
        for (double v : r) rz_new += v * v;
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
        st.unscaled_residual = max_abs(r);
        st.iterations = it + 1;
    }
    // Report the true residual, not the recurrence one.
    matvec(s, x, ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = s.rhs[k] - ap[k];
    st.unscaled_residual = max_abs(r);
    return st;
}

SolveStats sor_solve(const System& s, std::vector<double>& x, double unscaled_tol, int max_iter,
                     double omega) {
    const Grid& g = *s.g;
    const std::size_t n = s.cell_of_unknown.size();
    std::vector<double> r(n);
    SolveStats st;
    for (int it = 0; it < max_iter; ++it) {
        for (int color = 0; color < 2; ++color) {
            for (std::size_t k = 0; k < n; ++k) {
                const std::int64_t c = s.cell_of_unknown[k];
                const auto ijk = g.unpack(c);
                if (((ijk[0] + ijk[1] + ijk[2]) & 1) != color) continue;
                double acc = s.rhs[k];
                for (int a = 0; a < g.dim; ++a) {
                    for (int sgn = -1; sgn <= 1; sgn += 2) {
                        const int v = ijk[a] + sgn;
                        if (v < 0 || v >= g.cells[a]) continue;
                        const std::int32_t u =
                            s.unknown_of_cell[static_cast<std::size_t>(c + sgn * g.stride(a))];
                        if (u >= 0) acc += x[static_cast<std::size_t>(u)];
                    }
                }
                x[k] += omega * (acc / s.diag[k] - x[k]);
            }
        }
        st.iterations = it + 1;
        if ((it + 1) % 8 == 0 || it + 1 == max_iter) {
            std::vector<double> ax(n);
            matvec(s, x, ax);
            for (std::size_t k = 0; k < n; ++k) r[k] = s.rhs[k] - ax[k];
            st.unscaled_residual = max_abs(r);
            if (st.unscaled_residual <= unscaled_tol) break;
        }
    }
    return st;
}

}  // namespace

double face_gradient_norm(const Field& u, const BoundaryFace& f) {
    const Grid& g = *u.grid;
    const double dx = g.dx;
    const double out_val = f.out_cell >= 0 ? u[f.out_cell] : 0.0;
    const double gn = (u[f.in_cell] - out_val) / dx;

    double sum = gn * gn;
    const auto ijk = g.unpack(f.in_cell);
    for (int a = 0; a < g.dim; ++a) {
        if (a == f.axis) continue;
        // Tangential derivative at the interior cell, one-sided at the box edge.
        const bool has_lo = ijk[a] > 0;
        const bool has_hi = ijk[a] < g.cells[a] - 1;
        double gt = 0;
        if (has_lo && has_hi)
            gt = (u[f.in_cell + g.stride(a)] - u[f.in_cell - g.stride(a)]) / (2 * dx);
        else if (has_hi)
            gt = (u[f.in_cell + g.stride(a)] - u[f.in_cell]) / dx;
        else if (has_lo)
            gt = (u[f.in_cell] - u[f.in_cell - g.stride(a)]) / dx;
        sum += gt * gt;
    }
    return std::sqrt(sum);
}

namespace {

// Gradient component along `axis` at a cell, by centered differences (one-sided
// at the box edge).
double cell_gradient(const Field& u, std::int64_t c, int axis) {
    const Grid& g = *u.grid;
    const auto ijk = g.unpack(c);
    const std::int64_t st = g.stride(axis);
    const bool lo = ijk[axis] > 0, hi = ijk[axis] < g.cells[axis] - 1;
    if (lo && hi) return (u[c + st] - u[c - st]) / (2 * g.dx);
    if (hi) return (u[c + st] - u[c]) / g.dx;
    if (lo) return (u[c] - u[c - st]) / g.dx;
    return 0;
}

// |grad u| at an arbitrary point, multilinear interpolation of cell-centered
// centered-difference gradients.
double gradient_norm_at(const Field& u, const std::array<double, 3>& p) {
    const Grid& g = *u.grid;
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> t{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
        const double f = (p[a] - g.lower[a]) / g.dx - 0.5;
        int i0 = static_cast<int>(std::floor(f));
        i0 = std::clamp(i0, 0, g.cells[a] - 2);
        base[a] = i0;
        t[a] = std::clamp(f - i0, 0.0, 1.0);
    }
    const int corners = g.dim == 3 ? 8 : 4;
    double sum2 = 0;
    for (int axis = 0; axis < g.dim; ++axis) {
        double acc = 0;
        for (int m = 0; m < corners; ++m) {
            double w = 1;
            std::array<int, 3> ijk = base;
            for (int a = 0; a < g.dim; ++a) {
                const int bit = (m >> a) & 1;
                w *= bit ? t[a] : 1 - t[a];
                ijk[a] += bit;
            }
            acc += w * cell_gradient(u, g.index(ijk[0], ijk[1], ijk[2]), axis);
        }
        sum2 += acc * acc;
    }
    return std::sqrt(sum2);
}

}  // namespace

std::vector<double> boundary_gradient_values(const Field& u, const Field& ds,
                                             const std::vector<BoundaryFace>& faces) {
    const Grid& g = *u.grid;
    const double dx = g.dx;
    const double depth1 = 2.5, depth2 = 4.5;  // probe depths, in cells
    const double window = 5.0 * dx;           // tangential smoothing radius

    const std::size_t nf = faces.size();
    std::vector<std::array<double, 3>> pos(nf), normal(nf);
    std::vector<double> s1(nf), s2(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        std::array<double, 3> nu{0, 0, 0};
        double norm = 0;
        for (int a = 0; a < g.dim; ++a) {
            nu[a] = cell_gradient(ds, faces[f].in_cell, a);
            norm += nu[a] * nu[a];
        }
        norm = std::sqrt(norm);
        if (norm < 1e-9) {
            nu = {0, 0, 0};
            nu[faces[f].axis] = static_cast<double>(faces[f].sign);
            norm = 1;
        }
        for (int a = 0; a < g.dim; ++a) nu[a] /= norm;
        pos[f] = face_midpoint(g, faces[f]);
        normal[f] = nu;
        auto probe = [&](double depth_cells) {
            std::array<double, 3> p = pos[f];
            for (int a = 0; a < g.dim; ++a) p[a] -= depth_cells * dx * nu[a];
            return gradient_norm_at(u, p);
        };
        s1[f] = probe(depth1);
        s2[f] = probe(depth2);
    }

    // Bucket faces by interface cell for the window search.
    std::vector<std::vector<std::int32_t>> bucket(static_cast<std::size_t>(g.total));
    for (std::size_t f = 0; f < nf; ++f)
        bucket[static_cast<std::size_t>(faces[f].in_cell)].push_back(static_cast<std::int32_t>(f));

    std::vector<double> out(nf);
    const int reach = static_cast<int>(window / dx) + 1;
    for (std::size_t f = 0; f < nf; ++f) {
        const auto ijk = g.unpack(faces[f].in_cell);
        double a1 = 0, a2 = 0;
        int cnt = 0;
        const int klo = g.dim == 3 ? std::max(0, ijk[2] - reach) : 0;
        const int khi = g.dim == 3 ? std::min(g.cells[2] - 1, ijk[2] + reach) : 0;
        for (int k = klo; k <= khi; ++k) {
            for (int j = std::max(0, ijk[1] - reach); j <= std::min(g.cells[1] - 1, ijk[1] + reach); ++j) {
                for (int i = std::max(0, ijk[0] - reach); i <= std::min(g.cells[0] - 1, ijk[0] + reach); ++i) {
                    for (std::int32_t f2 : bucket[static_cast<std::size_t>(g.index(i, j, k))]) {
                        double d2 = 0, dot = 0;
                        for (int a = 0; a < g.dim; ++a) {
                            const double d = pos[f][a] - pos[static_cast<std::size_t>(f2)][a];
                            d2 += d * d;
                            dot += normal[f][a] * normal[static_cast<std::size_t>(f2)][a];
                        }
                        // same sheet only: nearby position and compatible normal
                        if (d2 <= window * window && dot > 0.1) {
                            a1 += s1[static_cast<std::size_t>(f2)];
                            a2 += s2[static_cast<std::size_t>(f2)];
                            ++cnt;
                        }
                    }
                }
            }
        }
        a1 /= cnt;
        a2 /= cnt;
        out[f] = std::max(0.0, a1 + (a1 - a2) * depth1 / (depth2 - depth1));
    }
    return out;
}

double dirichlet_energy(const Field& u, const Mask& source, const Mask& support) {
    // Face-difference quadrature of |grad u|^2, matching the solver's
    // face-anchored Dirichlet data: a face between a support cell and pinned
    // data carries the one-sided half-cell term 2*(u - data)^2.
    const Grid& g = *u.grid;
    const double w = std::pow(g.dx, g.dim - 2.0);
    double acc = 0;
    auto boundary_term = [&](std::int64_t cell, bool against_source) {
        const double d = against_source ? 1.0 - u[cell] : u[cell];
        return 2.0 * d * d;
    };
    for (std::int64_t c = 0; c < g.total; ++c) {
        const auto ijk = g.unpack(c);
        const bool cs = source.at(c), cp = !cs && support.at(c);
        for (int a = 0; a < g.dim; ++a) {
            if (cp && ijk[a] == 0) acc += boundary_term(c, false);  // box edge: zero face
            if (ijk[a] + 1 >= g.cells[a]) {
                if (cp) acc += boundary_term(c, false);
                continue;
            }
            const std::int64_t nb = c + g.stride(a);
            const bool ns = source.at(nb), np = !ns && support.at(nb);
            if (cs && ns) continue;
            if (cp && np) {
                const double du = u[nb] - u[c];
                acc += du * du;
            } else if (cp) {
                acc += boundary_term(c, ns);
            } else if (np) {
                acc += boundary_term(nb, cs);
            } else if (cs != ns) {
                acc += 2.0;  // pinned 1 against pinned 0 across one face
            }
        }
    }
    return acc * w;
}

double max_laplacian_residual(const Field& u, const Mask& source, const Mask& domain) {
    // Standard 5/7-point residual over cells whose full stencil lies in the
    // solve set; interface-adjacent rows use one-sided data and are covered by
    // the solver's own residual instead.
    const Grid& g = *u.grid;
    double worst = 0;
    for (std::int64_t c = 0; c < g.total; ++c) {
        if (!domain.at(c) || source.at(c)) continue;
        const auto ijk = g.unpack(c);
        bool interior = true;
        for (int a = 0; a < g.dim && interior; ++a)
            for (int sgn = -1; sgn <= 1 && interior; sgn += 2) {
                const int v = ijk[a] + sgn;
                if (v < 0 || v >= g.cells[a] || !domain.at(c + sgn * g.stride(a)) ||
                    source.at(c + sgn * g.stride(a)))
                    interior = false;
            }
        if (!interior) continue;
        double acc = -2.0 * g.dim * u[c];
        for (int a = 0; a < g.dim; ++a)
            for (int sgn = -1; sgn <= 1; sgn += 2) acc += u[c + sgn * g.stride(a)];
        worst = std::max(worst, std::abs(acc));
    }
    return worst / (g.dx * g.dx);
}

PotentialSolution solve_potential(const Mask& source, const Mask& omega, const SolverParams& params,
                                  const Field* warm_start) {
    require(source.grid->same_layout(*omega.grid), ErrorCode::InvalidArgument,
            "source and omega live on different grids");
    require(!source.empty(), ErrorCode::DegenerateSet, "source set is empty");
    require(strictly_contains(source, omega), ErrorCode::Containment,
            "source must be strictly inside omega (no touching boundaries)");
    require(!touches_margin(omega, kDomainMarginCells), ErrorCode::Containment,
            "omega must keep a " + std::to_string(kDomainMarginCells) +
                "-cell margin from the domain edge");
    return detail::solve_on_set(source, omega, params, warm_start);
}

PotentialSolution detail::solve_on_set(const Mask& source, const Mask& omega,
                                       const SolverParams& params, const Field* warm_start) {
    const Grid& g = *omega.grid;
    require(params.tolerance > 0, ErrorCode::InvalidArgument, "solver tolerance must be positive");
    require(params.method == "cg" || params.method == "sor", ErrorCode::InvalidArgument,
            "solver method must be 'cg' or 'sor'");

    System s = build_system(source, omega);
    std::vector<double> x(s.cell_of_unknown.size(), 0.0);
    if (warm_start && warm_start->grid->same_layout(g)) {
        for (std::size_t k = 0; k < x.size(); ++k)
            x[k] = std::clamp((*warm_start)[s.cell_of_unknown[k]], 0.0, 1.0);
    }

    const int max_axis = std::max({g.cells[0], g.cells[1], g.cells[2]});
    const int max_iter = params.max_iterations > 0 ? params.max_iterations : 100 * max_axis;

    // The requested tolerance applies to the Laplacian residual (du/dx^2); the
    // solver iterates on the unscaled stencil residual, floored where double
    // precision cannot resolve further.
    const double dx2 = g.dx * g.dx;
    const double floor_scaled = 64.0 * std::numeric_limits<double>::epsilon() * s.nneigh / dx2;
    const double tol_used = std::max(params.tolerance, floor_scaled);
    const double unscaled_tol = tol_used * dx2;

    SolveStats st;
    if (params.method == "sor")
        st = sor_solve(s, x, unscaled_tol, max_iter, params.sor_omega);
    else
        st = cg_solve(s, x, unscaled_tol, max_iter);

    if (st.unscaled_residual > unscaled_tol)
        fail(ErrorCode::Solver, "potential solve did not converge: residual " +
                                    std::to_string(st.unscaled_residual / dx2) + " > tolerance " +
                                    std::to_string(tol_used) + " after " +
                                    std::to_string(st.iterations) + " iterations");

    PotentialSolution sol;
    sol.u = Field(omega.grid);
    for (std::int64_t c = 0; c < g.total; ++c)
        if (source.at(c)) sol.u[c] = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k)
        sol.u[s.cell_of_unknown[k]] = std::clamp(x[k], 0.0, 1.0);

    sol.iterations = st.iterations;
    sol.tolerance_used = tol_used;
    sol.residual = st.unscaled_residual / dx2;
    sol.capacity = dirichlet_energy(sol.u, source, omega);
    sol.boundary_gradient = boundary_gradient(sol, omega);
    return sol;
}

double capacity_value(const PotentialSolution& sol) { return sol.capacity; }

std::vector<BoundarySample> boundary_gradient(const PotentialSolution& sol, const Mask& omega) {
    const Field ds = signed_distance(omega);
    const auto faces = boundary_faces(omega);
    const auto values = boundary_gradient_values(sol.u, ds, faces);
    std::vector<BoundarySample> out(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        out[f].point = face_midpoint(*omega.grid, faces[f]);
        out[f].value = values[f];
    }
    return out;
}

double energy(const Mask& source, const Mask& omega, const SolverParams& params) {
    return volume(omega) + solve_potential(source, omega, params).capacity;
}

std::vector<double> capacity_refinement_probe(const Mask& source, const Mask& omega,
                                              const std::vector<double>& radii,
                                              const SolverParams& params) {
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        require(radii[i] > radii[i + 1], ErrorCode::InvalidArgument,
                "dilation radii must be strictly decreasing");
    require(radii.empty() || radii.back() >= 0, ErrorCode::InvalidArgument,
            "dilation radii must be nonnegative");

    std::vector<double> caps;
    for (double r : radii) {
        const Mask dilated = dilate_by_radius(omega, r);
        if (touches_margin(dilated, kDomainMarginCells))
            fail(ErrorCode::Containment, "dilation by " + std::to_string(r) +
                                             " leaves the domain margin");
        caps.push_back(solve_potential(source, dilated, params).capacity);
    }
    return caps;
}

}  // namespace bflow
