#pragma once

#include <string>
#include <vector>

#include "distance.hpp"
#include "grid.hpp"
#include "mask.hpp"

namespace bflow {

struct SolverParams {
    double tolerance = 1e-8;  // on the max |discrete Laplacian| over unknowns
    int max_iterations = 0;   // 0: 100 x (largest cell count per axis)
    std::string method = "cg";  // "cg" or "sor"
    double sor_omega = 1.9;
};

struct BoundarySample {
    std::array<double, 3> point{0, 0, 0};
    double value = 0;
};

struct PotentialSolution {
    Field u;
    double capacity = 0;
    double residual = 0;        // max |discrete Laplacian| achieved on unknowns
    double tolerance_used = 0;  // requested tolerance after the machine-precision floor
    int iterations = 0;
    std::vector<BoundarySample> boundary_gradient;  // |grad u| at each boundary face of omega
};

// Margin kept between any admissible set and the domain edge, in cells.
inline constexpr int kDomainMarginCells = 3;

// Solve -Lap u = 0 on omega \ source with u = 1 on source and u = 0 outside
// omega, and derive capacity (face-difference quadrature of |grad u|^2) and
// the boundary gradient trace.
PotentialSolution solve_potential(const Mask& source, const Mask& omega, const SolverParams& params,
                                  const Field* warm_start = nullptr);

double capacity_value(const PotentialSolution& sol);

std::vector<BoundarySample> boundary_gradient(const PotentialSolution& sol, const Mask& omega);

double energy(const Mask& source, const Mask& omega, const SolverParams& params);

// Capacities of dilated sets {d^s_omega < r} for a decreasing radius list.
std::vector<double> capacity_refinement_probe(const Mask& source, const Mask& omega,
                                              const std::vector<double>& radii,
                                              const SolverParams& params);

// Shared helpers (used by the step-functional module).
double face_gradient_norm(const Field& u, const BoundaryFace& f);
double dirichlet_energy(const Field& u, const Mask& source, const Mask& support);

// |grad u| at the boundary face midpoints of a set (ds: its signed distance).
// Values are probed a few cells inside along the inward normal, averaged over
// nearby faces with compatible normals, and extrapolated back to the
// interface: raw one-sided face differences carry O(1) relative noise on
// stair-shaped interfaces, and the smoothing cancels the oscillatory part
// before the extrapolation can amplify it.
std::vector<double> boundary_gradient_values(const Field& u, const Field& ds,
                                             const std::vector<BoundaryFace>& faces);
double max_laplacian_residual(const Field& u, const Mask& source, const Mask& domain);

namespace detail {
// Same solve without the strict-containment precondition; the step minimizer
// keeps source ∪ its one-cell dilation inside the domain by construction.
PotentialSolution solve_on_set(const Mask& source, const Mask& domain, const SolverParams& params,
                               const Field* warm_start);
}  // namespace detail

}  // namespace bflow
