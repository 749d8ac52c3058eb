#pragma once

#include <vector>

#include "potential.hpp"

namespace bflow {

// One evolution step minimizes the Dirichlet energy of the capacity potential
// plus a movement penalty: the positivity set of the minimizer pays
// (1 + d^s_omega/h)_+ per unit volume, so retreating inward is rewarded up to
// depth h and advancing outward is charged beyond rate 1.

struct MinimizerParams {
    SolverParams solver;
    double tau_factor = 0.25;        // level update pseudo-step, tau = tau_factor * h
    int band_cells = 3;              // residual extension band around the moving boundary
    int max_outer = 200;
    double fb_tolerance = 0;         // 0: resolution-based default (see default_fb_tolerance)
    double positivity_epsilon = 1e-8;  // positivity threshold, in units of dx^2
};

struct MinimizerIteration {
    int k = 0;
    double value = 0;
    double fb_residual = 0;
    double movement = 0;  // max boundary displacement applied this iteration
    std::int64_t changed_cells = 0;
};

struct MinimizerResult {
    PotentialSolution sol;
    Mask positivity;
    double value = 0;        // step-functional value of the returned candidate
    double fb_residual = 0;  // max ||grad u|^2 - g| over positivity boundary faces
    int outer_iterations = 0;
    bool converged = false;
    std::vector<MinimizerIteration> log;
};

// Pointwise boundary-cost weight g = (1 + d^s_omega/h)_+.
Field penalty_field(const Mask& omega, double h);
Field penalty_from_distance(const Field& signed_dist, double h);

// The achievable pointwise optimality residual scales like dx/h near the free
// boundary, so the convergence gate follows the resolution.
double default_fb_tolerance(double dx, double h);

// Functional value for an explicit candidate (u, positivity).
double evaluate_step_functional(const Mask& source, const Mask& omega, const Field& u,
                                const Mask& positivity, double h);

MinimizerResult minimize_step_functional(const Mask& source, const Mask& omega, double h,
                                         const MinimizerParams& params,
                                         const Field* warm_start = nullptr);

// Signed residual |grad u|^2 - g sampled on the boundary of
// positivity ∪ eroded(omega, h), one sample per boundary face.
std::vector<BoundarySample> free_boundary_residual(const MinimizerResult& result, const Mask& omega,
                                                   double h);

}  // namespace bflow
