#pragma once

#include <vector>

namespace bflow::radial {

// Closed-form radial reference solutions for concentric configurations:
// capacity and potential gradient of an annulus, the per-step functional
// profile of the inverted (far-source) problem, equilibrium radii of the
// velocity law V = -1 + |grad u|^2, and the radial evolution ODE. Dimension
// N is 2 or 3; the 2D expressions use the logarithmic potential.

double sphere_area(int N);  // area of the unit sphere: 2*pi (N=2), 4*pi (N=3)
double ball_volume(int N);  // volume of the unit ball: pi (N=2), 4*pi/3 (N=3)

// Capacity of the annulus a < |x| < b (potential 1 on the inner sphere, 0 on
// the outer one).
double capacity(double a, double b, int N);

// |grad u| on the outer sphere |x| = b of that annulus.
double boundary_gradient(double a, double b, int N);

// Independent check of capacity(): 1D finite-difference solve of the radial
// Laplace equation with `nodes` grid points, energy by midpoint quadrature.
double capacity_fd(double a, double b, int N, int nodes = 4000);

// Per-step functional of the inverted radial problem: the trial set is the
// complement of a ball of radius rho around a test point at distance r from
// the current set and R from the source. rho == 0 selects the constant
// candidate (no free boundary at all).
double step_functional_profile(double rho, double r, double R, double h, int N);

// Roots of the profile's stationarity equation f(rho) = 0 on (0, r+h].
struct ProfileRoots {
    bool found = false;
    double rho1 = 0, rho2 = 0;  // smallest and largest root when found
};
ProfileRoots profile_stationary_points(double r, double R, double h, int N);

// f itself (exposed for diagnostics and tests).
double profile_stationarity(double rho, double r, double R, double h, int N);

// Constant of the one-step distance bound d >= r - M*h, from a chosen lower
// radius bound r0: the larger of the two equivalent admissibility conditions.
double nonblowup_constant(double r0, int N);

// Unique b* > a with boundary_gradient(a, b*, N) == 1.
double equilibrium_radius(double a, int N);

// Radial evolution b' = -1 + boundary_gradient(a,b)^2, integrated with the
// classical 4th-order Runge-Kutta scheme at fixed step dt.
struct OdePoint {
    double t = 0, b = 0;
};
struct OdeResult {
    std::vector<OdePoint> points;
    bool collapsed = false;  // b reached the source radius before T
};
OdeResult flow_ode(double a, double b0, double T, int N, double dt);

// Energy of the radial configuration and its exact dissipation rate.
double energy(double a, double b, int N);
double energy_rate(double a, double b, int N);

}  // namespace bflow::radial
