#include "radial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace bflow::radial {

namespace {
constexpr double kPi = 3.14159265358979323846;

void check_dim(int N) {
    require(N == 2 || N == 3, ErrorCode::InvalidArgument, "dimension must be 2 or 3");
}
void check_annulus(double a, double b) {
    require(a > 0 && b > a, ErrorCode::InvalidArgument,
            "annulus radii must satisfy 0 < a < b (got a=" + std::to_string(a) +
                ", b=" + std::to_string(b) + ")");
}

// Bisection on a bracketing interval, to absolute tolerance.
template <class F>
double bisect(F f, double lo, double hi, double tol) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo <= 0) == (fm <= 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double sphere_area(int N) {
    check_dim(N);
    return N == 2 ? 2.0 * kPi : 4.0 * kPi;
}

double ball_volume(int N) {
    check_dim(N);
    return N == 2 ? kPi : 4.0 * kPi / 3.0;
}

double capacity(double a, double b, int N) {
    check_dim(N);
    check_annulus(a, b);
    if (N == 2) return 2.0 * kPi / std::log(b / a);
    return sphere_area(N) * (N - 2) / (std::pow(a, 2.0 - N) - std::pow(b, 2.0 - N));
}

double boundary_gradient(double a, double b, int N) {
    check_dim(N);
    check_annulus(a, b);
    if (N == 2) return 1.0 / (b * std::log(b / a));
    return std::pow(b, 1.0 - N) * (N - 2) / (std::pow(a, 2.0 - N) - std::pow(b, 2.0 - N));
}

double capacity_fd(double a, double b, int N, int nodes) {
    check_dim(N);
    check_annulus(a, b);
    require(nodes >= 8, ErrorCode::InvalidArgument, "radial solve needs at least 8 nodes");

    // (r^{N-1} u')' = 0 with u(a)=1, u(b)=0, solved by the Thomas algorithm.
    const int n = nodes;
    const double dr = (b - a) / (n - 1);
    auto wface = [&](int i) {  // r^{N-1} at the face between node i and i+1
        const double r = a + (i + 0.5) * dr;
        return std::pow(r, N - 1.0);
    };
    const int m = n - 2;  // interior unknowns
    std::vector<double> diag(m), rhs(m, 0.0), sub(m, 0.0), sup(m, 0.0);
    for (int i = 0; i < m; ++i) {
        const double wl = wface(i), wr = wface(i + 1);
        diag[i] = wl + wr;
        if (i > 0) sub[i] = -wl;
        if (i < m - 1) sup[i] = -wr;
    }
    rhs[0] += wface(0) * 1.0;  // u(a) = 1; u(b) = 0 contributes nothing

    for (int i = 1; i < m; ++i) {
        const double f = sub[i] / diag[i - 1];
        diag[i] -= f * sup[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    std::vector<double> u(n, 0.0);
    u[0] = 1.0;
    u[n - 1] = 0.0;
    for (int i = m - 1; i >= 0; --i)
        u[i + 1] = (rhs[i] - (i < m - 1 ? sup[i] * u[i + 2] : 0.0)) / diag[i];

    double energy = 0;
    for (int i = 0; i < n - 1; ++i) {
        const double du = (u[i + 1] - u[i]) / dr;
        energy += wface(i) * du * du * dr;
    }
    return sphere_area(N) * energy;
}

double step_functional_profile(double rho, double r, double R, double h, int N) {
    check_dim(N);
    require(r > 0 && h > 0 && R > r + h, ErrorCode::InvalidArgument,
            "profile needs r > 0, h > 0 and R > r + h");
    require(rho >= 0 && rho < R, ErrorCode::InvalidArgument, "profile needs 0 <= rho < R");

    const double alpha = sphere_area(N);
    const double rh = r + h;
    if (rho == 0.0) return alpha * std::pow(rh, N + 1.0) / (h * N * (N + 1.0));

    const double cap = N == 2 ? 2.0 * kPi / std::log(R / rho)
                              : alpha * (N - 2) / (std::pow(rho, 2.0 - N) - std::pow(R, 2.0 - N));
    if (rho > rh) return cap;
    const double penalty = alpha / h *
                           (std::pow(rh, N + 1.0) / (N * (N + 1.0)) +
                            std::pow(rho, N + 1.0) / (N + 1.0) - rh * std::pow(rho, 1.0 * N) / N);
    return cap + penalty;
}

double profile_stationarity(double rho, double r, double R, double h, int N) {
    check_dim(N);
    require(rho > 0 && rho < R, ErrorCode::InvalidArgument, "stationarity needs 0 < rho < R");
    double lead;
    if (N == 2) {
        const double t = rho * std::log(R / rho);
        lead = 1.0 / (t * t);
    } else {
        const double t = rho * (1.0 - std::pow(rho / R, N - 2.0));
        lead = (N - 2.0) * (N - 2.0) / (t * t);
    }
    return lead - (r + h - rho) / h;
}

ProfileRoots profile_stationary_points(double r, double R, double h, int N) {
    check_dim(N);
    require(r > 0 && h > 0 && R > r + h, ErrorCode::InvalidArgument,
            "stationary points need r > 0, h > 0 and R > r + h");

    // f is convex on (0, r+h], diverging at 0+, so a scan for negative values
    // brackets at most two roots.
    const int kScan = 10000;
    const double hi = r + h;
    ProfileRoots out;
    double prev_rho = hi / (kScan + 1);
    double prev_f = profile_stationarity(prev_rho, r, R, h, N);
    double first_lo = -1, first_hi = -1, last_lo = -1, last_hi = -1;
    for (int i = 2; i <= kScan + 1; ++i) {
        const double rho = hi * i / (kScan + 1);
        const double f = profile_stationarity(rho, r, R, h, N);
        if ((prev_f <= 0) != (f <= 0)) {
            if (first_lo < 0) {
                first_lo = prev_rho;
                first_hi = rho;
            }
            last_lo = prev_rho;
            last_hi = rho;
        }
        prev_rho = rho;
        prev_f = f;
    }
    if (first_lo < 0) return out;  // no sign change: no interior stationary point

    auto f = [&](double rho) { return profile_stationarity(rho, r, R, h, N); };
    out.found = true;
    out.rho1 = bisect(f, first_lo, first_hi, 1e-10);
    out.rho2 = bisect(f, last_lo, last_hi, 1e-10);
    return out;
}

double nonblowup_constant(double r0, int N) {
    check_dim(N);
    require(r0 > 0, ErrorCode::InvalidArgument, "r0 must be positive");
    const double c1 = 16.0 * (N - 2.0) * (N - 2.0) / (r0 * r0) - 1.0;
    const double c2 = std::pow(4.0 * (N - 2.0) / std::sqrt(r0), 2.0);
    return std::max(c1, c2);
}

double equilibrium_radius(double a, int N) {
    check_dim(N);
    require(a > 0, ErrorCode::InvalidArgument, "source radius must be positive");
    // boundary_gradient(a, ., N) decreases from +inf to 0, so the unit-gradient
    // radius is a simple bracketed root.
    auto g = [&](double b) { return boundary_gradient(a, b, N) - 1.0; };
    double lo = a * (1.0 + 1e-9);
    double hi = 2.0 * a;
    while (g(hi) > 0) hi *= 2.0;
    return bisect(g, lo, hi, 1e-12 * a);
}

double energy(double a, double b, int N) {
    return ball_volume(N) * std::pow(b, 1.0 * N) + capacity(a, b, N);
}

double energy_rate(double a, double b, int N) {
    const double g = boundary_gradient(a, b, N);
    const double v = -1.0 + g * g;
    return -sphere_area(N) * std::pow(b, N - 1.0) * v * v;
}

OdeResult flow_ode(double a, double b0, double T, int N, double dt) {
    check_dim(N);
    require(b0 > a && a > 0, ErrorCode::InvalidArgument, "need 0 < a < b0");
    require(T > 0 && dt > 0, ErrorCode::InvalidArgument, "need T > 0 and dt > 0");

    auto vel = [&](double b) {
        const double g = boundary_gradient(a, b, N);
        return -1.0 + g * g;
    };

    OdeResult out;
    double b = b0, t = 0;
    out.points.push_back({t, b});
    const double floor = a * (1.0 + 1e-12);
    while (t < T - 1e-15) {
        const double step = std::min(dt, T - t);
        const double k1 = vel(b);
        const double k2 = vel(std::max(floor, b + 0.5 * step * k1));
        const double k3 = vel(std::max(floor, b + 0.5 * step * k2));
        const double k4 = vel(std::max(floor, b + step * k3));
        b += step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += step;
        if (b <= floor) {
            out.collapsed = true;
            out.points.push_back({t, a});
            return out;
        }
        out.points.push_back({t, b});
    }
    return out;
}

}  // namespace bflow::radial
