#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "radial.hpp"
#include "error.hpp"

using namespace bflow;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Independent bisection used as the oracle for equilibrium radii.
template <class F>
double bisect_root(F f, double lo, double hi) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f(lo) <= 0) == (f(mid) <= 0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}
}  // namespace

TEST_CASE("annulus capacity closed forms") {
    CHECK(radial::capacity(1, 2, 3) == doctest::Approx(8 * kPi).epsilon(1e-14));
    CHECK(radial::capacity(1, std::exp(1.0), 2) == doctest::Approx(2 * kPi).epsilon(1e-14));
    // large outer radius: monotone decrease toward the single-sphere value
    double prev = radial::capacity(1, 4, 3);
    for (double b : {16.0, 256.0, 1e6}) {
        const double c = radial::capacity(1, b, 3);
        CHECK(c < prev);
        prev = c;
    }
    CHECK(prev == doctest::Approx(4 * kPi).epsilon(1e-5));
    CHECK_THROWS_AS(radial::capacity(2, 1, 3), Error);
    CHECK_THROWS_AS(radial::capacity(1, 2, 5), Error);
}

TEST_CASE("capacity monotone in both radii") {
    for (int N : {2, 3}) {
        for (double a : {0.5, 1.0, 1.5}) {
            for (double b : {2.0, 2.5, 3.0}) {
                CHECK(radial::capacity(a, b + 0.01, N) < radial::capacity(a, b, N));
                CHECK(radial::capacity(a + 0.01, b, N) > radial::capacity(a, b, N));
            }
        }
    }
}

TEST_CASE("boundary gradient closed forms") {
    CHECK(radial::boundary_gradient(1, 2, 3) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(radial::boundary_gradient(1, 2, 2) ==
          doctest::Approx(1.0 / (2 * std::log(2.0))).epsilon(1e-14));
    const double golden = 0.5 * (1 + std::sqrt(5.0));
    CHECK(radial::boundary_gradient(1, golden, 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("1D finite-difference solve confirms the capacity formula") {
    CHECK(std::abs(radial::capacity_fd(1, 2, 3) - 8 * kPi) / (8 * kPi) < 1e-3);
    CHECK(std::abs(radial::capacity_fd(1, 2, 3, 8000) - 8 * kPi) / (8 * kPi) < 1e-6);
    CHECK(std::abs(radial::capacity_fd(1, std::exp(1.0), 2) - 2 * kPi) / (2 * kPi) < 1e-6);
    // shrinking the outer radius raises the capacity, solver-side as well
    CHECK(radial::capacity_fd(1, 1.5, 3) > radial::capacity_fd(1, 2, 3));
}

TEST_CASE("step-functional profile") {
    // constant-candidate value for r=1, h=0.1 in 3D
    const double expected = 4 * kPi * std::pow(1.1, 4) / (0.1 * 3 * 4);
    CHECK(radial::step_functional_profile(0, 1, 10, 0.1, 3) ==
          doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(15.332).epsilon(1e-3));

    // the two branches agree at the seam rho = r + h
    for (int N : {2, 3}) {
        const double r = 1, R = 10, h = 0.1, seam = r + h;
        const double below = radial::step_functional_profile(seam * (1 - 1e-9), r, R, h, N);
        const double above = radial::step_functional_profile(seam * (1 + 1e-9), r, R, h, N);
        const double at = radial::step_functional_profile(seam, r, R, h, N);
        CHECK(std::abs(below - at) <= 1e-6 * std::abs(at));
        CHECK(std::abs(above - at) <= 1e-6 * std::abs(at));
        const double exact_seam =
            N == 2 ? 2 * kPi / std::log(R / seam)
                   : 4 * kPi / (std::pow(seam, -1.0) - std::pow(R, -1.0));
        CHECK(at == doctest::Approx(exact_seam).epsilon(1e-12));
    }
}

TEST_CASE("profile stationary points") {
    const double r = 1, R = 10, h = 1e-3;
    const auto roots = radial::profile_stationary_points(r, R, h, 3);
    REQUIRE(roots.found);
    CHECK(roots.rho1 < roots.rho2);
    CHECK(std::abs(radial::profile_stationarity(roots.rho1, r, R, h, 3)) < 1e-8 / h);
    CHECK(std::abs(radial::profile_stationarity(roots.rho2, r, R, h, 3)) < 1e-8 / h);

    // one-step distance bound with the admissibility constant at r0 = 0.9
    const double M = radial::nonblowup_constant(0.9, 3);
    CHECK(M == doctest::Approx(std::max(16.0 / 0.81 - 1.0, 16.0 / 0.9)).epsilon(1e-14));
    CHECK(roots.rho2 >= r - M * h);

    // the interior minimum beats the constant candidate
    CHECK(radial::step_functional_profile(roots.rho2, r, R, h, 3) <
          radial::step_functional_profile(0, r, R, h, 3));

    // profile shape: rising, falling, rising across the two roots
    auto J = [&](double rho) { return radial::step_functional_profile(rho, r, R, h, 3); };
    CHECK(J(0.5 * roots.rho1) < J(0.95 * roots.rho1));
    CHECK(J(roots.rho1 * 1.000001) > J(0.5 * (roots.rho1 + roots.rho2)));
    CHECK(J(0.5 * (roots.rho1 + roots.rho2)) > J(roots.rho2));
    CHECK(J(roots.rho2) < J(std::min(roots.rho2 * 1.5, r + h)));

    // large h: no interior stationary point
    CHECK(!radial::profile_stationary_points(1, 10, 1.0, 3).found);
}

TEST_CASE("equilibrium radius") {
    const double golden = 0.5 * (1 + std::sqrt(5.0));
    CHECK(std::abs(radial::equilibrium_radius(1, 3) - golden) < 1e-9);

    // independent bisection on b log b = 1
    const double ref2 = bisect_root([](double b) { return b * std::log(b) - 1.0; }, 1.0, 3.0);
    CHECK(std::abs(radial::equilibrium_radius(1, 2) - ref2) < 1e-8);
    CHECK(ref2 == doctest::Approx(1.76322).epsilon(1e-5));

    // closed form for a=2 in 3D: root of b^2 - 2b - 2
    CHECK(std::abs(radial::equilibrium_radius(2, 3) - (1 + std::sqrt(3.0))) < 1e-9);
    // the law does not scale linearly with the source radius
    CHECK(std::abs(radial::equilibrium_radius(2, 3) - 2 * radial::equilibrium_radius(1, 3)) > 0.1);
    // 2D regression pin, from the same independent bisection
    const double ref2a2 =
        bisect_root([](double b) { return b * std::log(b / 2.0) - 1.0; }, 2.0, 6.0);
    CHECK(std::abs(radial::equilibrium_radius(2, 2) - ref2a2) < 1e-8);
}

TEST_CASE("radial evolution") {
    const double golden = 0.5 * (1 + std::sqrt(5.0));

    // stationary at the equilibrium radius
    auto eq = radial::flow_ode(1, golden, 5, 3, 1e-3);
    CHECK(!eq.collapsed);
    for (const auto& p : eq.points) CHECK(std::abs(p.b - golden) < 1e-9);

    // contraction from above
    auto down = radial::flow_ode(1, 3, 50, 3, 1e-3);
    CHECK(std::abs(down.points.back().b - golden) < 1e-6);
    for (std::size_t i = 1; i < down.points.size(); ++i)
        CHECK(down.points[i].b <= down.points[i - 1].b + 1e-12);

    // expansion from below in 2D
    const double ref2 = bisect_root([](double b) { return b * std::log(b) - 1.0; }, 1.0, 3.0);
    auto up = radial::flow_ode(1, 1.2, 50, 2, 1e-3);
    CHECK(std::abs(up.points.back().b - ref2) < 1e-5);
    for (std::size_t i = 1; i < up.points.size(); ++i)
        CHECK(up.points[i].b >= up.points[i - 1].b - 1e-12);

    // trajectories keep their side of the equilibrium
    for (int N : {2, 3}) {
        for (double b0 : {1.1, 1.4, 2.0, 2.8}) {
            const double beq = radial::equilibrium_radius(1, N);
            const auto run = radial::flow_ode(1, b0, 3, N, 1e-3);
            for (const auto& p : run.points)
                CHECK((b0 > beq ? p.b >= beq - 1e-9 : p.b <= beq + 1e-9));
        }
    }
}

TEST_CASE("energy dissipation rate along the radial flow") {
    for (int N : {2, 3}) {
        const double a = 1, b0 = N == 3 ? 3.0 : 2.5;
        const double dt = 1e-3;
        const auto run = radial::flow_ode(a, b0, 1.0, N, dt);
        const auto& pts = run.points;
        REQUIRE(pts.size() > 100);
        for (int s = 1; s <= 20; ++s) {
            const std::size_t i = s * (pts.size() - 2) / 21;
            if (i == 0) continue;
            const double fd = (radial::energy(a, pts[i + 1].b, N) -
                               radial::energy(a, pts[i - 1].b, N)) /
                              (pts[i + 1].t - pts[i - 1].t);
            const double exact = radial::energy_rate(a, pts[i].b, N);
            CHECK(std::abs(fd - exact) <= 1e-4 * std::abs(exact));
        }
    }
}
