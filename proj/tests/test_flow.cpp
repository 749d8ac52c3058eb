#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flow.hpp"
#include "radial.hpp"

using namespace bflow;

namespace {

FlowConfig quick_config(double h, int steps) {
    FlowConfig cfg;
    cfg.h = h;
    cfg.steps = steps;
    return cfg;
}

}  // namespace

TEST_CASE("flow bookkeeping") {
    auto g = make_grid({-2.5, -2.5}, {2.5, 2.5}, {128, 128});
    const Mask s = rasterize_shape("ball(0, 0, 1)", g);
    const Mask omega = rasterize_shape("ball(0, 0, 2)", g);

    CHECK_THROWS_AS(Flow(s, omega, quick_config(g->dx, 5)), Error);   // h guard
    CHECK_THROWS_AS(Flow(s, omega, quick_config(0.1, 0)), Error);     // steps
    CHECK_THROWS_AS(Flow(omega, s, quick_config(0.1, 5)), Error);     // containment

    Flow flow(s, omega, quick_config(0.1, 3));
    CHECK(flow.current().n == 0);
    CHECK(flow.current().row.energy ==
          doctest::Approx(flow.current().row.volume + flow.current().row.capacity));
    flow.step();
    flow.step();
    CHECK(flow.current().n == 2);
    CHECK(flow.current().time == 2 * 0.1);  // exact
    CHECK(flow.states().size() == 3);
}

TEST_CASE("near-equilibrium step barely moves") {
    auto g = make_grid({-2.75, -2.75}, {2.75, 2.75}, {192, 192});
    const Mask s = rasterize_shape("ball(0, 0, 1)", g);
    const double beq = radial::equilibrium_radius(1, 2);
    char buf[64];
    std::snprintf(buf, sizeof buf, "ball(0, 0, %.8f)", beq);
    const Mask omega = rasterize_shape(buf, g);

    Flow flow(s, omega, quick_config(0.06, 1));
    flow.step();
    CHECK(hausdorff_distance(flow.current().omega, omega) <= g->dx * (1 + 1e-12));
    CHECK(std::abs(volume_equivalent_radius(flow.current().omega) - beq) < g->dx);
}

TEST_CASE("a source-free component erodes at unit speed") {
    auto g = make_grid({-3, -3}, {3, 3}, {192, 192});
    const Mask s = rasterize_shape("ball(0, 0, 1)", g);
    const Mask omega = rasterize_shape("union(ball(0, 0, 1.8), ball(2.3, 0, 0.4))", g);
    const double h = 0.08;

    Flow flow(s, omega, quick_config(h, 3));
    auto component_radius = [&](const Mask& m) {
        double vol = 0;
        for (std::int64_t c = 0; c < g->total; ++c) {
            const auto p = g->center(c);
            if (m.at(c) && std::hypot(p[0] - 2.3, p[1]) < 0.5) vol += g->cell_measure();
        }
        return std::sqrt(vol / radial::ball_volume(2));
    };
    double prev = component_radius(flow.current().omega);
    for (int n = 0; n < 3; ++n) {
        flow.step();
        const double cur = component_radius(flow.current().omega);
        CHECK(std::abs((prev - cur) - h) < 1.5 * g->dx);
        prev = cur;
    }
}

TEST_CASE("sub-equilibrium data expand") {
    auto g = make_grid({-2.75, -2.75}, {2.75, 2.75}, {192, 192});
    const Mask s = rasterize_shape("ball(0, 0, 1)", g);
    const Mask omega = rasterize_shape("ball(0, 0, 1.3)", g);
    Flow flow(s, omega, quick_config(0.06, 1));
    flow.step();
    CHECK(volume_equivalent_radius(flow.current().omega) > 1.35);
}

TEST_CASE("shrinking run: ledger, certificates, erosion bound") {
    auto g = make_grid({-2.75, -2.75}, {2.75, 2.75}, {192, 192});
    const Mask s = rasterize_shape("ball(0, 0, 1)", g);
    const Mask omega = rasterize_shape("ball(0, 0, 2.2)", g);
    const double h = 0.06;
    const auto run = run_flow(s, omega, quick_config(h, 10));
    REQUIRE(run.final_status == FlowStatus::CompletedSteps);
    CHECK(run.energy_monotone);

    const double allowance = kEnergyAllowanceFactor * run.states[0].row.energy;
    for (std::size_t i = 1; i < run.states.size(); ++i) {
        const auto& prev = run.states[i - 1];
        const auto& next = run.states[i];
        const double de = next.row.energy - prev.row.energy;
        const double eq = quadrature_allowance(prev, next);
        CHECK(de <= next.row.certificate + eq);
        CHECK(next.row.certificate <= eq);
        CHECK(next.row.certificate <= 1e-12);  // nonpositive cell by cell
        CHECK(de <= allowance);
        // the public recomputation agrees with the ledger entry
        CHECK(monotonicity_certificate(prev, next, h) ==
              doctest::Approx(next.row.certificate).epsilon(1e-12));
        // the new set always contains the eroded previous set
        CHECK(subset_of(erode(prev.omega, h), next.omega));
        CHECK(next.row.t == next.row.n * h);
    }
    // strictly shrinking data give a strictly negative certificate
    CHECK(run.states[1].row.certificate < -1e-3);
}

TEST_CASE("flow terminates at the domain margin") {
    auto g = make_grid({-1.7, -1.7}, {1.7, 1.7}, {128, 128});
    const Mask s = rasterize_shape("ball(0.6, 0, 0.55)", g);
    const Mask omega = rasterize_shape("ball(0.6, 0, 1.0)", g);
    // the equilibrium set around this source pokes past the box margin
    const auto run = run_flow(s, omega, quick_config(0.06, 40));
    CHECK(run.final_status == FlowStatus::MarginReached);
    CHECK(run.states.size() < 41);
}

TEST_CASE("step error on a crippled minimizer") {
    auto g = make_grid({-2.5, -2.5}, {2.5, 2.5}, {128, 128});
    const Mask s = rasterize_shape("ball(0, 0, 1)", g);
    const Mask omega = rasterize_shape("ball(0, 0, 2)", g);
    FlowConfig cfg = quick_config(0.08, 2);
    cfg.minimizer.max_outer = 1;  // cannot reach a stop condition
    Flow flow(s, omega, cfg);
    CHECK_THROWS_AS(flow.step(), Error);
    // run_flow preserves the partial ledger instead of throwing
    const auto run = run_flow(s, omega, cfg);
    CHECK(run.final_status == FlowStatus::SolverFailed);
    CHECK(run.states.size() == 1);
    CHECK(!run.error_message.empty());
}

TEST_CASE("comparison experiment") {
    auto g = make_grid({-2.75, -2.75}, {2.75, 2.75}, {192, 192});
    const Mask s = rasterize_shape("ball(0, 0, 1)", g);
    const Mask om_a = rasterize_shape("ball(0, 0, 1.8)", g);
    const Mask om_b = rasterize_shape("ball(0, 0, 2.2)", g);

    const auto rep = comparison_experiment(s, om_a, s, om_b, quick_config(0.06, 6));
    CHECK(rep.nested_throughout);
    CHECK(rep.first_violation_step == -1);
    CHECK(rep.steps_run == 6);
    for (double p : rep.max_protrusion) CHECK(p <= g->dx * (1 + 1e-9));

    // identical inputs nest exactly
    const auto same = comparison_experiment(s, om_a, s, om_a, quick_config(0.06, 3));
    CHECK(same.nested_throughout);
    for (double p : same.max_protrusion) CHECK(p == 0.0);

    // eroded initial data stay nested as well
    const Mask om_er = erode(om_b, 2 * 0.06);
    const auto er = comparison_experiment(s, om_er, s, om_b, quick_config(0.06, 6));
    CHECK(er.nested_throughout);

    CHECK_THROWS_AS(comparison_experiment(s, om_b, s, om_a, quick_config(0.06, 3)), Error);
}

TEST_CASE("refinement study") {
    auto g = make_grid({-2.75, -2.75}, {2.75, 2.75}, {192, 192});
    const Mask s = rasterize_shape("ball(0, 0, 1)", g);
    const Mask omega = rasterize_shape("ball(0, 0, 2.2)", g);

    // single h degenerates to one flow and its oracle comparison
    RadialOracle oracle{2, 1.0, 2.2};
    const auto single = refinement_study(s, omega, {0.12}, 0.48, FlowConfig{}, oracle);
    CHECK(single.pair_hausdorff.empty());
    CHECK(single.cauchy_ratio.empty());
    REQUIRE(single.ode_deviation.size() == 1);
    CHECK(single.ode_deviation[0] < 3 * g->dx);
    CHECK(single.energy_time_monotone);

    const auto two = refinement_study(s, omega, {0.12, 0.06}, 0.48, FlowConfig{}, oracle);
    REQUIRE(two.pair_hausdorff.size() == 1);
    CHECK(two.pair_hausdorff[0][2] > 0.0);
    CHECK(two.energy_time_monotone);
    CHECK(two.sample_times[0][2] == doctest::Approx(0.48));

    CHECK_THROWS_AS(refinement_study(s, omega, {0.06, 0.12}, 0.48, FlowConfig{}, oracle), Error);
}
