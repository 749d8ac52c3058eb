#include "flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bflow {

std::string to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::Ok: return "ok";
        case FlowStatus::CompletedSteps: return "completed";
        case FlowStatus::ContainmentLost: return "containment_lost";
        case FlowStatus::MarginReached: return "margin";
        case FlowStatus::SolverFailed: return "solver_failed";
    }
    return "unknown";
}

namespace {

double certificate_value(const Mask& prev_omega, const Mask& positivity, double h) {
    const Grid& g = *prev_omega.grid;
    const Field ds = signed_distance(prev_omega);
    const double meas = g.cell_measure();
    double acc = 0;
    for (std::int64_t c = 0; c < g.total; ++c) {
        const bool core = ds[c] < -h;
        if (core) continue;
        const bool in_old = prev_omega.at(c);
        const bool in_new = positivity.at(c);
        if (in_old == in_new) continue;
        acc += (in_old ? 1.0 : -1.0) * ds[c] / h * meas;
    }
    return acc;
}

}  // namespace

Flow::Flow(Mask source, Mask omega0, FlowConfig cfg)
    : source_(std::move(source)), cfg_(std::move(cfg)) {
    const Grid& g = *omega0.grid;
    require(source_.grid->same_layout(g), ErrorCode::InvalidArgument,
            "source and omega live on different grids");
    require(cfg_.h >= 2.0 * g.dx, ErrorCode::InvalidArgument,
            "time step below resolution guard (h >= 2*dx required)");
    require(cfg_.steps >= 1, ErrorCode::InvalidArgument, "flow needs at least one step");
    require(strictly_contains(source_, omega0), ErrorCode::Containment,
            "source must be strictly inside the initial set");
    require(!touches_margin(omega0, kDomainMarginCells), ErrorCode::Containment,
            "initial set must keep the domain margin");

    FlowState st;
    st.n = 0;
    st.time = 0;
    st.omega = std::move(omega0);
    const PotentialSolution sol = solve_potential(source_, st.omega, cfg_.minimizer.solver);
    st.row = LedgerRow{0, 0, volume(st.omega), sol.capacity, volume(st.omega) + sol.capacity,
                       0.0, 0.0, FlowStatus::Ok};
    states_.push_back(std::move(st));
}

void Flow::step() {
    require(!terminated(), ErrorCode::InvalidArgument, "flow already terminated");
    const FlowState& prev = states_.back();
    const double h = cfg_.h;

    MinimizerResult res;
    try {
        const Field* warm = prev.last_min ? &prev.last_min->sol.u : nullptr;
        res = minimize_step_functional(source_, prev.omega, h, cfg_.minimizer, warm);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Containment) {
            terminal_ = FlowStatus::MarginReached;
            return;
        }
        throw;
    }
    if (!res.converged)
        fail(ErrorCode::Solver,
             "step " + std::to_string(prev.n + 1) + ": minimizer did not converge (residual " +
                 std::to_string(res.fb_residual) + " after " +
                 std::to_string(res.outer_iterations) + " outer iterations)");

    FlowState next;
    next.n = prev.n + 1;
    next.time = next.n * h;
    next.omega = mask_union(res.positivity, erode(prev.omega, h));
    next.last_min = std::make_shared<MinimizerResult>(std::move(res));

    FlowStatus st = FlowStatus::Ok;
    if (touches_margin(next.omega, kDomainMarginCells))
        st = FlowStatus::MarginReached;
    else if (!strictly_contains(source_, next.omega))
        st = FlowStatus::ContainmentLost;

    const double vol = volume(next.omega);
    const double cap = next.last_min->sol.capacity;
    const double cert = certificate_value(prev.omega, next.last_min->positivity, h);
    next.row = LedgerRow{next.n,
                         next.time,
                         vol,
                         cap,
                         vol + cap,
                         cert,
                         next.last_min->fb_residual,
                         st};
    states_.push_back(std::move(next));
    if (st != FlowStatus::Ok) terminal_ = st;
}

double monotonicity_certificate(const FlowState& prev, const FlowState& next, double h) {
    require(next.last_min != nullptr, ErrorCode::InvalidArgument,
            "next state carries no minimizer result");
    require(next.n == prev.n + 1, ErrorCode::InvalidArgument, "states are not consecutive");
    return certificate_value(prev.omega, next.last_min->positivity, h);
}

double quadrature_allowance(const FlowState& prev, const FlowState& next) {
    const Grid& g = *prev.omega.grid;
    const std::size_t nfaces =
        boundary_faces(prev.omega).size() + boundary_faces(next.omega).size();
    return 4.0 * g.cell_measure() * static_cast<double>(nfaces);
}

FlowRunResult run_flow(const Mask& source, const Mask& omega0, const FlowConfig& cfg) {
    FlowRunResult out;
    Flow flow(source, omega0, cfg);
    try {
        while (!flow.terminated() && flow.current().n < cfg.steps) flow.step();
        out.final_status =
            flow.terminated() ? flow.terminal_status() : FlowStatus::CompletedSteps;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Solver) throw;
        out.final_status = FlowStatus::SolverFailed;
        out.error_message = e.what();
    }
    out.states = flow.states();

    const double allowance = kEnergyAllowanceFactor * out.states.front().row.energy;
    for (std::size_t i = 1; i < out.states.size(); ++i) {
        if (out.states[i].row.energy > out.states[i - 1].row.energy + allowance) {
            out.energy_monotone = false;
            out.first_violation = static_cast<int>(i);
            break;
        }
    }
    return out;
}

ComparisonReport comparison_experiment(const Mask& source_a, const Mask& omega_a,
                                       const Mask& source_b, const Mask& omega_b,
                                       const FlowConfig& cfg) {
    require(subset_of(source_a, source_b), ErrorCode::InvalidArgument,
            "source A must be contained in source B");
    require(subset_of(omega_a, omega_b), ErrorCode::InvalidArgument,
            "omega A must be contained in omega B");

    Flow a(source_a, omega_a, cfg);
    Flow b(source_b, omega_b, cfg);
    const double dx = omega_a.grid->dx;
    const double band = dx * (1.0 + 1e-9);

    ComparisonReport rep;
    auto record = [&](int step) {
        const Mask& ma = a.current().omega;
        const Mask& mb = b.current().omega;
        double worst = 0;
        if (!subset_of(ma, mb)) {
            const Field db = distance_to_cells(mb);
            for (std::int64_t c = 0; c < ma.grid->total; ++c)
                if (ma.at(c) && !mb.at(c)) worst = std::max(worst, db[c]);
        }
        rep.max_protrusion.push_back(worst);
        if (worst > band && rep.first_violation_step < 0) {
            rep.first_violation_step = step;
            rep.nested_throughout = false;
        }
    };

    record(0);
    for (int n = 0; n < cfg.steps && !a.terminated() && !b.terminated(); ++n) {
        a.step();
        b.step();
        record(n + 1);
        rep.steps_run = n + 1;
    }
    return rep;
}

double volume_equivalent_radius(const Mask& m) {
    const int N = m.grid->dim;
    return std::pow(volume(m) / radial::ball_volume(N), 1.0 / N);
}

RefinementReport refinement_study(const Mask& source, const Mask& omega0,
                                  const std::vector<double>& hs, double T, const FlowConfig& base,
                                  const std::optional<RadialOracle>& oracle) {
    require(!hs.empty(), ErrorCode::InvalidArgument, "refinement study needs at least one h");
    for (std::size_t i = 0; i + 1 < hs.size(); ++i)
        require(hs[i] > hs[i + 1], ErrorCode::InvalidArgument, "h list must be strictly decreasing");
    require(T > 0, ErrorCode::InvalidArgument, "horizon T must be positive");

    RefinementReport rep;
    rep.hs = hs;
    double e0 = 0;

    for (double h : hs) {
        FlowConfig cfg = base;
        cfg.h = h;
        cfg.steps = std::max(1, static_cast<int>(std::llround(T / h)));
        const FlowRunResult run = run_flow(source, omega0, cfg);
        require(run.final_status == FlowStatus::CompletedSteps, ErrorCode::Solver,
                "refinement flow at h=" + std::to_string(h) +
                    " ended early: " + to_string(run.final_status));
        e0 = run.states.front().row.energy;

        std::array<double, 3> times{}, energies{};
        std::array<Mask, 3> masks;
        const std::array<double, 3> targets{0.25 * T, 0.5 * T, T};
        for (int q = 0; q < 3; ++q) {
            int n = static_cast<int>(std::llround(targets[q] / h));
            n = std::clamp(n, 0, static_cast<int>(run.states.size()) - 1);
            times[q] = run.states[static_cast<std::size_t>(n)].time;
            energies[q] = run.states[static_cast<std::size_t>(n)].row.energy;
            masks[q] = run.states[static_cast<std::size_t>(n)].omega;
        }
        rep.sample_times.push_back(times);
        rep.sample_energy.push_back(energies);
        rep.sample_masks.push_back(masks);

        if (oracle) {
            const double dt = std::min(1e-3, h / 10.0);
            const auto ode = radial::flow_ode(oracle->a, oracle->b0, T, oracle->N, dt);
            rep.ode_deviation.push_back(
                std::abs(volume_equivalent_radius(masks[2]) - ode.points.back().b));
        }
    }

    const double allowance = kEnergyAllowanceFactor * e0;
    for (const auto& en : rep.sample_energy)
        if (en[1] > en[0] + allowance || en[2] > en[1] + allowance)
            rep.energy_time_monotone = false;

    for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
        std::array<double, 3> hd{};
        for (int q = 0; q < 3; ++q)
            hd[q] = hausdorff_distance(rep.sample_masks[i][q], rep.sample_masks[i + 1][q]);
        rep.pair_hausdorff.push_back(hd);
    }
    for (std::size_t i = 0; i + 1 < rep.pair_hausdorff.size(); ++i) {
        const double num = rep.pair_hausdorff[i][2];
        const double den = rep.pair_hausdorff[i + 1][2];
        rep.cauchy_ratio.push_back(den > 0 ? num / den : std::numeric_limits<double>::infinity());
    }
    return rep;
}

}  // namespace bflow
