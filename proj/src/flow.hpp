#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "radial.hpp"
#include "step_functional.hpp"

namespace bflow {

enum class FlowStatus { Ok, CompletedSteps, ContainmentLost, MarginReached, SolverFailed };
std::string to_string(FlowStatus s);

struct LedgerRow {
    long n = 0;
    double t = 0, volume = 0, capacity = 0, energy = 0, certificate = 0, fb_residual = 0;
    FlowStatus status = FlowStatus::Ok;
};

struct FlowConfig {
    double h = 0;
    int steps = 0;
    int snapshot_cadence = 0;  // runner-side: write a snapshot every k steps (0: final only)
    MinimizerParams minimizer;
};

struct FlowState {
    int n = 0;
    double time = 0;
    Mask omega;
    std::shared_ptr<const MinimizerResult> last_min;  // minimizer producing this state (null at n=0)
    LedgerRow row;
};

// Drives the discrete motion: each step replaces omega by the minimizer's
// positivity set united with the h-erosion of the previous set, and appends a
// ledger row with volume, capacity, energy and the monotonicity certificate.
class Flow {
  public:
    Flow(Mask source, Mask omega0, FlowConfig cfg);

    const FlowState& current() const { return states_.back(); }
    const std::vector<FlowState>& states() const { return states_; }
    const Mask& source() const { return source_; }
    const FlowConfig& config() const { return cfg_; }
    bool terminated() const { return terminal_ != FlowStatus::Ok; }
    FlowStatus terminal_status() const { return terminal_; }

    // One evolution step; throws Error(Solver) when the minimizer fails.
    void step();

  private:
    Mask source_;
    FlowConfig cfg_;
    std::vector<FlowState> states_;
    FlowStatus terminal_ = FlowStatus::Ok;
};

// Middle term of the per-step energy inequality: the signed-distance integral
// over the symmetric difference of (old set, new positivity) outside the
// eroded core. Nonpositive cell by cell.
double monotonicity_certificate(const FlowState& prev, const FlowState& next, double h);

// Perimeter-scaled quadrature allowance for ledger comparisons.
double quadrature_allowance(const FlowState& prev, const FlowState& next);

struct FlowRunResult {
    std::vector<FlowState> states;
    FlowStatus final_status = FlowStatus::CompletedSteps;
    bool energy_monotone = true;  // E_{n+1} <= E_n + 1e-3 * E_0 throughout
    int first_violation = -1;
    std::string error_message;
};

FlowRunResult run_flow(const Mask& source, const Mask& omega0, const FlowConfig& cfg);

inline constexpr double kEnergyAllowanceFactor = 1e-3;  // per-step allowance, relative to E_0

struct ComparisonReport {
    int steps_run = 0;
    bool nested_throughout = true;
    int first_violation_step = -1;
    std::vector<double> max_protrusion;  // per recorded step, length units
};

// Runs the two flows in lockstep and checks that the smaller configuration
// stays inside the larger one, within a one-cell tolerance band.
ComparisonReport comparison_experiment(const Mask& source_a, const Mask& omega_a,
                                       const Mask& source_b, const Mask& omega_b,
                                       const FlowConfig& cfg);

struct RadialOracle {
    int N = 2;
    double a = 0, b0 = 0;
};

struct RefinementReport {
    std::vector<double> hs;
    std::vector<std::array<double, 3>> sample_times;    // per h: times near T/4, T/2, T
    std::vector<std::array<double, 3>> sample_energy;   // per h
    std::vector<std::array<Mask, 3>> sample_masks;      // per h
    std::vector<std::array<double, 3>> pair_hausdorff;  // per consecutive h pair
    std::vector<double> cauchy_ratio;                   // H(pair i)/H(pair i+1) at t = T
    bool energy_time_monotone = true;
    std::vector<double> ode_deviation;  // per h: |vol-radius(T) - b_ode(T)|, with oracle only
};

RefinementReport refinement_study(const Mask& source, const Mask& omega0,
                                  const std::vector<double>& hs, double T, const FlowConfig& base,
                                  const std::optional<RadialOracle>& oracle = std::nullopt);

double volume_equivalent_radius(const Mask& m);

}  // namespace bflow
