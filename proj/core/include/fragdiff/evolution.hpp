#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fragdiff/linear_system.hpp"
#include "fragdiff/mesh.hpp"
#include "fragdiff/operators.hpp"

namespace fragdiff {

/// Time discretisations of dφ/dt = 𝔸φ.
///
///  - imex_euler: (I - dt L + dt diag(a)) φ⁺ = φ + dt Bφ. Tridiagonal solve,
///    positive, conservative up to the boundary flux when a is constant.
///  - crank_nicolson_imex: trapezoidal in L - diag(a), trapezoidal birth with
///    an imex_euler predictor. Second order in time, not positivity-preserving.
///  - fully_implicit: (I - dt 𝔸) φ⁺ = φ. The matrix is an M-matrix whose
///    columns conserve M_1, so the step is positive and conserves mass for
///    every rate.
enum class Scheme { imex_euler, crank_nicolson_imex, fully_implicit };

std::string to_string(Scheme scheme);
/// Throws ConfigError for unknown names.
Scheme parse_scheme(const std::string& name);

struct IntegratorConfig {
    Scheme scheme = Scheme::imex_euler;
    double dt = 0.0;             ///< 0 selects default_dt()
    double t_end = 1.0;
    std::size_t output_every = 1;
    double moment_order = 3.0;   ///< order m reported in the Mm column
    bool check_positivity = true;
    double positivity_floor = -1e-13;
};

/// min(0.25 h_min², 0.5 / max a).
double default_dt(const OperatorBundle& bundle);

/// dt · max a; the explicit birth path is monitored against a budget of 2.
double stability_budget(const OperatorBundle& bundle, double dt);

/// One-step map with the left-hand factorisation cached.
class Stepper {
public:
    Stepper(const OperatorBundle& bundle, double dt, Scheme scheme);

    /// Advances by dt. Throws NumericalError if the result is not finite.
    State advance(const State& state) const;

    double dt() const noexcept { return dt_; }
    Scheme scheme() const noexcept { return scheme_; }

private:
    const OperatorBundle* bundle_;
    double dt_;
    Scheme scheme_;
    Tridiagonal lhs_;       // imex_euler: I - dt L + dt D
    Tridiagonal cn_lhs_;    // crank_nicolson_imex: I - dt/2 (L - D)
    std::shared_ptr<GeneratorSystem> implicit_;
};

/// Single step; builds a throwaway Stepper.
State step(const OperatorBundle& bundle, const State& state, double dt, Scheme scheme);

struct StepRecord {
    double t = 0.0;
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double mm = 0.0;
    double dist_ref_x1 = 0.0;   ///< NaN when no reference was given
    double mass_drift_rel = 0.0;
    double tail_mass_frac = 0.0;
};

struct Trajectory {
    double dt = 0.0;
    double moment_order = 3.0;
    std::vector<StepRecord> records;        ///< index 0 is the initial state
    std::vector<std::size_t> output_rows;   ///< records emitted every output_every steps
    std::vector<State> snapshots;           ///< states at output_rows
    double flux_budget_rel = 0.0;           ///< ∫ |boundary mass flux| dt / M_1(0)
    double max_mass_drift_rel = 0.0;
    double min_value = 0.0;                 ///< smallest entry over all steps

    const State& final_state() const { return snapshots.back(); }
};

/// Integrates from `initial` to config.t_end. dt is adjusted downwards so
/// that an integer number of steps lands exactly on t_end.
///
/// With check_positivity set and nonnegative initial data, any entry below
/// positivity_floor · max(1, max|φ|) raises PropertyViolation.
Trajectory evolve(const OperatorBundle& bundle, const State& initial,
                  const IntegratorConfig& config,
                  const std::optional<State>& reference = std::nullopt);

}  // namespace fragdiff
