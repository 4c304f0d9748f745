#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fragdiff/mesh.hpp"
#include "fragdiff/operators.hpp"

namespace fragdiff {

struct SteadyResult {
    State psi;
    double residual_x1 = 0.0;       ///< ‖𝔸ψ‖_{X_1}
    double min_value = 0.0;
    std::size_t constraint_row = 0; ///< row swapped for the mass constraint
};

/// Nonnegative steady state with M_1(ψ) = normalize_mass.
///
/// Solves 𝔸ψ = 0 with the middle row replaced by the mass constraint. No
/// clipping is applied: an entry below -1e-10 max ψ raises PropertyViolation.
/// Requires a > 0 at every cell centre (ConfigError otherwise) and
/// normalize_mass > 0. A singular bordered system or a residual that is not
/// small relative to the operator scale raises NumericalError (degenerate
/// kernel).
SteadyResult solve_steady(const OperatorBundle& bundle, double normalize_mass = 1.0);

struct RegularizedStep {
    int n = 0;
    State psi;
    double base_residual_x1 = 0.0;  ///< ‖𝔸_base ψ_n‖_{X_1}
};

struct RegularizedReport {
    double m = 3.0;
    std::vector<RegularizedStep> steps;
    std::vector<double> x1_distances;  ///< ‖ψ_{n_{k+1}} - ψ_{n_k}‖_{X_1}
    std::vector<double> xm_distances;  ///< same in X_m
    State limit;                       ///< polynomial extrapolation in 1/n to 1/n = 0
    double limit_residual_x1 = 0.0;
    bool cauchy = false;               ///< successive X_1 distances strictly decrease
    std::string diagnostic;
};

/// Steady states for a_n(x) = a(x) + x/n over `n_sequence` (increasing).
/// Requires the base rate to stay bounded below on the outer decade of the
/// mesh (ConfigError otherwise). A non-Cauchy sequence is reported through
/// `cauchy` and `diagnostic`, not thrown.
RegularizedReport solve_steady_regularized(const OperatorBundle& base,
                                           std::span<const int> n_sequence, double m = 3.0);

/// Evaluates at 0 the polynomial through (h_k, v_k), componentwise.
std::vector<double> extrapolate_to_zero(std::span<const double> h,
                                        std::span<const std::vector<double>> values);

}  // namespace fragdiff
