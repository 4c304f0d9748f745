#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fragdiff/evolution.hpp"
#include "fragdiff/mesh.hpp"
#include "fragdiff/operators.hpp"

namespace fragdiff {

/// Which of the structural assumptions behind a simple dominant eigenvalue
/// hold for a bundle. These are proxies checked on the grid, not proofs.
struct HypothesisCheck {
    bool rate_positive = false;   ///< a > 0 at every centre
    bool contraction = false;     ///< δ_2 > 0
    bool rate_diverges = false;   ///< structural a(x) -> ∞
    bool all() const noexcept { return rate_positive && contraction && rate_diverges; }
    std::string describe() const;
};

HypothesisCheck check_hypotheses(const OperatorBundle& bundle);

struct DominantOptions {
    double shift = 1e-3;
    double tolerance = 1e-12;
    int max_iterations = 200;
};

struct EigenPair {
    double lambda0 = 0.0;
    State psi;              ///< normalised to M_1 = 1 (max |ψ| = 1 if M_1 vanishes)
    int iterations = 0;
    HypothesisCheck hypotheses;
};

/// Shifted inverse power iteration on 𝔸 - σI from a positive start vector;
/// λ₀ is the Rayleigh quotient of the converged vector. Throws NumericalError
/// when the iteration does not settle within max_iterations.
EigenPair dominant_eigenpair(const OperatorBundle& bundle, const DominantOptions& options = {});

struct GapOptions {
    double shift = 0.25;       ///< σ > 0 of the shift-invert map
    int krylov_dim = 100;
    int max_restarts = 40;
    double tolerance = 1e-9;   ///< relative Ritz residual
    std::uint64_t seed = 7;
};

struct GapReport {
    double epsilon_hat = 0.0;                    ///< -max Re λ over the reported eigenvalues
    std::vector<std::complex<double>> eigenvalues;  ///< nearest to σ first
    std::vector<double> residuals;
    double shift = 0.0;
    int restarts = 0;
    bool converged = false;
    bool violation = false;                      ///< epsilon_hat <= 0
    HypothesisCheck hypotheses;
};

/// The k eigenvalues of 𝔸 nearest the positive shift σ after deflating the
/// dominant mode: Arnoldi with full reorthogonalisation on
///     P (𝔸 - σI)^{-1} P,  P = I - ψ vᵀ / (vᵀψ),  v = (x̄_i Δ_i),
/// where ψ is `dominant` or, if absent, the result of dominant_eigenpair.
GapReport spectral_gap(const OperatorBundle& bundle, int k, const GapOptions& options = {},
                       const std::optional<State>& dominant = std::nullopt);

enum class FitStatus { ok, not_applicable, no_decay };

std::string to_string(FitStatus status);

struct DecayFit {
    FitStatus status = FitStatus::no_decay;
    double nu_hat = 0.0;
    double r_squared = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::size_t points = 0;
    std::string diagnostic;
};

/// Least-squares slope of log d(t) over the window d ∈ [1e-10, 1e-2]·d(0).
/// `not_applicable` when d(0) <= floor (already at equilibrium); `no_decay`
/// when fewer than three samples enter the window or the slope is not negative.
DecayFit decay_rate(std::span<const double> t, std::span<const double> distance,
                    double floor = 0.0);

/// Fits the dist_ref_x1 column. The equilibrium floor is 1e-6·M_1(0).
DecayFit decay_rate(const Trajectory& trajectory);

/// Smallest `count` singular values of the dense 𝔸, ascending. O(N³).
std::vector<double> smallest_singular_values(const OperatorBundle& bundle, std::size_t count);

}  // namespace fragdiff
