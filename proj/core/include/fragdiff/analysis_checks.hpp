#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fragdiff/mesh.hpp"
#include "fragdiff/operators.hpp"

namespace fragdiff {

/// A test function on (0, ∞) together with its first two derivatives.
struct SampledFunction {
    using Fn = std::function<double(double)>;
    std::string name;
    Fn f;
    Fn df;
    Fn d2f;

    /// x ↦ amplitude · f(dilation · x), derivatives by the chain rule.
    SampledFunction scaled(double amplitude, double dilation) const;
};

namespace samples {
SampledFunction x_exp();            ///< x e^{-x}
SampledFunction shifted_exp();      ///< (x - 1) e^{-x}
SampledFunction sin_exp();          ///< sin(x) e^{-x}
SampledFunction exp_decay();        ///< e^{-x}, nonzero at the origin
SampledFunction odd_gaussian(double s);  ///< x e^{-x²/4s}
}  // namespace samples

/// Nonnegative weight ℓ with derivative.
struct Weight {
    std::string name;
    SampledFunction::Fn ell;
    SampledFunction::Fn dell;

    static Weight linear();                 ///< ℓ = x
    static Weight power(double m);          ///< ℓ = x^m
    /// ℓ = x^m χ(x/R) with χ = 1 on [0,1], 0 beyond 2, C¹ cubic in between.
    static Weight power_cutoff(double m, double R);
};

enum class CheckStatus { pass, fail, inconclusive };

std::string to_string(CheckStatus status);

/// One inequality evaluation; `margin` > 0 means the inequality holds with room.
struct InequalityReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    CheckStatus status = CheckStatus::pass;
};

struct QuadratureOptions {
    double x_max = 60.0;        ///< integration range [0, x_max]
    double panel_width = 0.25;  ///< maximal Gauss panel width
    double scan_width = 0.05;   ///< sign-change scan resolution
};

/// Kato's inequality  -∫ ℓ sign(f) f'' ≥ ∫ ℓ' |f|'.
/// Passes iff LHS ≥ RHS - 1e-8 · scale, scale = ∫ ℓ|f''| + ∫ |ℓ'||f'|.
/// Inconclusive when a scan cell holds more than one sign change of f.
InequalityReport check_kato(const SampledFunction& f, const Weight& ell,
                            const QuadratureOptions& options = {});

/// 2 (1-m)^{(m-1)/2} / (m+1).
double interpolation_constant(double m);

struct InterpolationReport {
    double m = 0.0;
    InequalityReport product_form;               ///< ‖f‖_{X_m} ≤ C ‖f''‖^{(1-m)/2} ‖f‖^{(m+1)/2}
    std::vector<InequalityReport> epsilon_forms;  ///< ε ∈ {0.5, 1, 2}
    std::vector<InequalityReport> pointwise;      ///< sup|f|, sup x|f'|, ‖f'‖_{L1} vs ‖f''‖_{X_1}
    bool passed() const;
};

/// Interpolation bounds for m ∈ (-1, 1); throws DomainError otherwise.
InterpolationReport check_interpolation(const SampledFunction& f, double m,
                                        const QuadratureOptions& options = {});

/// Counts of a randomized pointwise check.
struct SampleCheckReport {
    std::string name;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;   ///< smallest (relative) margin seen
    bool passed() const noexcept { return violations == 0; }
};

/// k(t, x-y) - k(t, x+y) ≥ 0 on random (t, x, y) ∈ (0,10] × (0,40]².
SampleCheckReport check_kernel_positivity(std::size_t count, std::uint64_t seed);

/// (1 + |x-y|²/4t) k(t, x-y) ≥ (1 + |x+y|²/4t) k(t, x+y) on the same sample.
SampleCheckReport check_monotone_kernel(std::size_t count, std::uint64_t seed);

/// ‖Bf‖_{X_m} ≤ (1 - δ_m)(1 + tolerance) ‖af‖_{X_m} for each (nonnegative) state.
///
/// For power-law kernels the continuum bound is attained by every donor
/// size, so the discrete ratio sits at 1 - δ_m up to an O(h²) quadrature
/// excess; `tolerance` absorbs that excess.
SampleCheckReport check_strict_domination(const OperatorBundle& bundle, double m,
                                          std::span<const State> states,
                                          double tolerance = 1e-3);

/// ‖e^{tΔ} f‖_{X_{1,m}} ≤ e^{ω_m t} ‖f‖_{X_{1,m}} using heat_apply_exact.
SampleCheckReport check_growth_bound(std::span<const State> states, double m,
                                     std::span<const double> times);

struct MiyaderaOptions {
    std::vector<double> probe_times{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
    double dt = 1e-3;
};

struct MiyaderaCurve {
    std::vector<double> t;
    std::vector<double> ratio;         ///< ∫_0^t ‖B e^{sA} f‖_{X_{1,m}} ds / ‖f‖_{X_{1,m}}
    std::optional<double> t_m;         ///< largest probed t with ratio < 1
    double q_m = 0.0;                  ///< ratio at t_m
    double final_ratio = 0.0;          ///< ratio at the last probe
    bool weak = false;                 ///< final ratio within 5% of 1
};

struct MiyaderaReport {
    double m = 0.0;
    std::optional<double> delta_m;     ///< absent when the kernel has no contraction
    std::vector<MiyaderaCurve> curves;
    bool passed = false;               ///< every sample has some probed t with ratio < 1
    bool flagged = false;              ///< some curve is weak or δ_m is tiny
    std::string diagnostic;
};

/// Integrates the observer B along the absorption semigroup e^{sA}, A = L - diag(a),
/// with implicit Euler steps of size options.dt and the trapezoidal rule in s.
MiyaderaReport check_miyadera(const OperatorBundle& bundle, std::span<const State> samples,
                              double m, const MiyaderaOptions& options = {});

}  // namespace fragdiff
