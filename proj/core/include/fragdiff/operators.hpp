#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fragdiff/coefficients.hpp"
#include "fragdiff/mesh.hpp"

namespace fragdiff {

/// Boundary condition at the truncation point x_max. x = 0 is always Dirichlet.
///
/// `noflux` blocks the mass flux x φ' - φ rather than the particle flux φ',
/// so no mass crosses x_max. This mirrors the role of φ(0) = 0, which is the
/// zero-mass-flux condition at the origin.
enum class RightBoundary { noflux, dirichlet };

std::string to_string(RightBoundary bc);

/// Tridiagonal matrix stored by diagonals; lower[0] and upper[n-1] are unused.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    std::size_t size() const noexcept { return diag.size(); }
    void apply(std::span<const double> x, std::span<double> y) const;
};

/// Solves (lower, diag, upper) x = rhs by the Thomas algorithm; throws
/// NumericalError on a vanishing pivot.
void solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs, std::span<double> x);

/// Flux-form second difference D·φ'' on cell averages.
///
/// The face flux at x = 0 is D·φ_0 / x̄_0, i.e. the ghost value that makes the
/// linear interpolant vanish at the origin. With this choice the mass flux
/// through the origin cancels exactly, and Σ x̄_i Δ_i (Lφ)_i = 0 for `noflux`.
/// Under `dirichlet` the only mass exchange happens at x_max.
Tridiagonal assemble_diffusion(const Mesh& mesh, RightBoundary right_bc,
                               double diffusivity = 1.0);

/// Discrete birth term (Bφ)_i = Σ_{j >= i} w_ij φ_j Δ_j.
///
/// w_ij is the mass-weighted average of a(x̄_j) b(x, x̄_j) over the part of
/// receiver cell i below x̄_j, so the donor cell feeds itself through its
/// lower half. Each donor column is rescaled so that
///     Σ_i x̄_i w_ij Δ_i = x̄_j a(x̄_j),
/// which makes the birth and death contributions to M_1 cancel identically.
///
/// Power-law kernels yield separable columns w_ij = r_i c_j (i < j) and are
/// applied in O(N) through suffix sums; custom kernels are stored densely.
class BirthOperator {
public:
    BirthOperator() = default;

    static BirthOperator assemble(const Mesh& mesh, const RateModel& rate,
                                  const DaughterKernel& kernel);
    static BirthOperator zero(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    bool separable() const noexcept { return separable_; }
    bool is_zero() const noexcept { return zero_; }

    /// w_ij, the contribution of donor j to receiver i per unit donor density.
    double weight(std::size_t i, std::size_t j) const;

    /// Matrix entry (i, j) of the assembled birth operator, i.e. w_ij Δ_j.
    double entry(std::size_t i, std::size_t j) const;

    /// Diagonal entries w_jj Δ_j.
    std::span<const double> diagonal() const noexcept { return diag_; }

    /// Separable factors: entry(i, j) = receiver()[i] * donor()[j] for i < j.
    std::span<const double> receiver() const noexcept { return receiver_; }
    std::span<const double> donor() const noexcept { return donor_; }

    void apply(std::span<const double> phi, std::span<double> out) const;

    Eigen::MatrixXd to_dense() const;

private:
    std::size_t n_ = 0;
    bool separable_ = true;
    bool zero_ = true;
    std::vector<double> widths_;
    std::vector<double> diag_;
    std::vector<double> receiver_;
    std::vector<double> donor_;
    Eigen::MatrixXd dense_;  // custom kernels only: entry(i, j)
};

/// Assembled discrete generator 𝔸 = L - diag(a) + B on one mesh.
///
/// Keeps copies of the coefficient models so that variants (regularized
/// rate, absorption only) can be rebuilt on the same mesh.
class OperatorBundle {
public:
    OperatorBundle(MeshPtr mesh, RateModel rate, DaughterKernel kernel,
                   RightBoundary right_bc = RightBoundary::noflux, double diffusivity = 1.0);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    std::size_t size() const noexcept { return mesh_->size(); }

    const Tridiagonal& diffusion() const noexcept { return diffusion_; }
    std::span<const double> death() const noexcept { return death_; }
    const BirthOperator& birth() const noexcept { return birth_; }

    const RateModel& rate() const noexcept { return rate_; }
    const DaughterKernel& kernel() const noexcept { return kernel_; }
    RightBoundary right_bc() const noexcept { return right_bc_; }
    double diffusivity() const noexcept { return diffusivity_; }
    bool has_birth() const noexcept { return !birth_.is_zero(); }

    /// Same mesh and coefficients with a different rate.
    OperatorBundle with_rate(const RateModel& rate) const;

    /// Diffusion and death only (the absorption semigroup generator).
    OperatorBundle without_birth() const;

    /// Dense copy of 𝔸, for direct solves and test oracles.
    Eigen::MatrixXd dense() const;

    /// Crude scale of 𝔸: max_i (|L_ii| + a_i).
    double scale() const noexcept;

private:
    MeshPtr mesh_;
    RateModel rate_;
    DaughterKernel kernel_;
    RightBoundary right_bc_;
    double diffusivity_;
    Tridiagonal diffusion_;
    std::vector<double> death_;
    BirthOperator birth_;
};

/// 𝔸φ, returned at the time stamp of `state`. Throws DomainError on a mesh mismatch.
State apply_generator(const OperatorBundle& bundle, const State& state);
void apply_generator(const OperatorBundle& bundle, std::span<const double> phi,
                     std::span<double> out);

/// Discrete rate of change of M_1 caused by the boundaries: Σ x̄Δ (Lφ).
double boundary_mass_flux(const OperatorBundle& bundle, std::span<const double> phi);

/// Heat kernel e^{-z²/4t} / √(4πt). Throws DomainError for t <= 0.
double kernel_value(double t, double z);

/// Dirichlet heat semigroup on the half line by the method of images,
///     (e^{tΔ} f)(x) = ∫_0^∞ [k(t, x-y) - k(t, x+y)] f(y) dy,
/// evaluated by midpoint quadrature at the cell centres. O(N²); meant for
/// validation only. Output is clamped at zero when the input is nonnegative.
State heat_apply_exact(const State& f, double t);

/// Growth constant of the heat semigroup on X_{1,m}: ω_m = 4^{1/(m-1)} m (m-3)^{(m-3)/(m-1)} for
/// m >= 3 (ω_3 = 6), and ω_1 = 0.
double heat_growth_constant(double m);

}  // namespace fragdiff
