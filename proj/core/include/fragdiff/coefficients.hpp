#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fragdiff/mesh.hpp"

namespace fragdiff {

/// Overall fragmentation rate a(x).
///
/// Every model is nonnegative and locally bounded. `regularized(base, n)`
/// is the rate a(x) + x/n used to approximate steady states for rates that
/// stay bounded at infinity.
class RateModel {
public:
    enum class Kind { constant, power, shifted_power, table, regularized };

    static RateModel constant(double c);
    /// a(x) = x^gamma, gamma >= 0.
    static RateModel power(double gamma);
    /// a(x) = c + x^gamma.
    static RateModel shifted_power(double c, double gamma);
    /// Piecewise-linear through (x_k, a_k), constant beyond the end points.
    static RateModel table(std::vector<double> x, std::vector<double> a);
    static RateModel regularized(const RateModel& base, int n);

    Kind kind() const noexcept { return kind_; }
    double operator()(double x) const;

    /// a at the cell centres of `mesh`.
    std::vector<double> sample(const Mesh& mesh) const;

    /// True when a(x) -> infinity as x -> infinity (structural, from the kind).
    bool diverges() const noexcept;

    /// inf of a over the outer decade [x_max/10, x_max] of the mesh centres.
    double outer_liminf(const Mesh& mesh) const;

    /// Throws AdmissibilityError unless a is finite and >= 0 at every centre.
    void check_admissible(const Mesh& mesh) const;

    double c() const noexcept { return c_; }
    double gamma() const noexcept { return gamma_; }
    int regularization() const noexcept { return n_; }
    const RateModel* base() const noexcept { return base_.get(); }

    std::string describe() const;

private:
    RateModel() = default;

    Kind kind_ = Kind::constant;
    double c_ = 0.0;
    double gamma_ = 0.0;
    int n_ = 0;
    std::vector<double> table_x_;
    std::vector<double> table_a_;
    std::shared_ptr<const RateModel> base_;
};

/// Daughter distribution b(x, y) for fragments of size x < y.
///
/// Power-law kernels b = (ν+2) x^ν y^{-ν-1}, ν ∈ (-2, 0], carry closed-form
/// moments. Custom kernels are integrated numerically and must satisfy the
/// mass condition ∫_0^y x b(x,y) dx = y on construction.
class DaughterKernel {
public:
    using Density = std::function<double(double x, double y)>;

    static DaughterKernel power_law(double nu);
    /// Throws AdmissibilityError if the mass condition fails on the default
    /// y-samples by more than `tolerance` (relative).
    static DaughterKernel custom(Density b, std::string name, double tolerance = 1e-10);

    bool is_power_law() const noexcept { return !density_; }
    double nu() const noexcept { return nu_; }
    double tolerance() const noexcept { return tolerance_; }
    const std::string& name() const noexcept { return name_; }

    /// b(x, y); zero outside 0 < x < y.
    double operator()(double x, double y) const;

    /// ∫_0^y x^m b(x, y) dx.
    double partial_moment(double m, double y) const;

    /// ∫_lo^{min(hi, y)} x^m b(x, y) dx; zero when lo >= y. Infinite when the
    /// integral diverges at the origin.
    double partial_moment(double m, double lo, double hi, double y) const;

    std::string describe() const;

    /// Log-spaced donor sizes, 32 per decade on [1e-2, 1e2].
    static std::vector<double> default_y_samples();

private:
    DaughterKernel() = default;

    double nu_ = 0.0;
    Density density_;
    std::string name_;
    double tolerance_ = 1e-10;
};

struct MassConditionReport {
    double max_rel_defect = 0.0;
    double worst_y = 0.0;
    double tolerance = 0.0;
    bool passed = true;
};

/// Relative defect |∫_0^y x b dx - y| / y, maximised over `y_samples`.
MassConditionReport verify_mass_condition(const DaughterKernel& kernel,
                                          std::span<const double> y_samples);

/// Contraction constant δ_m, i.e. 1 - sup_y y^{-m} ∫_0^y x^m b(x,y) dx.
///
/// Closed form (m-1)/(ν+m+1) for power laws. For custom kernels the sup runs
/// over `DaughterKernel::default_y_samples()`, so the value is a sampled
/// estimate. Throws DomainError for m <= 1 and AdmissibilityError if δ_m <= 0.
double delta_m(const DaughterKernel& kernel, double m);

/// Smallest x such that a >= 1 on [x, x_max_probe], or nullopt when a < 1 at
/// the end of the probe range. Crossings are refined by bisection.
std::optional<double> find_x_star(const RateModel& rate, double x_max_probe);

struct CeilingEntry {
    double m = 0.0;
    double delta = 0.0;
    double mu = 0.0;
    double x_star = 0.0;
};

/// Invariant moment ceiling μ_m for m >= 3:
///   μ_m = (2/δ_m) [ 2m (2m(m-3)/δ_m)^{(m-3)/2} + δ_m x_*^{m-1} ].
/// Returns nullopt when no x_* exists on the probe range.
std::optional<CeilingEntry> moment_ceiling(const RateModel& rate, const DaughterKernel& kernel,
                                           double m, double x_max_probe);

struct ContractionConstants {
    std::map<double, double> delta;
    std::map<double, double> mu;
    std::optional<double> x_star;
};

/// δ_m for every order > 1 in `orders`, μ_m for every order >= 3 (when x_* exists).
ContractionConstants contraction_constants(const RateModel& rate, const DaughterKernel& kernel,
                                           std::span<const double> orders, double x_max_probe);

}  // namespace fragdiff
