#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace fragdiff {

enum class Grading { uniform, geometric };

struct GradingSpec {
    Grading kind = Grading::uniform;
    double ratio = 1.0;  ///< width ratio between neighbouring cells, geometric only

    static GradingSpec uniform() { return {}; }
    static GradingSpec geometric(double r) { return {Grading::geometric, r}; }
};

/// Cell-centred grid on the truncated size domain [0, x_max].
///
/// Immutable after construction. Cells are numbered 0..N-1; cell i spans
/// [edges[i], edges[i+1]] and carries the midpoint centers[i].
class Mesh {
public:
    static constexpr std::size_t min_cells = 8;

    /// Builds from arbitrary edges (must start at 0 and increase strictly).
    /// Used directly by tests that need very small meshes.
    static Mesh from_edges(std::vector<double> edges, GradingSpec grading = {});

    std::size_t size() const noexcept { return centers_.size(); }
    double x_max() const noexcept { return edges_.back(); }
    const GradingSpec& grading() const noexcept { return grading_; }

    std::span<const double> edges() const noexcept { return edges_; }
    std::span<const double> centers() const noexcept { return centers_; }
    std::span<const double> widths() const noexcept { return widths_; }

    /// Mass weights x̄_i Δ_i; M_1(φ) is their dot product with φ.
    std::span<const double> mass_weights() const noexcept { return mass_weights_; }

    double h_min() const noexcept;
    double h_max() const noexcept;

    /// First cell index of the outer 5% of cells (mass-leak monitor window).
    std::size_t tail_begin() const noexcept;

private:
    Mesh() = default;

    std::vector<double> edges_;
    std::vector<double> centers_;
    std::vector<double> widths_;
    std::vector<double> mass_weights_;
    GradingSpec grading_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Throws ConfigError for x_max <= 0, n_cells < 8, or a geometric ratio
/// outside (1, 1.2].
MeshPtr build_mesh(double x_max, std::size_t n_cells, GradingSpec grading = {});

/// Size distribution sampled on a mesh: one value per cell plus a time stamp.
class State {
public:
    State(MeshPtr mesh, std::vector<double> values, double time = 0.0);

    static State zeros(MeshPtr mesh, double time = 0.0);

    /// Samples f at the cell centres.
    static State sample(MeshPtr mesh, const std::function<double(double)>& f);

    const Mesh& mesh() const noexcept { return *mesh_; }
    const MeshPtr& mesh_ptr() const noexcept { return mesh_; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::vector<double>& data() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }

    double time() const noexcept { return time_; }
    void set_time(double t) noexcept { time_ = t; }

    double min_value() const noexcept;
    double max_abs() const noexcept;
    bool all_finite() const noexcept;

    State& operator*=(double c) noexcept;

private:
    MeshPtr mesh_;
    std::vector<double> values_;
    double time_ = 0.0;
};

struct MomentVector {
    std::vector<double> orders;
    std::vector<double> values;
};

/// Midpoint-rule moment Σ x̄_i^m φ_i Δ_i. Orders m <= -1 are rejected with
/// DomainError since x^m f is not integrable at the origin there.
double moment(const State& state, double m);
double moment(const Mesh& mesh, std::span<const double> values, double m);

MomentVector moments(const State& state, std::span<const double> orders);

/// ‖φ‖_{X_1} + ‖φ‖_{X_m} = Σ (x̄ + x̄^m)|φ|Δ, for m >= 1.
double weighted_norm(const State& state, double m);
double weighted_norm(const Mesh& mesh, std::span<const double> values, double m);

/// ‖φ‖_{X_1} = Σ x̄ |φ| Δ.
double x1_norm(const Mesh& mesh, std::span<const double> values);
double x1_distance(const State& a, const State& b);

/// Mass held by the outer 5% of cells relative to the total mass.
double tail_mass_fraction(const State& state);

/// Throws DomainError when the states live on different meshes.
void require_same_mesh(const State& a, const State& b, const char* where);

}  // namespace fragdiff
