#include "fragdiff/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fragdiff/errors.hpp"

namespace fragdiff {

Mesh Mesh::from_edges(std::vector<double> edges, GradingSpec grading) {
    if (edges.size() < 2) {
        throw ConfigError("mesh needs at least one cell");
    }
    if (edges.front() != 0.0) {
        throw ConfigError("mesh must start at x = 0");
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1]) || !std::isfinite(edges[i])) {
            throw ConfigError("mesh edges must be finite and strictly increasing (edge " +
                              std::to_string(i) + ")");
        }
    }
    Mesh mesh;
    const std::size_t n = edges.size() - 1;
    mesh.centers_.resize(n);
    mesh.widths_.resize(n);
    mesh.mass_weights_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        mesh.centers_[i] = 0.5 * (edges[i] + edges[i + 1]);
        mesh.widths_[i] = edges[i + 1] - edges[i];
        mesh.mass_weights_[i] = mesh.centers_[i] * mesh.widths_[i];
    }
    mesh.edges_ = std::move(edges);
    mesh.grading_ = grading;
    return mesh;
}

double Mesh::h_min() const noexcept {
    return *std::min_element(widths_.begin(), widths_.end());
}

double Mesh::h_max() const noexcept {
    return *std::max_element(widths_.begin(), widths_.end());
}

std::size_t Mesh::tail_begin() const noexcept {
    const std::size_t n = size();
    const std::size_t tail = std::max<std::size_t>(1, (n + 19) / 20);
    return n - std::min(n, tail);
}

MeshPtr build_mesh(double x_max, std::size_t n_cells, GradingSpec grading) {
    if (!(x_max > 0.0) || !std::isfinite(x_max)) {
        throw ConfigError("x_max must be positive and finite");
    }
    if (n_cells < Mesh::min_cells) {
        throw ConfigError("mesh needs at least " + std::to_string(Mesh::min_cells) +
                          " cells, got " + std::to_string(n_cells));
    }
    std::vector<double> edges(n_cells + 1);
    edges[0] = 0.0;
    if (grading.kind == Grading::uniform) {
        grading.ratio = 1.0;
        for (std::size_t i = 1; i <= n_cells; ++i) {
            edges[i] = x_max * static_cast<double>(i) / static_cast<double>(n_cells);
        }
    } else {
        const double r = grading.ratio;
        if (!(r > 1.0 && r <= 1.2)) {
            throw ConfigError("geometric grading ratio must lie in (1, 1.2]");
        }
        // Δ_1 = x_max (r - 1) / (r^N - 1); expm1/log1p keep it accurate for r near 1.
        const double growth = std::expm1(static_cast<double>(n_cells) * std::log1p(r - 1.0));
        const double first = x_max * (r - 1.0) / growth;
        double width = first;
        for (std::size_t i = 1; i < n_cells; ++i) {
            edges[i] = edges[i - 1] + width;
            width *= r;
        }
        edges[n_cells] = x_max;
    }
    return std::make_shared<const Mesh>(Mesh::from_edges(std::move(edges), grading));
}

State::State(MeshPtr mesh, std::vector<double> values, double time)
    : mesh_(std::move(mesh)), values_(std::move(values)), time_(time) {
    if (!mesh_) {
        throw ConfigError("state requires a mesh");
    }
    if (values_.size() != mesh_->size()) {
        throw ConfigError("state has " + std::to_string(values_.size()) +
                          " values for a mesh of " + std::to_string(mesh_->size()) + " cells");
    }
}

State State::zeros(MeshPtr mesh, double time) {
    const std::size_t n = mesh->size();
    return State(std::move(mesh), std::vector<double>(n, 0.0), time);
}

State State::sample(MeshPtr mesh, const std::function<double(double)>& f) {
    std::vector<double> values;
    values.reserve(mesh->size());
    for (double x : mesh->centers()) {
        values.push_back(f(x));
    }
    return State(std::move(mesh), std::move(values));
}

double State::min_value() const noexcept {
    return *std::min_element(values_.begin(), values_.end());
}

double State::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

bool State::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

State& State::operator*=(double c) noexcept {
    for (double& v : values_) {
        v *= c;
    }
    return *this;
}

double moment(const Mesh& mesh, std::span<const double> values, double m) {
    if (!(m > -1.0)) {
        throw DomainError("moment order must exceed -1");
    }
    const auto x = mesh.centers();
    const auto w = mesh.widths();
    double sum = 0.0;
    if (m == 1.0) {
        const auto mw = mesh.mass_weights();
        for (std::size_t i = 0; i < values.size(); ++i) {
            sum += mw[i] * values[i];
        }
        return sum;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += std::pow(x[i], m) * values[i] * w[i];
    }
    return sum;
}

double moment(const State& state, double m) {
    return moment(state.mesh(), state.values(), m);
}

MomentVector moments(const State& state, std::span<const double> orders) {
    MomentVector out;
    out.orders.assign(orders.begin(), orders.end());
    out.values.reserve(orders.size());
    for (double m : orders) {
        out.values.push_back(moment(state, m));
    }
    return out;
}

double x1_norm(const Mesh& mesh, std::span<const double> values) {
    const auto mw = mesh.mass_weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += mw[i] * std::abs(values[i]);
    }
    return sum;
}

double weighted_norm(const Mesh& mesh, std::span<const double> values, double m) {
    if (!(m >= 1.0)) {
        throw DomainError("weighted norm X_{1,m} requires m >= 1");
    }
    const auto x = mesh.centers();
    const auto w = mesh.widths();
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += (x[i] + std::pow(x[i], m)) * std::abs(values[i]) * w[i];
    }
    return sum;
}

double weighted_norm(const State& state, double m) {
    return weighted_norm(state.mesh(), state.values(), m);
}

void require_same_mesh(const State& a, const State& b, const char* where) {
    if (a.mesh_ptr() == b.mesh_ptr()) {
        return;
    }
    const auto ea = a.mesh().edges();
    const auto eb = b.mesh().edges();
    if (!std::equal(ea.begin(), ea.end(), eb.begin(), eb.end())) {
        throw DomainError(std::string(where) + ": states live on different meshes");
    }
}

double x1_distance(const State& a, const State& b) {
    require_same_mesh(a, b, "x1_distance");
    const auto mw = a.mesh().mass_weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += mw[i] * std::abs(a[i] - b[i]);
    }
    return sum;
}

double tail_mass_fraction(const State& state) {
    const auto mw = state.mesh().mass_weights();
    double total = 0.0;
    double tail = 0.0;
    const std::size_t begin = state.mesh().tail_begin();
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double m = mw[i] * std::abs(state[i]);
        total += m;
        if (i >= begin) {
            tail += m;
        }
    }
    return total > 0.0 ? tail / total : 0.0;
}

}  // namespace fragdiff
