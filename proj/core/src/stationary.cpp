#include "fragdiff/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fragdiff/errors.hpp"
#include "fragdiff/linear_system.hpp"

namespace fragdiff {

namespace {

double xm_distance(const Mesh& mesh, std::span<const double> a, std::span<const double> b,
                   double m) {
    const auto x = mesh.centers();
    const auto w = mesh.widths();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::pow(x[i], m) * std::abs(a[i] - b[i]) * w[i];
    }
    return s;
}

double residual_x1(const OperatorBundle& bundle, std::span<const double> psi) {
    std::vector<double> r(psi.size());
    apply_generator(bundle, psi, r);
    return x1_norm(bundle.mesh(), r);
}

}  // namespace

SteadyResult solve_steady(const OperatorBundle& bundle, double normalize_mass) {
    if (!(normalize_mass > 0.0) || !std::isfinite(normalize_mass)) {
        throw DomainError("steady-state mass must be positive and finite");
    }
    const auto a = bundle.death();
    const auto x = bundle.mesh().centers();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] > 0.0)) {
            std::ostringstream os;
            os << "steady state needs a strictly positive rate; a(" << x[i] << ") = " << a[i];
            throw ConfigError(os.str());
        }
    }
    const std::size_t n = bundle.size();
    const std::size_t row = n / 2;

    std::vector<double> rhs(n, 0.0);
    rhs[row] = normalize_mass;
    std::vector<double> psi;
    try {
        const GeneratorSystem system(bundle, {0.0, 1.0, row, false});
        psi = system.solve(rhs);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("degenerate steady-state kernel: ") + e.what());
    }

    const double m1 = moment(bundle.mesh(), psi, 1.0);
    if (!(m1 > 0.0)) {
        throw NumericalError("degenerate steady-state kernel: bordered solve lost the mass row");
    }
    const double fix = normalize_mass / m1;
    for (double& v : psi) {
        v *= fix;
    }

    SteadyResult out{State(bundle.mesh_ptr(), std::move(psi)), 0.0, 0.0, row};
    out.min_value = out.psi.min_value();
    out.residual_x1 = residual_x1(bundle, out.psi.values());

    const double scale = bundle.scale() * normalize_mass;
    if (!(out.residual_x1 <= 1e-6 * std::max(scale, 1.0))) {
        std::ostringstream os;
        os << "degenerate steady-state kernel: residual " << out.residual_x1
           << " is not small against operator scale " << scale;
        throw NumericalError(os.str());
    }
    const double peak = out.psi.max_abs();
    if (out.min_value < -1e-10 * peak) {
        std::ostringstream os;
        os << "steady state has a negative entry " << out.min_value << " (max " << peak << ")";
        throw PropertyViolation(os.str());
    }
    return out;
}

std::vector<double> extrapolate_to_zero(std::span<const double> h,
                                        std::span<const std::vector<double>> values) {
    if (h.empty() || h.size() != values.size()) {
        throw DomainError("extrapolation needs matching, non-empty abscissae and values");
    }
    const std::size_t k = h.size();
    std::vector<double> weights(k, 1.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (j != i) {
                if (h[i] == h[j]) {
                    throw DomainError("extrapolation abscissae must be distinct");
                }
                weights[i] *= (0.0 - h[j]) / (h[i] - h[j]);
            }
        }
    }
    std::vector<double> out(values.front().size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] += weights[i] * values[i][c];
        }
    }
    return out;
}

RegularizedReport solve_steady_regularized(const OperatorBundle& base,
                                           std::span<const int> n_sequence, double m) {
    if (n_sequence.empty()) {
        throw ConfigError("regularization schedule is empty");
    }
    for (std::size_t k = 1; k < n_sequence.size(); ++k) {
        if (n_sequence[k] <= n_sequence[k - 1]) {
            throw ConfigError("regularization schedule must increase strictly");
        }
    }
    if (!(m >= 1.0)) {
        throw DomainError("regularized report order m must be >= 1");
    }
    const double floor = base.rate().outer_liminf(base.mesh());
    if (!(floor > 0.0)) {
        throw ConfigError("base rate " + base.rate().describe() +
                          " vanishes on the outer decade of the mesh");
    }

    std::vector<RegularizedStep> steps;
    std::vector<double> h;
    std::vector<std::vector<double>> profiles;
    for (int n : n_sequence) {
        const OperatorBundle reg = base.with_rate(RateModel::regularized(base.rate(), n));
        SteadyResult s = solve_steady(reg);
        RegularizedStep step{n, s.psi, residual_x1(base, s.psi.values())};
        h.push_back(1.0 / n);
        profiles.emplace_back(s.psi.values().begin(), s.psi.values().end());
        steps.push_back(std::move(step));
    }
    RegularizedReport report{m,     std::move(steps),
                             {},    {},
                             State(base.mesh_ptr(), extrapolate_to_zero(h, profiles)),
                             0.0,   false,
                             {}};
    const Mesh& mesh = base.mesh();
    for (std::size_t k = 1; k < profiles.size(); ++k) {
        std::vector<double> diff(profiles[k].size());
        for (std::size_t i = 0; i < diff.size(); ++i) {
            diff[i] = profiles[k][i] - profiles[k - 1][i];
        }
        report.x1_distances.push_back(x1_norm(mesh, diff));
        report.xm_distances.push_back(xm_distance(mesh, profiles[k], profiles[k - 1], m));
    }

    report.limit_residual_x1 = residual_x1(base, report.limit.values());

    report.cauchy = true;
    for (std::size_t k = 1; k < report.x1_distances.size(); ++k) {
        if (!(report.x1_distances[k] < report.x1_distances[k - 1])) {
            report.cauchy = false;
        }
    }
    if (!report.cauchy) {
        report.diagnostic = "no-convergence: successive X1 distances do not decrease";
    }
    return report;
}

}  // namespace fragdiff
