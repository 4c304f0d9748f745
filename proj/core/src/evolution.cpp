#include "fragdiff/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fragdiff/errors.hpp"

namespace fragdiff {

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::imex_euler:
            return "imex_euler";
        case Scheme::crank_nicolson_imex:
            return "crank_nicolson_imex";
        case Scheme::fully_implicit:
            return "fully_implicit";
    }
    return "unknown";
}

Scheme parse_scheme(const std::string& name) {
    if (name == "imex_euler") {
        return Scheme::imex_euler;
    }
    if (name == "crank_nicolson_imex") {
        return Scheme::crank_nicolson_imex;
    }
    if (name == "fully_implicit") {
        return Scheme::fully_implicit;
    }
    throw ConfigError("unknown scheme '" + name +
                      "' (expected imex_euler, crank_nicolson_imex or fully_implicit)");
}

double default_dt(const OperatorBundle& bundle) {
    const double h = bundle.mesh().h_min();
    double a_max = 0.0;
    for (double a : bundle.death()) {
        a_max = std::max(a_max, a);
    }
    double dt = 0.25 * h * h;
    if (a_max > 0.0) {
        dt = std::min(dt, 0.5 / a_max);
    }
    return dt;
}

double stability_budget(const OperatorBundle& bundle, double dt) {
    double a_max = 0.0;
    for (double a : bundle.death()) {
        a_max = std::max(a_max, a);
    }
    return dt * a_max;
}

namespace {

Tridiagonal shifted(const Tridiagonal& L, std::span<const double> a, double theta) {
    // I - theta (L - diag(a))
    Tridiagonal m;
    const std::size_t n = L.size();
    m.lower.resize(n);
    m.diag.resize(n);
    m.upper.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.lower[i] = -theta * L.lower[i];
        m.upper[i] = -theta * L.upper[i];
        m.diag[i] = 1.0 - theta * (L.diag[i] - a[i]);
    }
    return m;
}

void require_finite(std::span<const double> v, double t) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            std::ostringstream os;
            os << "time step produced a non-finite value at t = " << t;
            throw NumericalError(os.str());
        }
    }
}

}  // namespace

Stepper::Stepper(const OperatorBundle& bundle, double dt, Scheme scheme)
    : bundle_(&bundle), dt_(dt), scheme_(scheme) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("time step must be positive and finite");
    }
    switch (scheme) {
        case Scheme::imex_euler:
            lhs_ = shifted(bundle.diffusion(), bundle.death(), dt);
            break;
        case Scheme::crank_nicolson_imex:
            lhs_ = shifted(bundle.diffusion(), bundle.death(), dt);
            cn_lhs_ = shifted(bundle.diffusion(), bundle.death(), 0.5 * dt);
            break;
        case Scheme::fully_implicit:
            implicit_ = std::make_shared<GeneratorSystem>(
                bundle, GeneratorSystem::Options{1.0, -dt, std::nullopt, false});
            break;
    }
}

State Stepper::advance(const State& state) const {
    const OperatorBundle& b = *bundle_;
    if (state.size() != b.size()) {
        throw DomainError("state and operator live on different meshes");
    }
    const std::size_t n = b.size();
    const auto phi = state.values();
    std::vector<double> next(n);

    if (scheme_ == Scheme::fully_implicit) {
        next = implicit_->solve(phi);
    } else {
        std::vector<double> birth(n, 0.0);
        b.birth().apply(phi, birth);
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            rhs[i] = phi[i] + dt_ * birth[i];
        }
        solve_tridiagonal(lhs_, rhs, next);

        if (scheme_ == Scheme::crank_nicolson_imex) {
            std::vector<double> birth_pred(n, 0.0);
            b.birth().apply(next, birth_pred);
            std::vector<double> local(n);
            b.diffusion().apply(phi, local);
            const auto a = b.death();
            for (std::size_t i = 0; i < n; ++i) {
                rhs[i] = phi[i] + 0.5 * dt_ * (local[i] - a[i] * phi[i]) +
                         0.5 * dt_ * (birth[i] + birth_pred[i]);
            }
            solve_tridiagonal(cn_lhs_, rhs, next);
        }
    }
    const double t = state.time() + dt_;
    require_finite(next, t);
    return State(state.mesh_ptr(), std::move(next), t);
}

State step(const OperatorBundle& bundle, const State& state, double dt, Scheme scheme) {
    return Stepper(bundle, dt, scheme).advance(state);
}

Trajectory evolve(const OperatorBundle& bundle, const State& initial,
                  const IntegratorConfig& config, const std::optional<State>& reference) {
    if (initial.size() != bundle.size() ||
        (initial.mesh_ptr() != bundle.mesh_ptr() &&
         !std::equal(initial.mesh().edges().begin(), initial.mesh().edges().end(),
                     bundle.mesh().edges().begin(), bundle.mesh().edges().end()))) {
        throw DomainError("evolve: initial state and operator live on different meshes");
    }
    if (reference) {
        require_same_mesh(initial, *reference, "evolve reference");
    }
    if (!(config.t_end >= 0.0) || !std::isfinite(config.t_end)) {
        throw ConfigError("t_end must be finite and >= 0");
    }
    if (config.output_every == 0) {
        throw ConfigError("output_every must be >= 1");
    }
    if (!initial.all_finite()) {
        throw DomainError("initial state has non-finite entries");
    }
    const double dt_req = config.dt > 0.0 ? config.dt : default_dt(bundle);
    const auto steps = static_cast<std::size_t>(
        std::max(0.0, std::ceil(config.t_end / dt_req - 1e-9)));
    const double dt = steps > 0 ? config.t_end / static_cast<double>(steps) : dt_req;

    Trajectory traj;
    traj.dt = dt;
    traj.moment_order = config.moment_order;
    traj.records.reserve(steps + 1);

    const bool positive_mode = config.check_positivity && initial.min_value() >= 0.0;
    const double m1_0 = moment(initial, 1.0);
    const double mass_scale = m1_0 != 0.0 ? std::abs(m1_0) : 1.0;

    auto record = [&](const State& s) {
        StepRecord r;
        r.t = s.time();
        r.m0 = moment(s, 0.0);
        r.m1 = moment(s, 1.0);
        r.m2 = moment(s, 2.0);
        r.mm = moment(s, config.moment_order);
        r.dist_ref_x1 = reference ? x1_distance(s, *reference)
                                  : std::numeric_limits<double>::quiet_NaN();
        r.mass_drift_rel = std::abs(r.m1 - m1_0) / mass_scale;
        r.tail_mass_frac = tail_mass_fraction(s);
        traj.max_mass_drift_rel = std::max(traj.max_mass_drift_rel, r.mass_drift_rel);
        traj.records.push_back(r);
    };

    State current = initial;
    traj.min_value = current.min_value();
    record(current);
    traj.output_rows.push_back(0);
    traj.snapshots.push_back(current);
    if (steps == 0) {
        return traj;
    }

    const Stepper stepper(bundle, dt, config.scheme);
    double flux = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        current = stepper.advance(current);
        current.set_time(k == steps ? initial.time() + config.t_end
                                    : initial.time() + static_cast<double>(k) * dt);
        const double lo = current.min_value();
        traj.min_value = std::min(traj.min_value, lo);
        if (positive_mode) {
            const double floor = config.positivity_floor * std::max(1.0, current.max_abs());
            if (lo < floor) {
                std::ostringstream os;
                os << "positivity violated at t = " << current.time() << ": min value " << lo;
                throw PropertyViolation(os.str());
            }
        }
        flux += dt * std::abs(boundary_mass_flux(bundle, current.values()));
        record(current);
        if (k % config.output_every == 0 || k == steps) {
            traj.output_rows.push_back(k);
            traj.snapshots.push_back(current);
        }
    }
    traj.flux_budget_rel = flux / mass_scale;
    return traj;
}

}  // namespace fragdiff
