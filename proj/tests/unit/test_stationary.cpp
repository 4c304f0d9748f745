#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "fragdiff/errors.hpp"
#include "fragdiff/evolution.hpp"
#include "fragdiff/stationary.hpp"

using namespace fragdiff;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

OperatorBundle mitosis(std::size_t n) {
    return OperatorBundle(build_mesh(40.0, n), RateModel::constant(1.0),
                          DaughterKernel::power_law(0.0));
}

double distance_to_closed_form(const State& psi) {
    const State exact =
        State::sample(psi.mesh_ptr(), [](double x) { return 0.5 * x * std::exp(-x); });
    return x1_distance(psi, exact);
}

}  // namespace

TEST_CASE("mitosis steady state matches x e^{-x}/2", "[stationary]") {
    const auto r = solve_steady(mitosis(1024));
    const double e1024 = distance_to_closed_form(r.psi);
    CHECK(e1024 < 1e-4);
    CHECK_THAT(moment(r.psi, 1.0), WithinRel(1.0, 1e-13));
    CHECK(r.min_value >= 0.0);
    CHECK(r.residual_x1 < 1e-10);
    CHECK(r.constraint_row == 512);

    const double e512 = distance_to_closed_form(solve_steady(mitosis(512)).psi);
    CHECK(e512 / e1024 > 3.5);
}

TEST_CASE("steady state scales with the requested mass", "[stationary]") {
    const auto bundle = mitosis(256);
    const State one = solve_steady(bundle, 1.0).psi;
    const State three = solve_steady(bundle, 3.0).psi;
    for (std::size_t i = 0; i < 256; ++i) {
        REQUIRE_THAT(three[i], WithinAbs(3.0 * one[i], 1e-12));
    }
}

TEST_CASE("linear-rate steady state is positive and unimodal", "[stationary]") {
    const OperatorBundle bundle(build_mesh(20.0, 1024), RateModel::power(1.0),
                                DaughterKernel::power_law(0.0));
    const auto r = solve_steady(bundle);
    CHECK(r.residual_x1 <= 1e-8);
    CHECK(r.min_value >= -1e-10 * r.psi.max_abs());
    const auto v = r.psi.values();
    const auto peak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    CHECK(peak > 0);
    for (std::size_t i = 1; i <= peak; ++i) {
        REQUIRE(v[i] >= v[i - 1]);
    }
    for (std::size_t i = peak + 1; i < v.size(); ++i) {
        REQUIRE(v[i] <= v[i - 1] + 1e-300);
    }
    // The invariant moment ceiling μ_3 = 26 bounds the steady state.
    CHECK(moment(r.psi, 3.0) <= 26.0);
}

TEST_CASE("steady state agrees with long-time evolution", "[stationary]") {
    const OperatorBundle bundle(build_mesh(20.0, 512), RateModel::power(1.0),
                                DaughterKernel::power_law(0.0));
    const State f = State::sample(bundle.mesh_ptr(), [](double x) { return std::exp(-x); });
    IntegratorConfig c;
    c.scheme = Scheme::fully_implicit;
    c.dt = 0.01;
    c.t_end = 40.0;
    c.output_every = 4000;
    const auto traj = evolve(bundle, f, c);
    const State psi = solve_steady(bundle, moment(f, 1.0)).psi;
    CHECK(x1_distance(traj.final_state(), psi) < 1e-8);
}

TEST_CASE("dense path for custom kernels", "[stationary]") {
    const auto mesh = build_mesh(40.0, 256);
    const OperatorBundle custom(
        mesh, RateModel::constant(1.0),
        DaughterKernel::custom([](double, double y) { return 2.0 / y; }, "binary"));
    const State a = solve_steady(custom).psi;
    const State b = solve_steady(mitosis(256)).psi;
    CHECK(x1_distance(a, b) < 1e-8);
}

TEST_CASE("steady-state errors", "[stationary][errors]") {
    CHECK_THROWS_AS(solve_steady(mitosis(64), 0.0), DomainError);
    CHECK_THROWS_AS(solve_steady(mitosis(64), -1.0), DomainError);
    const OperatorBundle none(build_mesh(10.0, 64), RateModel::constant(0.0),
                              DaughterKernel::power_law(0.0));
    CHECK_THROWS_AS(solve_steady(none), ConfigError);
    // a vanishes on the right half of the mesh.
    const OperatorBundle partial(build_mesh(10.0, 64), RateModel::table({4.0, 5.0}, {1.0, 0.0}),
                                 DaughterKernel::power_law(0.0));
    CHECK_THROWS_AS(solve_steady(partial), ConfigError);
}

TEST_CASE("extrapolation is exact for polynomials in h", "[stationary][extrapolation]") {
    const std::vector<double> h{0.25, 0.0625, 0.015625};
    std::vector<std::vector<double>> v;
    for (double x : h) {
        v.push_back({1.0 + 2.0 * x - 3.0 * x * x, -4.0 + x});
    }
    const auto out = extrapolate_to_zero(h, v);
    CHECK_THAT(out[0], WithinAbs(1.0, 1e-13));
    CHECK_THAT(out[1], WithinAbs(-4.0, 1e-13));

    CHECK_THROWS_AS(extrapolate_to_zero(std::vector<double>{}, std::vector<std::vector<double>>{}),
                    DomainError);
    const std::vector<double> dup{0.1, 0.1};
    CHECK_THROWS_AS(extrapolate_to_zero(dup, std::vector<std::vector<double>>{{1.0}, {2.0}}),
                    DomainError);
}

TEST_CASE("regularized family for a bounded rate", "[stationary][regularized]") {
    const auto base = mitosis(512);
    const std::vector<int> ns{4, 16, 64};
    const auto r = solve_steady_regularized(base, ns);
    REQUIRE(r.steps.size() == 3);
    REQUIRE(r.x1_distances.size() == 2);
    REQUIRE(r.xm_distances.size() == 2);
    CHECK(r.cauchy);
    CHECK(r.diagnostic.empty());
    CHECK(r.x1_distances[1] < r.x1_distances[0]);
    for (const auto& s : r.steps) {
        CHECK_THAT(moment(s.psi, 1.0), WithinRel(1.0, 1e-12));
    }
    // The base residual carries the x/n perturbation and drops with n.
    for (std::size_t k = 1; k < 3; ++k) {
        const double ratio = r.steps[k - 1].base_residual_x1 / r.steps[k].base_residual_x1;
        CHECK(ratio > 2.0);
        CHECK(ratio < 8.0);
    }
    CHECK(r.limit_residual_x1 < r.steps.back().base_residual_x1);
}

TEST_CASE("regularization barely moves a diverging rate", "[stationary][regularized]") {
    const OperatorBundle base(build_mesh(20.0, 512), RateModel::power(1.0),
                              DaughterKernel::power_law(0.0));
    const std::vector<int> ns{100, 1000, 10000};
    const auto r = solve_steady_regularized(base, ns);
    const State psi = solve_steady(base).psi;
    CHECK(x1_distance(r.steps.back().psi, psi) < 1e-3);
    CHECK(r.cauchy);
}

TEST_CASE("regularized schedule validation", "[stationary][regularized][errors]") {
    const auto base = mitosis(64);
    CHECK_THROWS_AS(solve_steady_regularized(base, std::vector<int>{}), ConfigError);
    CHECK_THROWS_AS(solve_steady_regularized(base, std::vector<int>{4, 4}), ConfigError);
    CHECK_THROWS_AS(solve_steady_regularized(base, std::vector<int>{16, 4}), ConfigError);
    CHECK_THROWS_AS(solve_steady_regularized(base, std::vector<int>{4, 16}, 0.5), DomainError);
    const OperatorBundle fading(build_mesh(40.0, 64), RateModel::table({0.0, 2.0}, {1.0, 0.0}),
                                DaughterKernel::power_law(0.0));
    CHECK_THROWS_AS(solve_steady_regularized(fading, std::vector<int>{4, 16}), ConfigError);
}
