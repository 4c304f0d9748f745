#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fragdiff/analysis_checks.hpp"
#include "fragdiff/errors.hpp"

using namespace fragdiff;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<State> random_states(const MeshPtr& mesh, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<State> out;
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> v(mesh->size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = u(rng) * std::exp(-mesh->centers()[i] / 4.0);
        }
        out.emplace_back(mesh, std::move(v));
    }
    return out;
}

}  // namespace

TEST_CASE("sample functions carry consistent derivatives", "[analysis][samples]") {
    const double h = 1e-5;
    for (const auto& f : {samples::x_exp(), samples::shifted_exp(), samples::sin_exp(),
                          samples::exp_decay(), samples::odd_gaussian(0.7),
                          samples::sin_exp().scaled(1.7, 0.6)}) {
        for (double x : {0.3, 1.1, 2.9}) {
            const double d1 = (f.f(x + h) - f.f(x - h)) / (2 * h);
            const double d2 = (f.df(x + h) - f.df(x - h)) / (2 * h);
            CHECK_THAT(f.df(x), WithinAbs(d1, 1e-8));
            CHECK_THAT(f.d2f(x), WithinAbs(d2, 1e-8));
        }
    }
    CHECK_THROWS_AS(samples::odd_gaussian(0.0), DomainError);
    const auto g = samples::x_exp().scaled(2.0, 3.0);
    CHECK_THAT(g.f(1.0), WithinRel(2.0 * 3.0 * std::exp(-3.0), 1e-15));
}

TEST_CASE("weights", "[analysis][weights]") {
    const auto c = Weight::power_cutoff(2.0, 3.0);
    CHECK_THAT(c.ell(2.0), WithinRel(4.0, 1e-15));
    CHECK(c.ell(6.5) == 0.0);
    CHECK(c.ell(4.5) > 0.0);
    CHECK(c.ell(4.5) < 4.5 * 4.5);
    // C¹ at both joins.
    const double e = 1e-7;
    CHECK_THAT(c.dell(3.0 - e), WithinAbs(c.dell(3.0 + e), 1e-5));
    CHECK_THAT(c.dell(6.0 - e), WithinAbs(0.0, 1e-5));
    CHECK_THAT(Weight::power(3.0).dell(2.0), WithinRel(12.0, 1e-15));
    CHECK(Weight::linear().dell(5.0) == 1.0);
    CHECK_THROWS_AS(Weight::power(0.5), DomainError);
}

TEST_CASE("Kato inequality: equality case", "[analysis][kato]") {
    // f = x e^{-x} > 0 and ℓ = x give -∫ x f'' = ∫ f' = 0 on both sides.
    const auto r = check_kato(samples::x_exp(), Weight::linear());
    CHECK(r.status == CheckStatus::pass);
    CHECK_THAT(r.lhs, WithinAbs(0.0, 1e-10));
    CHECK_THAT(r.rhs, WithinAbs(0.0, 1e-10));
}

TEST_CASE("Kato inequality: sign change gives a strict margin", "[analysis][kato]") {
    const auto r = check_kato(samples::shifted_exp(), Weight::power(2.0));
    CHECK(r.status == CheckStatus::pass);
    CHECK(r.margin > 0.5);
}

TEST_CASE("Kato inequality on random scalings", "[analysis][kato]") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int k = 0; k < 20; ++k) {
        const auto f = samples::sin_exp().scaled(u(rng), u(rng));
        const auto r = check_kato(f, k % 2 ? Weight::linear() : Weight::power_cutoff(2.0, 5.0));
        REQUIRE(r.status == CheckStatus::pass);
    }
}

TEST_CASE("Kato check detects a boundary defect", "[analysis][kato]") {
    // ℓ ≡ 1 keeps the boundary term f'(0) = -1 alive: LHS = -1 < RHS = 0.
    const Weight one{"1", [](double) { return 1.0; }, [](double) { return 0.0; }};
    const auto r = check_kato(samples::exp_decay(), one);
    CHECK(r.status == CheckStatus::fail);
    CHECK_THAT(r.lhs, WithinAbs(-1.0, 1e-8));
    CHECK(r.margin < 0.0);
}

TEST_CASE("Kato check is inconclusive on unresolved oscillation", "[analysis][kato]") {
    const SampledFunction fast{"sin(200x)e^{-x}",
                               [](double x) { return std::sin(200 * x) * std::exp(-x); },
                               [](double x) {
                                   return (200 * std::cos(200 * x) - std::sin(200 * x)) * std::exp(-x);
                               },
                               [](double x) {
                                   return (-40001 * std::sin(200 * x) - 400 * std::cos(200 * x)) *
                                          std::exp(-x);
                               }};
    CHECK(check_kato(fast, Weight::linear()).status == CheckStatus::inconclusive);
    CHECK(to_string(CheckStatus::inconclusive) == "inconclusive");
}

TEST_CASE("interpolation constant", "[analysis][interpolation]") {
    CHECK_THAT(interpolation_constant(0.0), WithinRel(2.0, 1e-15));
    CHECK_THAT(interpolation_constant(0.5), WithinRel(2.0 * std::pow(0.5, -0.25) / 1.5, 1e-14));
    CHECK_THROWS_AS(interpolation_constant(1.0), DomainError);
    CHECK_THROWS_AS(interpolation_constant(-1.0), DomainError);
}

TEST_CASE("interpolation bounds hold on the catalog", "[analysis][interpolation]") {
    for (const auto& f : {samples::x_exp(), samples::sin_exp(), samples::odd_gaussian(1.0)}) {
        for (double m : {-0.5, 0.0, 0.5, 0.99}) {
            const auto r = check_interpolation(f, m);
            INFO(f.name << " m=" << m);
            CHECK(r.passed());
            CHECK(r.epsilon_forms.size() == 3);
            CHECK(r.pointwise.size() == 3);
            CHECK(r.product_form.lhs <= r.product_form.rhs);
        }
    }
    // e^{-x} does not vanish at 0 but still meets ‖f'‖_{L¹} ≤ ‖f''‖_{X₁} with equality.
    const auto r = check_interpolation(samples::exp_decay(), 0.0);
    CHECK(r.pointwise.back().status == CheckStatus::pass);
    CHECK_THROWS_AS(check_interpolation(samples::x_exp(), 1.0), DomainError);
}

TEST_CASE("heat kernel sampling checks", "[analysis][kernel]") {
    const auto pos = check_kernel_positivity(100000, 7);
    CHECK(pos.passed());
    CHECK(pos.samples == 100000);
    const auto mono = check_monotone_kernel(100000, 7);
    CHECK(mono.passed());
    CHECK(check_kernel_positivity(1000, 3).worst_margin ==
          check_kernel_positivity(1000, 3).worst_margin);
}

TEST_CASE("strict domination at second order", "[analysis][domination]") {
    const auto mesh = build_mesh(40.0, 1024);
    const auto states = random_states(mesh, 10, 5);
    for (double nu : {0.0, -0.5, -1.0}) {
        const OperatorBundle bundle(mesh, RateModel::power(1.0), DaughterKernel::power_law(nu));
        const auto r = check_strict_domination(bundle, 2.0, states);
        CHECK(r.passed());
        CHECK(r.samples == 10);
        // The continuum bound is an equality, so the margin is quadrature-sized.
        CHECK(std::abs(r.worst_margin) < 1e-4);
    }
}

TEST_CASE("strict domination without tolerance exposes the quadrature excess",
          "[analysis][domination]") {
    const auto mesh = build_mesh(40.0, 256);
    const OperatorBundle bundle(mesh, RateModel::constant(1.0), DaughterKernel::power_law(0.0));
    const auto states = random_states(mesh, 4, 9);
    CHECK(check_strict_domination(bundle, 2.0, states, 0.0).violations == 4);
    CHECK_THROWS_AS(check_strict_domination(bundle, 2.0, states, -1.0), DomainError);
    const auto other = random_states(build_mesh(40.0, 128), 1, 1);
    CHECK_THROWS_AS(check_strict_domination(bundle, 2.0, other), DomainError);
}

TEST_CASE("heat growth bound", "[analysis][growth]") {
    const auto mesh = build_mesh(40.0, 512);
    const auto states = random_states(mesh, 5, 3);
    const std::vector<double> times{0.05, 0.5, 2.0};
    for (double m : {3.0, 4.0}) {
        const auto r = check_growth_bound(states, m, times);
        CHECK(r.passed());
        CHECK(r.samples == 15);
        CHECK(r.worst_margin > 0.0);
    }
}

TEST_CASE("Miyadera ratio for the linear rate", "[analysis][miyadera]") {
    const OperatorBundle bundle(build_mesh(20.0, 512), RateModel::power(1.0),
                                DaughterKernel::power_law(0.0));
    const std::vector<State> f{
        State::sample(bundle.mesh_ptr(), [](double x) { return x * std::exp(-x); })};
    const auto r = check_miyadera(bundle, f, 2.0);
    CHECK(r.passed);
    CHECK_FALSE(r.flagged);
    REQUIRE(r.delta_m.has_value());
    CHECK_THAT(*r.delta_m, WithinRel(1.0 / 3.0, 1e-15));
    REQUIRE(r.curves.size() == 1);
    const auto& c = r.curves[0];
    CHECK(c.t.size() == 10);
    for (std::size_t k = 1; k < c.ratio.size(); ++k) {
        CHECK(c.ratio[k] >= c.ratio[k - 1]);
    }
    CHECK(c.ratio.front() < 0.1);
    CHECK(c.t_m.has_value());
    CHECK(c.final_ratio < 0.95);
}

TEST_CASE("Miyadera check flags a weakly contracting kernel", "[analysis][miyadera]") {
    // (ν+2) x^ν / y^{ν+1} with ν = 50 concentrates fragments near the parent size.
    const auto steep = DaughterKernel::custom(
        [](double x, double y) { return 52.0 * std::pow(x / y, 50.0) / y; }, "steep");
    const OperatorBundle bundle(build_mesh(20.0, 256), RateModel::power(1.0), steep);
    const std::vector<State> f{
        State::sample(bundle.mesh_ptr(), [](double x) { return x * std::exp(-x); })};
    const auto r = check_miyadera(bundle, f, 2.0);
    CHECK(r.flagged);
    CHECK_FALSE(r.diagnostic.empty());
    REQUIRE(r.delta_m.has_value());
    CHECK(*r.delta_m < 0.05);
}

TEST_CASE("Miyadera argument checks", "[analysis][miyadera][errors]") {
    const OperatorBundle bundle(build_mesh(20.0, 64), RateModel::power(1.0),
                                DaughterKernel::power_law(0.0));
    const std::vector<State> f{State::sample(bundle.mesh_ptr(), [](double x) { return std::exp(-x); })};
    CHECK_THROWS_AS(check_miyadera(bundle, f, 1.0), DomainError);
    MiyaderaOptions bad;
    bad.probe_times = {0.5, 0.2};
    CHECK_THROWS_AS(check_miyadera(bundle, f, 2.0, bad), DomainError);
    const std::vector<State> zero{State::zeros(bundle.mesh_ptr())};
    CHECK_THROWS_AS(check_miyadera(bundle, zero, 2.0), DomainError);
}
