#include <catch_amalgamated.hpp>

#include <random>

#include "fragdiff/errors.hpp"
#include "fragdiff/linear_system.hpp"

using namespace fragdiff;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> random_rhs(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) {
        x = u(rng);
    }
    return v;
}

OperatorBundle make_bundle(std::size_t n, const RateModel& rate, const DaughterKernel& kernel) {
    return OperatorBundle(build_mesh(20.0, n, GradingSpec::geometric(1.01)), rate, kernel);
}

}  // namespace

TEST_CASE("sparse and dense backends agree", "[linear_system]") {
    const auto bundle =
        make_bundle(200, RateModel::shifted_power(0.5, 1.0), DaughterKernel::power_law(-0.5));
    const auto rhs = random_rhs(200, 4);
    for (auto opts : {GeneratorSystem::Options{1.0, -0.01, std::nullopt, false},
                      GeneratorSystem::Options{0.0, 1.0, std::size_t{100}, false}}) {
        const GeneratorSystem sparse(bundle, opts);
        opts.force_dense = true;
        const GeneratorSystem dense(bundle, opts);
        CHECK_FALSE(sparse.is_dense());
        CHECK(dense.is_dense());
        const auto a = sparse.solve(rhs);
        const auto b = dense.solve(rhs);
        double scale = 0.0;
        for (double v : b) {
            scale = std::max(scale, std::abs(v));
        }
        for (std::size_t i = 0; i < 200; ++i) {
            REQUIRE_THAT(a[i], WithinAbs(b[i], 1e-10 * scale));
        }
    }
}

TEST_CASE("solution satisfies the shifted system", "[linear_system]") {
    const auto bundle = make_bundle(150, RateModel::power(1.0), DaughterKernel::power_law(0.0));
    const GeneratorSystem sys(bundle, {2.0, -0.5, std::nullopt, false});
    const auto rhs = random_rhs(150, 8);
    const auto x = sys.solve(rhs);
    const Eigen::MatrixXd M =
        2.0 * Eigen::MatrixXd::Identity(150, 150) - 0.5 * bundle.dense();
    const Eigen::VectorXd r =
        M * Eigen::Map<const Eigen::VectorXd>(x.data(), 150) -
        Eigen::Map<const Eigen::VectorXd>(rhs.data(), 150);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sys.size() == 150);
}

TEST_CASE("mass row replaces one equation", "[linear_system]") {
    const auto bundle = make_bundle(120, RateModel::constant(1.0), DaughterKernel::power_law(0.0));
    const std::size_t row = 60;
    std::vector<double> rhs(120, 0.0);
    rhs[row] = 2.0;
    const GeneratorSystem sys(bundle, {0.0, 1.0, row, false});
    const auto psi = sys.solve(rhs);
    const auto mw = bundle.mesh().mass_weights();
    double mass = 0.0;
    for (std::size_t i = 0; i < 120; ++i) {
        mass += mw[i] * psi[i];
    }
    CHECK_THAT(mass, WithinAbs(2.0, 1e-12));
    std::vector<double> out(120);
    apply_generator(bundle, psi, out);
    for (std::size_t i = 0; i < 120; ++i) {
        if (i != row) {
            REQUIRE_THAT(out[i], WithinAbs(0.0, 1e-10));
        }
    }
}

TEST_CASE("custom kernels use the dense backend", "[linear_system]") {
    const auto bundle = make_bundle(
        60, RateModel::constant(1.0),
        DaughterKernel::custom([](double, double y) { return 2.0 / y; }, "binary"));
    const GeneratorSystem sys(bundle, {1.0, -0.1, std::nullopt, false});
    CHECK(sys.is_dense());
    const auto x = sys.solve(random_rhs(60, 1));
    CHECK(x.size() == 60);
}

TEST_CASE("generator system errors", "[linear_system][errors]") {
    const auto bundle = make_bundle(40, RateModel::constant(1.0), DaughterKernel::power_law(0.0));
    CHECK_THROWS_AS(GeneratorSystem(bundle, {0.0, 1.0, std::size_t{40}, false}), DomainError);
    CHECK_THROWS_AS(GeneratorSystem(bundle, {0.0, 0.0, std::nullopt, false}), NumericalError);
    CHECK_THROWS_AS(GeneratorSystem(bundle, {0.0, 0.0, std::nullopt, true}), NumericalError);
    GeneratorSystem sys(bundle, {1.0, -0.1, std::nullopt, false});
    CHECK_THROWS_AS(sys.solve(random_rhs(39, 1)), DomainError);

    GeneratorSystem moved(std::move(sys));
    CHECK(moved.size() == 40);
}
