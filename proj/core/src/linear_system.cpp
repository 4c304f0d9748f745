#include "fragdiff/linear_system.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "fragdiff/errors.hpp"

namespace fragdiff {

struct GeneratorSystem::Impl {
    bool dense = false;
    Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu;
    Eigen::SparseMatrix<double> sparse_matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> sparse_lu;
};

namespace {

using Triplet = Eigen::Triplet<double>;

int idx(std::size_t i) { return static_cast<int>(i); }

}  // namespace

GeneratorSystem::GeneratorSystem(const OperatorBundle& bundle, Options options)
    : n_(bundle.size()), impl_(std::make_unique<Impl>()) {
    const std::size_t n = n_;
    const double alpha = options.identity;
    const double beta = options.generator;
    const auto mw = bundle.mesh().mass_weights();
    if (options.mass_row && *options.mass_row >= n) {
        throw DomainError("mass constraint row is outside the mesh");
    }

    const BirthOperator& birth = bundle.birth();
    if (options.force_dense || !birth.separable()) {
        impl_->dense = true;
        Eigen::MatrixXd m = beta * bundle.dense();
        m.diagonal().array() += alpha;
        if (options.mass_row) {
            const auto k = static_cast<Eigen::Index>(*options.mass_row);
            for (std::size_t j = 0; j < n; ++j) {
                m(k, static_cast<Eigen::Index>(j)) = mw[j];
            }
        }
        impl_->dense_lu.compute(m);
        const double rc = impl_->dense_lu.rcond();
        if (!(rc > std::numeric_limits<double>::epsilon())) {
            throw NumericalError("generator system is singular (reciprocal condition " +
                                 std::to_string(rc) + ")");
        }
        return;
    }

    // Unknowns: φ_0..φ_{n-1}, then S_0..S_{n-1}.
    const Tridiagonal& L = bundle.diffusion();
    const auto a = bundle.death();
    const auto bdiag = birth.diagonal();
    const auto r = birth.receiver();
    const auto c = birth.donor();

    std::vector<Triplet> triplets;
    triplets.reserve(7 * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (options.mass_row && *options.mass_row == i) {
            for (std::size_t j = 0; j < n; ++j) {
                triplets.emplace_back(idx(i), idx(j), mw[j]);
            }
            continue;
        }
        triplets.emplace_back(idx(i), idx(i), alpha + beta * (L.diag[i] - a[i] + bdiag[i]));
        if (i > 0) {
            triplets.emplace_back(idx(i), idx(i - 1), beta * L.lower[i]);
        }
        if (i + 1 < n) {
            triplets.emplace_back(idx(i), idx(i + 1), beta * L.upper[i]);
            if (r[i] != 0.0) {
                triplets.emplace_back(idx(i), idx(n + i), beta * r[i]);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        triplets.emplace_back(idx(n + i), idx(n + i), 1.0);
        if (i + 1 < n) {
            triplets.emplace_back(idx(n + i), idx(n + i + 1), -1.0);
            triplets.emplace_back(idx(n + i), idx(i + 1), -c[i + 1]);
        }
    }
    impl_->sparse_matrix.resize(idx(2 * n), idx(2 * n));
    impl_->sparse_matrix.setFromTriplets(triplets.begin(), triplets.end());
    impl_->sparse_matrix.makeCompressed();
    impl_->sparse_lu.compute(impl_->sparse_matrix);
    if (impl_->sparse_lu.info() != Eigen::Success) {
        throw NumericalError("generator system is singular: " + impl_->sparse_lu.lastErrorMessage());
    }
}

GeneratorSystem::~GeneratorSystem() = default;
GeneratorSystem::GeneratorSystem(GeneratorSystem&&) noexcept = default;
GeneratorSystem& GeneratorSystem::operator=(GeneratorSystem&&) noexcept = default;

bool GeneratorSystem::is_dense() const noexcept { return impl_->dense; }

std::vector<double> GeneratorSystem::solve(std::span<const double> rhs) const {
    if (rhs.size() != n_) {
        throw DomainError("generator system: right-hand side has the wrong length");
    }
    const auto n = static_cast<Eigen::Index>(n_);
    std::vector<double> out(n_);
    if (impl_->dense) {
        Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
        Eigen::VectorXd x = impl_->dense_lu.solve(b);
        for (Eigen::Index i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = x(i);
        }
    } else {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            b(i) = rhs[static_cast<std::size_t>(i)];
        }
        Eigen::VectorXd x = impl_->sparse_lu.solve(b);
        for (Eigen::Index i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = x(i);
        }
    }
    for (double v : out) {
        if (!std::isfinite(v)) {
            throw NumericalError("generator system produced a non-finite solution");
        }
    }
    return out;
}

}  // namespace fragdiff
