#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fragdiff/operators.hpp"

namespace fragdiff {

/// Factorised α·I + β·𝔸, optionally with one row swapped for the mass row
/// (x̄_i Δ_i)_i. Built once, solved many times.
///
/// Separable birth operators are factorised through an augmented sparse
/// system carrying the running donor sums S_i = Σ_{j>i} c_j φ_j as extra
/// unknowns, which keeps the cost linear in N. Custom kernels fall back to a
/// dense LU.
class GeneratorSystem {
public:
    struct Options {
        double identity = 0.0;   ///< α
        double generator = 1.0;  ///< β
        std::optional<std::size_t> mass_row;
        bool force_dense = false;
    };

    GeneratorSystem(const OperatorBundle& bundle, Options options);
    ~GeneratorSystem();
    GeneratorSystem(GeneratorSystem&&) noexcept;
    GeneratorSystem& operator=(GeneratorSystem&&) noexcept;

    /// Throws NumericalError if the solution is not finite.
    std::vector<double> solve(std::span<const double> rhs) const;

    bool is_dense() const noexcept;
    std::size_t size() const noexcept { return n_; }

private:
    struct Impl;
    std::size_t n_ = 0;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fragdiff
