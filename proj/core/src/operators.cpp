#include "fragdiff/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "fragdiff/errors.hpp"

namespace fragdiff {

std::string to_string(RightBoundary bc) {
    return bc == RightBoundary::noflux ? "noflux" : "dirichlet";
}

// ------------------------------------------------------------- tridiagonal

void Tridiagonal::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * x[i];
        if (i > 0) {
            v += lower[i] * x[i - 1];
        }
        if (i + 1 < n) {
            v += upper[i] * x[i + 1];
        }
        y[i] = v;
    }
}

void solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs, std::span<double> x) {
    const std::size_t n = m.size();
    std::vector<double> c(n, 0.0);
    double pivot = m.diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
        throw NumericalError("tridiagonal solve: zero pivot in row 0");
    }
    c[0] = n > 1 ? m.upper[0] / pivot : 0.0;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = m.diag[i] - m.lower[i] * c[i - 1];
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw NumericalError("tridiagonal solve: zero pivot in row " + std::to_string(i));
        }
        c[i] = i + 1 < n ? m.upper[i] / pivot : 0.0;
        x[i] = (rhs[i] - m.lower[i] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= c[i] * x[i + 1];
    }
}

Tridiagonal assemble_diffusion(const Mesh& mesh, RightBoundary right_bc, double diffusivity) {
    if (!(diffusivity > 0.0)) {
        throw ConfigError("diffusion rate D must be positive");
    }
    const std::size_t n = mesh.size();
    const auto x = mesh.centers();
    const auto w = mesh.widths();
    Tridiagonal L{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                  std::vector<double>(n, 0.0)};

    // φ(0) = 0 through the ghost value mirrored about the origin.
    L.diag[0] -= diffusivity / x[0] / w[0];

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double face = diffusivity / (x[i + 1] - x[i]);
        L.diag[i] -= face / w[i];
        L.upper[i] += face / w[i];
        L.diag[i + 1] -= face / w[i + 1];
        L.lower[i + 1] += face / w[i + 1];
    }

    if (right_bc == RightBoundary::dirichlet) {
        L.diag[n - 1] -= diffusivity / (mesh.x_max() - x[n - 1]) / w[n - 1];
    } else {
        // Inward flux D φ / x̄ balances the telescoped mass flux: x φ' = φ at x_max.
        L.diag[n - 1] += diffusivity / x[n - 1] / w[n - 1];
    }
    return L;
}

// ------------------------------------------------------------------- birth

namespace {

/// ∫_lo^hi x b(x, y) dx for custom kernels (16-point Gauss-Legendre per cell).
double custom_cell_mass(const DaughterKernel& kernel, double lo, double hi, double y) {
    const double top = std::min(hi, y);
    if (!(top > lo)) {
        return 0.0;
    }
    using Gauss = boost::math::quadrature::gauss<double, 16>;
    return Gauss::integrate([&](double x) { return x * kernel(x, y); }, lo, top);
}

}  // namespace

BirthOperator BirthOperator::zero(std::size_t n) {
    BirthOperator op;
    op.n_ = n;
    op.separable_ = true;
    op.zero_ = true;
    op.diag_.assign(n, 0.0);
    op.receiver_.assign(n, 0.0);
    op.donor_.assign(n, 0.0);
    op.widths_.assign(n, 1.0);
    return op;
}

BirthOperator BirthOperator::assemble(const Mesh& mesh, const RateModel& rate,
                                      const DaughterKernel& kernel) {
    const std::size_t n = mesh.size();
    const auto e = mesh.edges();
    const auto x = mesh.centers();
    const auto w = mesh.widths();
    const auto mw = mesh.mass_weights();
    const std::vector<double> a = rate.sample(mesh);

    BirthOperator op = zero(n);
    op.widths_.assign(w.begin(), w.end());
    op.zero_ = std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
    if (op.zero_) {
        return op;
    }

    if (kernel.is_power_law()) {
        // Raw weights factor as r_i · a_j x̄_j^{-ν-1}; r_i is the mass-weighted
        // average of x^ν over the receiver cell (up to the factor ν+2).
        const double p = kernel.nu() + 2.0;
        std::vector<double> edge_pow(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            edge_pow[k] = std::pow(e[k], p);
        }
        double below = 0.0;  // Σ_{i<j} x̄_i Δ_i r_i
        for (std::size_t j = 0; j < n; ++j) {
            op.receiver_[j] = (edge_pow[j + 1] - edge_pow[j]) / mw[j];
            if (a[j] > 0.0) {
                const double self = (std::pow(x[j], p) - edge_pow[j]) / mw[j];
                const double donor = a[j] * std::pow(x[j], 1.0 - p);
                const double raw_mass = donor * (below + mw[j] * self);
                const double s = x[j] * a[j] / raw_mass;
                op.donor_[j] = donor * s * w[j];
                op.diag_[j] = self * op.donor_[j];
            }
            below += mw[j] * op.receiver_[j];
        }
        op.separable_ = true;
        return op;
    }

    op.separable_ = false;
    op.dense_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        if (a[j] == 0.0) {
            continue;
        }
        double raw_mass = 0.0;
        for (std::size_t i = 0; i <= j; ++i) {
            const double cell = custom_cell_mass(kernel, e[i], e[i + 1], x[j]);
            const double raw = a[j] * cell / mw[i];
            op.dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = raw;
            raw_mass += mw[i] * raw;
        }
        if (!(raw_mass > 0.0)) {
            continue;
        }
        const double s = x[j] * a[j] / raw_mass;
        for (std::size_t i = 0; i <= j; ++i) {
            op.dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *= s * w[j];
        }
        op.diag_[j] = op.dense_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    }
    return op;
}

double BirthOperator::entry(std::size_t i, std::size_t j) const {
    if (zero_ || i > j) {
        return 0.0;
    }
    if (!separable_) {
        return dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return i == j ? diag_[j] : receiver_[i] * donor_[j];
}

double BirthOperator::weight(std::size_t i, std::size_t j) const {
    return entry(i, j) / widths_[j];
}

void BirthOperator::apply(std::span<const double> phi, std::span<double> out) const {
    if (zero_) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    if (separable_) {
        double suffix = 0.0;
        for (std::size_t i = n_; i-- > 0;) {
            out[i] = receiver_[i] * suffix + diag_[i] * phi[i];
            suffix += donor_[i] * phi[i];
        }
        return;
    }
    Eigen::Map<const Eigen::VectorXd> p(phi.data(), static_cast<Eigen::Index>(n_));
    Eigen::Map<Eigen::VectorXd> o(out.data(), static_cast<Eigen::Index>(n_));
    o.noalias() = dense_.triangularView<Eigen::Upper>() * p;
}

Eigen::MatrixXd BirthOperator::to_dense() const {
    const auto n = static_cast<Eigen::Index>(n_);
    if (!separable_) {
        return dense_;
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    if (zero_) {
        return m;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            m(i, j) = receiver_[static_cast<std::size_t>(i)] * donor_[static_cast<std::size_t>(j)];
        }
        m(j, j) = diag_[static_cast<std::size_t>(j)];
    }
    return m;
}

// ------------------------------------------------------------------ bundle

OperatorBundle::OperatorBundle(MeshPtr mesh, RateModel rate, DaughterKernel kernel,
                               RightBoundary right_bc, double diffusivity)
    : mesh_(std::move(mesh)),
      rate_(std::move(rate)),
      kernel_(std::move(kernel)),
      right_bc_(right_bc),
      diffusivity_(diffusivity) {
    if (!mesh_) {
        throw ConfigError("operator bundle requires a mesh");
    }
    rate_.check_admissible(*mesh_);
    diffusion_ = assemble_diffusion(*mesh_, right_bc_, diffusivity_);
    death_ = rate_.sample(*mesh_);
    birth_ = BirthOperator::assemble(*mesh_, rate_, kernel_);
}

OperatorBundle OperatorBundle::with_rate(const RateModel& rate) const {
    return OperatorBundle(mesh_, rate, kernel_, right_bc_, diffusivity_);
}

OperatorBundle OperatorBundle::without_birth() const {
    OperatorBundle copy = *this;
    copy.birth_ = BirthOperator::zero(size());
    return copy;
}

Eigen::MatrixXd OperatorBundle::dense() const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd m = birth_.to_dense();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        m(i, i) += diffusion_.diag[k] - death_[k];
        if (i > 0) {
            m(i, i - 1) += diffusion_.lower[k];
        }
        if (i + 1 < n) {
            m(i, i + 1) += diffusion_.upper[k];
        }
    }
    return m;
}

double OperatorBundle::scale() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        s = std::max(s, std::abs(diffusion_.diag[i]) + death_[i]);
    }
    return s;
}

void apply_generator(const OperatorBundle& bundle, std::span<const double> phi,
                     std::span<double> out) {
    const std::size_t n = bundle.size();
    if (phi.size() != n || out.size() != n) {
        throw DomainError("apply_generator: vector length does not match the mesh");
    }
    std::vector<double> birth(n);
    bundle.birth().apply(phi, birth);
    bundle.diffusion().apply(phi, out);
    const auto a = bundle.death();
    for (std::size_t i = 0; i < n; ++i) {
        out[i] += birth[i] - a[i] * phi[i];
    }
}

State apply_generator(const OperatorBundle& bundle, const State& state) {
    if (state.mesh_ptr() != bundle.mesh_ptr()) {
        const auto ea = state.mesh().edges();
        const auto eb = bundle.mesh().edges();
        if (!std::equal(ea.begin(), ea.end(), eb.begin(), eb.end())) {
            throw DomainError("apply_generator: state and operator live on different meshes");
        }
    }
    State out = State::zeros(bundle.mesh_ptr(), state.time());
    apply_generator(bundle, state.values(), out.values());
    return out;
}

double boundary_mass_flux(const OperatorBundle& bundle, std::span<const double> phi) {
    std::vector<double> lphi(phi.size());
    bundle.diffusion().apply(phi, lphi);
    const auto mw = bundle.mesh().mass_weights();
    double flux = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        flux += mw[i] * lphi[i];
    }
    return flux;
}

// ------------------------------------------------------------- heat kernel

double kernel_value(double t, double z) {
    if (!(t > 0.0)) {
        throw DomainError("heat kernel requires t > 0");
    }
    return std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

State heat_apply_exact(const State& f, double t) {
    if (!(t > 0.0)) {
        throw DomainError("heat_apply_exact requires t > 0");
    }
    const Mesh& mesh = f.mesh();
    const auto x = mesh.centers();
    const auto w = mesh.widths();
    const std::size_t n = mesh.size();
    const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
    const double inv4t = 1.0 / (4.0 * t);

    std::vector<double> fw(n);
    for (std::size_t j = 0; j < n; ++j) {
        fw[j] = f[j] * w[j];
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double dm = x[i] - x[j];
            const double dp = x[i] + x[j];
            sum += (std::exp(-dm * dm * inv4t) - std::exp(-dp * dp * inv4t)) * fw[j];
        }
        out[i] = norm * sum;
    }
    if (f.min_value() >= 0.0) {
        for (double& v : out) {
            v = std::max(v, 0.0);
        }
    }
    return State(f.mesh_ptr(), std::move(out), f.time() + t);
}

double heat_growth_constant(double m) {
    if (m == 1.0) {
        return 0.0;
    }
    if (!(m >= 3.0)) {
        throw DomainError("heat growth constant is available for m = 1 and m >= 3");
    }
    return std::pow(4.0, 1.0 / (m - 1.0)) * m * std::pow(m - 3.0, (m - 3.0) / (m - 1.0));
}

}  // namespace fragdiff
