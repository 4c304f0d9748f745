#include "fragdiff/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "fragdiff/errors.hpp"

namespace fragdiff {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::string format_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- RateModel

RateModel RateModel::constant(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw AdmissibilityError("constant rate must be finite and >= 0");
    }
    RateModel r;
    r.kind_ = Kind::constant;
    r.c_ = c;
    return r;
}

RateModel RateModel::power(double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw AdmissibilityError("power-law rate needs gamma >= 0 (local boundedness at 0)");
    }
    RateModel r;
    r.kind_ = Kind::power;
    r.gamma_ = gamma;
    return r;
}

RateModel RateModel::shifted_power(double c, double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw AdmissibilityError("shifted power-law rate needs gamma >= 0");
    }
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw AdmissibilityError("shifted power-law rate needs c >= 0");
    }
    RateModel r;
    r.kind_ = Kind::shifted_power;
    r.c_ = c;
    r.gamma_ = gamma;
    return r;
}

RateModel RateModel::table(std::vector<double> x, std::vector<double> a) {
    if (x.size() != a.size() || x.empty()) {
        throw AdmissibilityError("rate table needs matching, non-empty x and a columns");
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x[k]) || !std::isfinite(a[k]) || a[k] < 0.0) {
            throw AdmissibilityError("rate table entries must be finite with a >= 0");
        }
        if (k > 0 && !(x[k] > x[k - 1])) {
            throw AdmissibilityError("rate table abscissae must increase strictly");
        }
    }
    RateModel r;
    r.kind_ = Kind::table;
    r.table_x_ = std::move(x);
    r.table_a_ = std::move(a);
    return r;
}

RateModel RateModel::regularized(const RateModel& base, int n) {
    if (n < 1) {
        throw AdmissibilityError("regularization index n must be >= 1");
    }
    RateModel r;
    r.kind_ = Kind::regularized;
    r.n_ = n;
    r.base_ = std::make_shared<const RateModel>(base);
    return r;
}

double RateModel::operator()(double x) const {
    switch (kind_) {
        case Kind::constant:
            return c_;
        case Kind::power:
            return gamma_ == 0.0 ? 1.0 : std::pow(x, gamma_);
        case Kind::shifted_power:
            return c_ + (gamma_ == 0.0 ? 1.0 : std::pow(x, gamma_));
        case Kind::table: {
            if (x <= table_x_.front()) {
                return table_a_.front();
            }
            if (x >= table_x_.back()) {
                return table_a_.back();
            }
            const auto it = std::upper_bound(table_x_.begin(), table_x_.end(), x);
            const auto k = static_cast<std::size_t>(it - table_x_.begin());
            const double s = (x - table_x_[k - 1]) / (table_x_[k] - table_x_[k - 1]);
            return (1.0 - s) * table_a_[k - 1] + s * table_a_[k];
        }
        case Kind::regularized:
            return (*base_)(x) + x / static_cast<double>(n_);
    }
    return 0.0;
}

std::vector<double> RateModel::sample(const Mesh& mesh) const {
    std::vector<double> a;
    a.reserve(mesh.size());
    for (double x : mesh.centers()) {
        a.push_back((*this)(x));
    }
    return a;
}

bool RateModel::diverges() const noexcept {
    switch (kind_) {
        case Kind::power:
        case Kind::shifted_power:
            return gamma_ > 0.0;
        case Kind::regularized:
            return true;
        case Kind::constant:
        case Kind::table:
            return false;
    }
    return false;
}

double RateModel::outer_liminf(const Mesh& mesh) const {
    const double lo = 0.1 * mesh.x_max();
    double inf_a = inf;
    for (double x : mesh.centers()) {
        if (x >= lo) {
            inf_a = std::min(inf_a, (*this)(x));
        }
    }
    return inf_a;
}

void RateModel::check_admissible(const Mesh& mesh) const {
    const auto x = mesh.centers();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = (*this)(x[i]);
        if (!std::isfinite(a) || a < 0.0) {
            throw AdmissibilityError("rate " + describe() + " is negative or non-finite at x = " +
                                     format_number(x[i]));
        }
    }
}

std::string RateModel::describe() const {
    switch (kind_) {
        case Kind::constant:
            return "constant(" + format_number(c_) + ")";
        case Kind::power:
            return "power(" + format_number(gamma_) + ")";
        case Kind::shifted_power:
            return "shifted_power(" + format_number(c_) + ", " + format_number(gamma_) + ")";
        case Kind::table:
            return "table(" + std::to_string(table_x_.size()) + " points)";
        case Kind::regularized:
            return "regularized(" + base_->describe() + ", " + std::to_string(n_) + ")";
    }
    return "unknown";
}

// ----------------------------------------------------------- DaughterKernel

DaughterKernel DaughterKernel::power_law(double nu) {
    if (!(nu > -2.0 && nu <= 0.0)) {
        throw AdmissibilityError("power-law daughter exponent nu must lie in (-2, 0]");
    }
    DaughterKernel k;
    k.nu_ = nu;
    k.name_ = "powerlaw";
    k.tolerance_ = 1e-10;
    return k;
}

DaughterKernel DaughterKernel::custom(Density b, std::string name, double tolerance) {
    if (!b) {
        throw AdmissibilityError("custom daughter kernel needs a density");
    }
    DaughterKernel k;
    k.density_ = std::move(b);
    k.name_ = std::move(name);
    k.tolerance_ = tolerance;
    const auto samples = default_y_samples();
    const auto report = verify_mass_condition(k, samples);
    if (!report.passed) {
        throw AdmissibilityError("daughter kernel '" + k.name_ +
                                 "' violates the mass condition at y = " +
                                 format_number(report.worst_y) + " (relative defect " +
                                 format_number(report.max_rel_defect) + ")");
    }
    return k;
}

double DaughterKernel::operator()(double x, double y) const {
    if (!(x > 0.0) || !(x < y)) {
        return 0.0;
    }
    if (density_) {
        return density_(x, y);
    }
    return (nu_ + 2.0) * std::pow(x, nu_) * std::pow(y, -nu_ - 1.0);
}

double DaughterKernel::partial_moment(double m, double y) const {
    return partial_moment(m, 0.0, y, y);
}

double DaughterKernel::partial_moment(double m, double lo, double hi, double y) const {
    const double top = std::min(hi, y);
    if (!(top > lo)) {
        return 0.0;
    }
    if (!density_) {
        const double p = nu_ + m + 1.0;
        const double scale = (nu_ + 2.0) * std::pow(y, -nu_ - 1.0);
        if (p == 0.0) {
            return lo > 0.0 ? scale * std::log(top / lo) : inf;
        }
        if (p < 0.0 && lo == 0.0) {
            return inf;
        }
        return scale * (std::pow(top, p) - std::pow(lo, p)) / p;
    }
    using Gauss = boost::math::quadrature::gauss<double, 64>;
    return Gauss::integrate(
        [&](double x) { return std::pow(x, m) * density_(x, y); }, lo, top);
}

std::string DaughterKernel::describe() const {
    if (!density_) {
        return "powerlaw(" + format_number(nu_) + ")";
    }
    return "custom(" + name_ + ")";
}

std::vector<double> DaughterKernel::default_y_samples() {
    std::vector<double> ys;
    constexpr int per_decade = 32;
    for (int k = -2 * per_decade; k <= 2 * per_decade; ++k) {
        ys.push_back(std::pow(10.0, static_cast<double>(k) / per_decade));
    }
    return ys;
}

// ------------------------------------------------------------------ checks

MassConditionReport verify_mass_condition(const DaughterKernel& kernel,
                                          std::span<const double> y_samples) {
    MassConditionReport report;
    report.tolerance = kernel.tolerance();
    for (double y : y_samples) {
        if (!(y > 0.0)) {
            throw DomainError("mass condition samples must be positive");
        }
        const double defect = std::abs(kernel.partial_moment(1.0, y) - y) / y;
        if (!(defect <= report.max_rel_defect)) {
            report.max_rel_defect = defect;
            report.worst_y = y;
        }
    }
    report.passed = report.max_rel_defect <= report.tolerance;
    return report;
}

double delta_m(const DaughterKernel& kernel, double m) {
    if (!(m > 1.0)) {
        throw DomainError("contraction constant delta_m is defined for m > 1 only");
    }
    double delta = 0.0;
    if (kernel.is_power_law()) {
        delta = (m - 1.0) / (kernel.nu() + m + 1.0);
    } else {
        double sup = 0.0;
        for (double y : DaughterKernel::default_y_samples()) {
            sup = std::max(sup, kernel.partial_moment(m, y) / std::pow(y, m));
        }
        delta = std::min(1.0, 1.0 - sup);
    }
    if (!(delta > 0.0)) {
        throw AdmissibilityError("daughter kernel " + kernel.describe() +
                                 " has no moment contraction at order m = " + format_number(m));
    }
    return delta;
}

std::optional<double> find_x_star(const RateModel& rate, double x_max_probe) {
    if (!(x_max_probe > 0.0)) {
        throw DomainError("probe range for x_* must be positive");
    }
    constexpr int samples = 4096;
    const double step = x_max_probe / samples;
    if (rate(x_max_probe) < 1.0) {
        return std::nullopt;
    }
    int last_below = -1;
    for (int k = 0; k <= samples; ++k) {
        if (rate(k * step) < 1.0) {
            last_below = k;
        }
    }
    if (last_below < 0) {
        return 0.0;
    }
    double lo = last_below * step;
    double hi = (last_below + 1) * step;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (rate(mid) < 1.0 ? lo : hi) = mid;
    }
    return hi;
}

std::optional<CeilingEntry> moment_ceiling(const RateModel& rate, const DaughterKernel& kernel,
                                           double m, double x_max_probe) {
    if (!(m >= 3.0)) {
        throw DomainError("moment ceiling is defined for m >= 3");
    }
    const auto x_star = find_x_star(rate, x_max_probe);
    if (!x_star) {
        return std::nullopt;
    }
    CeilingEntry entry;
    entry.m = m;
    entry.delta = delta_m(kernel, m);
    entry.x_star = *x_star;
    const double d = entry.delta;
    const double growth = m == 3.0 ? 2.0 * m
                                   : 2.0 * m * std::pow(2.0 * m * (m - 3.0) / d, (m - 3.0) / 2.0);
    entry.mu = (2.0 / d) * (growth + d * std::pow(entry.x_star, m - 1.0));
    return entry;
}

ContractionConstants contraction_constants(const RateModel& rate, const DaughterKernel& kernel,
                                           std::span<const double> orders, double x_max_probe) {
    ContractionConstants out;
    out.x_star = find_x_star(rate, x_max_probe);
    for (double m : orders) {
        if (m > 1.0) {
            out.delta[m] = delta_m(kernel, m);
        }
        if (m >= 3.0 && out.x_star) {
            if (auto entry = moment_ceiling(rate, kernel, m, x_max_probe)) {
                out.mu[m] = entry->mu;
            }
        }
    }
    return out;
}

}  // namespace fragdiff
