#include "fragdiff/analysis_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fragdiff/coefficients.hpp"
#include "fragdiff/errors.hpp"
#include "fragdiff/evolution.hpp"

namespace fragdiff {

using Fn = SampledFunction::Fn;

SampledFunction SampledFunction::scaled(double amplitude, double dilation) const {
    SampledFunction g;
    g.name = name + "*scaled";
    auto f0 = f;
    auto f1 = df;
    auto f2 = d2f;
    g.f = [=](double x) { return amplitude * f0(dilation * x); };
    g.df = [=](double x) { return amplitude * dilation * f1(dilation * x); };
    g.d2f = [=](double x) { return amplitude * dilation * dilation * f2(dilation * x); };
    return g;
}

namespace samples {

SampledFunction x_exp() {
    return {"x*exp(-x)", [](double x) { return x * std::exp(-x); },
            [](double x) { return (1.0 - x) * std::exp(-x); },
            [](double x) { return (x - 2.0) * std::exp(-x); }};
}

SampledFunction shifted_exp() {
    return {"(x-1)*exp(-x)", [](double x) { return (x - 1.0) * std::exp(-x); },
            [](double x) { return (2.0 - x) * std::exp(-x); },
            [](double x) { return (x - 3.0) * std::exp(-x); }};
}

SampledFunction sin_exp() {
    return {"sin(x)*exp(-x)", [](double x) { return std::sin(x) * std::exp(-x); },
            [](double x) { return (std::cos(x) - std::sin(x)) * std::exp(-x); },
            [](double x) { return -2.0 * std::cos(x) * std::exp(-x); }};
}

SampledFunction exp_decay() {
    return {"exp(-x)", [](double x) { return std::exp(-x); },
            [](double x) { return -std::exp(-x); }, [](double x) { return std::exp(-x); }};
}

SampledFunction odd_gaussian(double s) {
    if (!(s > 0.0)) {
        throw DomainError("odd Gaussian width must be positive");
    }
    return {"x*exp(-x^2/4s)",
            [s](double x) { return x * std::exp(-x * x / (4.0 * s)); },
            [s](double x) { return (1.0 - x * x / (2.0 * s)) * std::exp(-x * x / (4.0 * s)); },
            [s](double x) {
                return (x * x * x / (4.0 * s * s) - 1.5 * x / s) * std::exp(-x * x / (4.0 * s));
            }};
}

}  // namespace samples

Weight Weight::linear() {
    return {"x", [](double x) { return x; }, [](double) { return 1.0; }};
}

Weight Weight::power(double m) {
    if (!(m >= 1.0)) {
        throw DomainError("Kato weights x^m need m >= 1");
    }
    return {"x^m", [m](double x) { return std::pow(x, m); },
            [m](double x) { return m * std::pow(x, m - 1.0); }};
}

Weight Weight::power_cutoff(double m, double R) {
    if (!(m >= 1.0) || !(R > 0.0)) {
        throw DomainError("cut-off weights need m >= 1 and R > 0");
    }
    auto chi = [R](double x) {
        const double s = x / R - 1.0;
        if (s <= 0.0) {
            return 1.0;
        }
        if (s >= 1.0) {
            return 0.0;
        }
        return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
    };
    auto dchi = [R](double x) {
        const double s = x / R - 1.0;
        if (s <= 0.0 || s >= 1.0) {
            return 0.0;
        }
        return (-6.0 * s + 6.0 * s * s) / R;
    };
    return {"x^m*cutoff", [=](double x) { return std::pow(x, m) * chi(x); },
            [=](double x) { return m * std::pow(x, m - 1.0) * chi(x) + std::pow(x, m) * dchi(x); }};
}

std::string to_string(CheckStatus status) {
    switch (status) {
        case CheckStatus::pass:
            return "pass";
        case CheckStatus::fail:
            return "fail";
        case CheckStatus::inconclusive:
            return "inconclusive";
    }
    return "unknown";
}

namespace {

using Gauss = boost::math::quadrature::gauss<double, 20>;

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

struct Breaks {
    std::vector<double> cuts;
    bool resolved = true;
};

// Panel boundaries on [0, x_max]: a uniform skeleton plus every sign change of g.
Breaks sign_breaks(const Fn& g, const QuadratureOptions& o) {
    Breaks b;
    constexpr int probes = 8;
    const auto cells = static_cast<std::size_t>(std::ceil(o.x_max / o.scan_width));
    const double h = o.x_max / static_cast<double>(cells);
    for (std::size_t k = 0; k < cells; ++k) {
        const double lo = h * static_cast<double>(k);
        double prev_x = lo;
        int prev_s = sign_of(g(lo));
        int changes = 0;
        double root_lo = 0.0;
        double root_hi = 0.0;
        for (int p = 1; p <= probes; ++p) {
            const double x = lo + h * p / probes;
            const int s = sign_of(g(x));
            if (s == 0) {
                continue;
            }
            if (prev_s != 0 && s != prev_s) {
                ++changes;
                root_lo = prev_x;
                root_hi = x;
            }
            prev_s = s;
            prev_x = x;
        }
        if (changes > 1) {
            b.resolved = false;
        }
        if (changes == 1) {
            const int s_lo = sign_of(g(root_lo));
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (root_lo + root_hi);
                if (mid <= root_lo || mid >= root_hi) {
                    break;
                }
                (sign_of(g(mid)) == s_lo ? root_lo : root_hi) = mid;
            }
            b.cuts.push_back(0.5 * (root_lo + root_hi));
        }
    }
    const auto panels = static_cast<std::size_t>(std::ceil(o.x_max / o.panel_width));
    for (std::size_t k = 0; k <= panels; ++k) {
        b.cuts.push_back(o.x_max * static_cast<double>(k) / static_cast<double>(panels));
    }
    std::sort(b.cuts.begin(), b.cuts.end());
    std::vector<double> merged;
    for (double c : b.cuts) {
        if (merged.empty() || c - merged.back() > 1e-12 * std::max(1.0, c)) {
            merged.push_back(c);
        }
    }
    merged.back() = o.x_max;
    b.cuts = std::move(merged);
    return b;
}

double integrate(const Fn& g, const std::vector<double>& cuts) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        s += Gauss::integrate(g, cuts[k], cuts[k + 1]);
    }
    return s;
}

// ∫_0^{x_max} x^m |g| dx for m > -1. The first panel carries the x^m
// endpoint singularity and goes to tanh-sinh.
double weighted_abs(const Fn& g, double m, const Breaks& b) {
    boost::math::quadrature::tanh_sinh<double> ts;
    const double first = b.cuts[1];
    auto head = [&](double x) { return std::pow(x, m) * std::abs(g(x)); };
    double s = ts.integrate(head, 0.0, first);
    for (std::size_t k = 1; k + 1 < b.cuts.size(); ++k) {
        s += Gauss::integrate([&](double x) { return std::pow(x, m) * std::abs(g(x)); }, b.cuts[k],
                              b.cuts[k + 1]);
    }
    return s;
}

InequalityReport upper_bound(std::string name, double lhs, double rhs, bool resolved) {
    InequalityReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = rhs - lhs;
    r.tolerance = 1e-8 * std::max(std::abs(rhs), 1e-300);
    r.status = !resolved ? CheckStatus::inconclusive
                         : (r.margin >= -r.tolerance ? CheckStatus::pass : CheckStatus::fail);
    return r;
}

double growth(double m) { return heat_growth_constant(m); }

}  // namespace

InequalityReport check_kato(const SampledFunction& f, const Weight& ell,
                            const QuadratureOptions& options) {
    const Breaks b = sign_breaks(f.f, options);
    auto sgn = [&](double x) { return static_cast<double>(sign_of(f.f(x))); };
    InequalityReport r;
    r.name = "kato[" + f.name + ", " + ell.name + "]";
    r.lhs = -integrate([&](double x) { return ell.ell(x) * sgn(x) * f.d2f(x); }, b.cuts);
    r.rhs = integrate([&](double x) { return ell.dell(x) * sgn(x) * f.df(x); }, b.cuts);
    const double scale =
        integrate([&](double x) { return ell.ell(x) * std::abs(f.d2f(x)); }, b.cuts) +
        integrate([&](double x) { return std::abs(ell.dell(x) * f.df(x)); }, b.cuts);
    r.margin = r.lhs - r.rhs;
    r.tolerance = 1e-8 * std::max(scale, 1e-300);
    if (!b.resolved) {
        r.status = CheckStatus::inconclusive;
    } else {
        r.status = r.margin >= -r.tolerance ? CheckStatus::pass : CheckStatus::fail;
    }
    return r;
}

double interpolation_constant(double m) {
    if (!(m > -1.0 && m < 1.0)) {
        throw DomainError("interpolation inequality holds for m in (-1, 1)");
    }
    return 2.0 * std::pow(1.0 - m, (m - 1.0) / 2.0) / (m + 1.0);
}

bool InterpolationReport::passed() const {
    auto ok = [](const InequalityReport& r) { return r.status == CheckStatus::pass; };
    return ok(product_form) && std::all_of(epsilon_forms.begin(), epsilon_forms.end(), ok) &&
           std::all_of(pointwise.begin(), pointwise.end(), ok);
}

InterpolationReport check_interpolation(const SampledFunction& f, double m,
                                        const QuadratureOptions& options) {
    const double C = interpolation_constant(m);
    const Breaks bf = sign_breaks(f.f, options);
    const Breaks b1 = sign_breaks(f.df, options);
    const Breaks b2 = sign_breaks(f.d2f, options);
    const bool resolved = bf.resolved && b1.resolved && b2.resolved;

    const double norm_m = weighted_abs(f.f, m, bf);
    const double norm_1 = weighted_abs(f.f, 1.0, bf);
    const double norm_2 = weighted_abs(f.d2f, 1.0, b2);
    const double df_l1 = weighted_abs(f.df, 0.0, b1);

    InterpolationReport rep;
    rep.m = m;
    rep.product_form = upper_bound(
        "interpolation[" + f.name + "]", norm_m,
        C * std::pow(norm_2, (1.0 - m) / 2.0) * std::pow(norm_1, (m + 1.0) / 2.0), resolved);
    for (double eps : {0.5, 1.0, 2.0}) {
        rep.epsilon_forms.push_back(upper_bound(
            "interpolation-eps[" + f.name + "]", norm_m,
            std::pow(eps, m + 1.0) / (m + 1.0) * norm_2 + std::pow(eps, m - 1.0) * norm_1, resolved));
    }

    double sup_f = 0.0;
    double sup_xdf = 0.0;
    const std::size_t grid = 4000;
    for (std::size_t k = 1; k <= grid; ++k) {
        const double x = options.x_max * static_cast<double>(k) / grid;
        sup_f = std::max(sup_f, std::abs(f.f(x)));
        sup_xdf = std::max(sup_xdf, x * std::abs(f.df(x)));
    }
    rep.pointwise.push_back(upper_bound("sup|f|", sup_f, norm_2, resolved));
    rep.pointwise.push_back(upper_bound("sup x|f'|", sup_xdf, norm_2, resolved));
    rep.pointwise.push_back(upper_bound("|f'|_L1", df_l1, norm_2, resolved));
    return rep;
}

SampleCheckReport check_kernel_positivity(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, 10.0);
    std::uniform_real_distribution<double> ux(0.0, 40.0);
    SampleCheckReport rep;
    rep.name = "kernel_positivity";
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < count; ++k) {
        const double t = 10.0 - ut(rng);  // (0, 10]
        const double x = 40.0 - ux(rng);
        const double y = 40.0 - ux(rng);
        const double d = kernel_value(t, x - y) - kernel_value(t, x + y);
        ++rep.samples;
        rep.worst_margin = std::min(rep.worst_margin, d);
        if (d < 0.0) {
            ++rep.violations;
        }
    }
    return rep;
}

SampleCheckReport check_monotone_kernel(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, 10.0);
    std::uniform_real_distribution<double> ux(0.0, 40.0);
    SampleCheckReport rep;
    rep.name = "monotone_kernel";
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < count; ++k) {
        const double t = 10.0 - ut(rng);
        const double x = 40.0 - ux(rng);
        const double y = 40.0 - ux(rng);
        const double zm = x - y;
        const double zp = x + y;
        const double lhs = (1.0 + zm * zm / (4.0 * t)) * kernel_value(t, zm);
        const double rhs = (1.0 + zp * zp / (4.0 * t)) * kernel_value(t, zp);
        const double rel = lhs > 0.0 ? (lhs - rhs) / lhs : 0.0;
        ++rep.samples;
        rep.worst_margin = std::min(rep.worst_margin, rel);
        if (lhs < rhs * (1.0 - 1e-14)) {
            ++rep.violations;
        }
    }
    return rep;
}

SampleCheckReport check_strict_domination(const OperatorBundle& bundle, double m,
                                          std::span<const State> states, double tolerance) {
    if (!(tolerance >= 0.0)) {
        throw DomainError("strict domination tolerance must be >= 0");
    }
    const double delta = delta_m(bundle.kernel(), m);
    const Mesh& mesh = bundle.mesh();
    const auto x = mesh.centers();
    const auto w = mesh.widths();
    const auto a = bundle.death();
    SampleCheckReport rep;
    rep.name = "strict_domination";
    rep.worst_margin = std::numeric_limits<double>::infinity();
    std::vector<double> births(bundle.size());
    for (const State& s : states) {
        if (s.size() != bundle.size()) {
            throw DomainError("strict domination: state and operator sizes differ");
        }
        bundle.birth().apply(s.values(), births);
        double lhs = 0.0;
        double rhs = 0.0;
        for (std::size_t i = 0; i < births.size(); ++i) {
            const double xm = std::pow(x[i], m) * w[i];
            lhs += xm * std::abs(births[i]);
            rhs += xm * a[i] * std::abs(s[i]);
        }
        rhs *= 1.0 - delta;
        ++rep.samples;
        const double rel = rhs > 0.0 ? (rhs - lhs) / rhs : 0.0;
        rep.worst_margin = std::min(rep.worst_margin, rel);
        if (lhs > rhs * (1.0 + tolerance)) {
            ++rep.violations;
        }
    }
    return rep;
}

SampleCheckReport check_growth_bound(std::span<const State> states, double m,
                                     std::span<const double> times) {
    const double omega = growth(m);
    SampleCheckReport rep;
    rep.name = "heat_growth_bound";
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const State& f : states) {
        const double n0 = weighted_norm(f, m);
        for (double t : times) {
            const double nt = weighted_norm(heat_apply_exact(f, t), m);
            const double bound = std::exp(omega * t) * n0;
            ++rep.samples;
            const double rel = bound > 0.0 ? (bound - nt) / bound : 0.0;
            rep.worst_margin = std::min(rep.worst_margin, rel);
            if (nt > bound * (1.0 + 1e-12)) {
                ++rep.violations;
            }
        }
    }
    return rep;
}

MiyaderaReport check_miyadera(const OperatorBundle& bundle, std::span<const State> samples,
                              double m, const MiyaderaOptions& options) {
    if (!(m > 1.0)) {
        throw DomainError("Miyadera check needs m > 1");
    }
    if (!(options.dt > 0.0) || options.probe_times.empty()) {
        throw DomainError("Miyadera check needs dt > 0 and at least one probe time");
    }
    std::vector<std::size_t> probe_steps;
    for (double t : options.probe_times) {
        const auto k = static_cast<std::size_t>(std::llround(t / options.dt));
        if (k == 0 || (!probe_steps.empty() && k <= probe_steps.back())) {
            throw DomainError("Miyadera probe times must increase and exceed dt");
        }
        probe_steps.push_back(k);
    }

    MiyaderaReport rep;
    rep.m = m;
    try {
        rep.delta_m = delta_m(bundle.kernel(), m);
    } catch (const AdmissibilityError&) {
        rep.delta_m.reset();
    }
    const OperatorBundle absorption = bundle.without_birth();
    const Stepper stepper(absorption, options.dt, Scheme::imex_euler);
    const BirthOperator& observer = bundle.birth();
    std::vector<double> births(bundle.size());
    auto observed = [&](const State& s) {
        observer.apply(s.values(), births);
        return weighted_norm(bundle.mesh(), births, m);
    };

    rep.passed = true;
    for (const State& f : samples) {
        const double norm0 = weighted_norm(f, m);
        if (!(norm0 > 0.0)) {
            throw DomainError("Miyadera samples must be nonzero");
        }
        MiyaderaCurve curve;
        State F = f;
        double g_prev = observed(F);
        double integral = 0.0;
        std::size_t step = 0;
        for (std::size_t k : probe_steps) {
            for (; step < k; ++step) {
                F = stepper.advance(F);
                const double g = observed(F);
                integral += 0.5 * options.dt * (g_prev + g);
                g_prev = g;
            }
            const double ratio = integral / norm0;
            curve.t.push_back(static_cast<double>(k) * options.dt);
            curve.ratio.push_back(ratio);
            if (ratio < 1.0) {
                curve.t_m = curve.t.back();
                curve.q_m = ratio;
            }
        }
        curve.final_ratio = curve.ratio.back();
        curve.weak = curve.final_ratio > 0.95;
        rep.flagged = rep.flagged || curve.weak;
        rep.passed = rep.passed && curve.t_m.has_value();
        rep.curves.push_back(std::move(curve));
    }
    if (!rep.delta_m || *rep.delta_m < 0.05) {
        rep.flagged = true;
    }
    if (!rep.passed) {
        rep.diagnostic = "ratio >= 1 at every probed t for rate " + bundle.rate().describe() +
                         " and kernel " + bundle.kernel().describe();
    } else if (rep.flagged) {
        rep.diagnostic = "weak contraction: ratio approaches 1 for kernel " +
                         bundle.kernel().describe();
    }
    return rep;
}

}  // namespace fragdiff
