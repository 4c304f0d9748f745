#include "fragdiff/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "fragdiff/coefficients.hpp"
#include "fragdiff/errors.hpp"
#include "fragdiff/linear_system.hpp"

namespace fragdiff {

std::string HypothesisCheck::describe() const {
    std::string out;
    auto add = [&](bool ok, const char* name) {
        if (!ok) {
            out += out.empty() ? "" : ", ";
            out += name;
        }
    };
    add(rate_positive, "rate not strictly positive");
    add(contraction, "no second-moment contraction");
    add(rate_diverges, "rate bounded at infinity");
    return out.empty() ? "all hypotheses hold" : out;
}

HypothesisCheck check_hypotheses(const OperatorBundle& bundle) {
    HypothesisCheck h;
    const auto a = bundle.death();
    h.rate_positive = std::all_of(a.begin(), a.end(), [](double v) { return v > 0.0; });
    try {
        h.contraction = delta_m(bundle.kernel(), 2.0) > 0.0;
    } catch (const AdmissibilityError&) {
        h.contraction = false;
    }
    h.rate_diverges = bundle.rate().diverges();
    return h;
}

namespace {

void normalise(const Mesh& mesh, std::vector<double>& v) {
    double m1 = moment(mesh, v, 1.0);
    if (std::abs(m1) < 1e-300) {
        const auto it = std::max_element(v.begin(), v.end(),
                                         [](double p, double q) { return std::abs(p) < std::abs(q); });
        m1 = *it;
    }
    for (double& x : v) {
        x /= m1;
    }
}

}  // namespace

EigenPair dominant_eigenpair(const OperatorBundle& bundle, const DominantOptions& options) {
    const std::size_t n = bundle.size();
    const Mesh& mesh = bundle.mesh();
    const GeneratorSystem system(bundle, {-options.shift, 1.0, std::nullopt, false});

    std::vector<double> v(n, 1.0);
    normalise(mesh, v);
    int iterations = 0;
    bool converged = false;
    for (int it = 1; it <= options.max_iterations; ++it) {
        std::vector<double> w = system.solve(v);
        normalise(mesh, w);
        std::vector<double> diff(n);
        for (std::size_t i = 0; i < n; ++i) {
            diff[i] = w[i] - v[i];
        }
        const double change = x1_norm(mesh, diff) / x1_norm(mesh, w);
        v = std::move(w);
        iterations = it;
        if (change <= options.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw NumericalError("dominant eigenpair: inverse iteration did not converge in " +
                             std::to_string(options.max_iterations) + " iterations");
    }
    std::vector<double> av(n);
    apply_generator(bundle, v, av);
    const double num = std::inner_product(v.begin(), v.end(), av.begin(), 0.0);
    const double den = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
    return EigenPair{num / den, State(bundle.mesh_ptr(), std::move(v)), iterations,
                     check_hypotheses(bundle)};
}

GapReport spectral_gap(const OperatorBundle& bundle, int k, const GapOptions& options,
                       const std::optional<State>& dominant) {
    const std::size_t n = bundle.size();
    if (k < 1 || static_cast<std::size_t>(k) + 2 > n) {
        throw DomainError("spectral gap: k must lie in [1, N-2]");
    }
    if (!(options.shift > 0.0)) {
        throw DomainError("spectral gap: shift must be positive");
    }
    GapReport report;
    report.shift = options.shift;
    report.hypotheses = check_hypotheses(bundle);

    Eigen::VectorXd psi(static_cast<Eigen::Index>(n));
    {
        const State p = dominant ? *dominant : dominant_eigenpair(bundle).psi;
        for (std::size_t i = 0; i < n; ++i) {
            psi(static_cast<Eigen::Index>(i)) = p[i];
        }
    }
    Eigen::VectorXd mass(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        mass(static_cast<Eigen::Index>(i)) = bundle.mesh().mass_weights()[i];
    }
    const double vpsi = mass.dot(psi);
    if (!(std::abs(vpsi) > 0.0)) {
        throw NumericalError("spectral gap: dominant vector has zero mass");
    }
    auto project = [&](Eigen::VectorXd& x) { x -= psi * (mass.dot(x) / vpsi); };

    const GeneratorSystem system(bundle, {-options.shift, 1.0, std::nullopt, false});
    auto op = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd y = x;
        project(y);
        std::vector<double> r(y.data(), y.data() + y.size());
        const std::vector<double> s = system.solve(r);
        Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(s.data(), y.size());
        project(z);
        return z;
    };

    const int m = std::min<int>(options.krylov_dim, static_cast<int>(n) - 1);
    if (m < k + 1) {
        throw DomainError("spectral gap: Krylov dimension too small for k");
    }
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    Eigen::VectorXd start(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < start.size(); ++i) {
        start(i) = unif(rng);
    }
    project(start);

    const auto rows = static_cast<Eigen::Index>(n);
    for (int restart = 0; restart <= options.max_restarts; ++restart) {
        report.restarts = restart;
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(rows, m + 1);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
        V.col(0) = start / start.norm();
        int dim = m;
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd w = op(V.col(j));
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd h = V.leftCols(j + 1).transpose() * w;
                w -= V.leftCols(j + 1) * h;
                H.col(j).head(j + 1) += h;
            }
            const double beta = w.norm();
            H(j + 1, j) = beta;
            if (beta < 1e-14 * H.col(j).head(j + 1).norm()) {
                dim = j + 1;
                break;
            }
            V.col(j + 1) = w / beta;
        }

        Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(dim, dim));
        if (es.info() != Eigen::Success) {
            throw NumericalError("spectral gap: Hessenberg eigensolve failed");
        }
        const Eigen::VectorXcd theta = es.eigenvalues();
        const Eigen::MatrixXcd Y = es.eigenvectors();
        std::vector<int> order(static_cast<std::size_t>(dim));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int p, int q) { return std::abs(theta(p)) > std::abs(theta(q)); });

        const double beta_last = dim < m ? 0.0 : H(m, m - 1);
        report.eigenvalues.clear();
        report.residuals.clear();
        bool ok = true;
        Eigen::VectorXd next = Eigen::VectorXd::Zero(rows);
        const int take = std::min(k, dim);
        for (int r = 0; r < take; ++r) {
            const int idx = order[static_cast<std::size_t>(r)];
            const std::complex<double> th = theta(idx);
            const Eigen::VectorXcd y = Y.col(idx) / Y.col(idx).norm();
            const double res = std::abs(beta_last * y(dim - 1)) / std::abs(th);
            report.residuals.push_back(res);
            report.eigenvalues.push_back(options.shift + 1.0 / th);
            ok = ok && res <= options.tolerance;
            next += (V.leftCols(dim) * y).real();
        }
        if (ok || take < k) {
            report.converged = ok;
            break;
        }
        if (next.norm() == 0.0) {
            break;
        }
        start = next;
        project(start);
    }

    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& l : report.eigenvalues) {
        max_re = std::max(max_re, l.real());
    }
    report.epsilon_hat = -max_re;
    report.violation = !(report.epsilon_hat > 0.0);
    return report;
}

std::string to_string(FitStatus status) {
    switch (status) {
        case FitStatus::ok:
            return "ok";
        case FitStatus::not_applicable:
            return "not_applicable";
        case FitStatus::no_decay:
            return "no_decay";
    }
    return "unknown";
}

DecayFit decay_rate(std::span<const double> t, std::span<const double> distance, double floor) {
    if (t.size() != distance.size()) {
        throw DomainError("decay fit: time and distance columns differ in length");
    }
    DecayFit fit;
    if (t.empty()) {
        fit.diagnostic = "empty trajectory";
        return fit;
    }
    const double d0 = distance[0];
    if (!(d0 > floor)) {
        fit.status = FitStatus::not_applicable;
        fit.diagnostic = "initial distance is at the equilibrium floor";
        return fit;
    }
    const double hi = 1e-2 * d0;
    const double lo = 1e-10 * d0;
    std::vector<double> ts;
    std::vector<double> ls;
    bool entered = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = distance[i];
        if (!entered && d <= hi) {
            entered = true;
        }
        if (!entered) {
            continue;
        }
        if (d < lo || !(d > 0.0)) {
            break;
        }
        if (d <= hi) {
            ts.push_back(t[i]);
            ls.push_back(std::log(d));
        }
    }
    fit.points = ts.size();
    if (ts.size() < 3) {
        fit.diagnostic = "distance does not decay through the fit window";
        return fit;
    }
    const double n = static_cast<double>(ts.size());
    const double tm = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
    const double lm = std::accumulate(ls.begin(), ls.end(), 0.0) / n;
    double stt = 0.0;
    double stl = 0.0;
    double sll = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - tm) * (ts[i] - tm);
        stl += (ts[i] - tm) * (ls[i] - lm);
        sll += (ls[i] - lm) * (ls[i] - lm);
    }
    if (!(stt > 0.0)) {
        fit.diagnostic = "fit window has zero time extent";
        return fit;
    }
    const double slope = stl / stt;
    fit.t_begin = ts.front();
    fit.t_end = ts.back();
    fit.nu_hat = -slope;
    fit.r_squared = sll > 0.0 ? (stl * stl) / (stt * sll) : 1.0;
    if (!(slope < 0.0)) {
        fit.diagnostic = "log distance is not decreasing";
        return fit;
    }
    fit.status = FitStatus::ok;
    return fit;
}

DecayFit decay_rate(const Trajectory& trajectory) {
    std::vector<double> t;
    std::vector<double> d;
    t.reserve(trajectory.records.size());
    d.reserve(trajectory.records.size());
    for (const auto& r : trajectory.records) {
        if (std::isnan(r.dist_ref_x1)) {
            throw DomainError("decay fit needs a trajectory recorded against a reference state");
        }
        t.push_back(r.t);
        d.push_back(r.dist_ref_x1);
    }
    const double floor = trajectory.records.empty() ? 0.0
                                                    : 1e-6 * std::abs(trajectory.records[0].m1);
    return decay_rate(t, d, floor);
}

std::vector<double> smallest_singular_values(const OperatorBundle& bundle, std::size_t count) {
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(bundle.dense());
    const Eigen::VectorXd s = svd.singularValues();  // descending
    std::vector<double> out;
    for (Eigen::Index i = s.size() - 1; i >= 0 && out.size() < count; --i) {
        out.push_back(s(i));
    }
    return out;
}

}  // namespace fragdiff
