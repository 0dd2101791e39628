#include "kyle/market_maker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kyle {

RegressionStats RegressionStats::from_moments(const Moments& m, double sigma_v) {
    RegressionStats st;
    st.mf = m.mean_flow;
    st.ms = m.mean_sign;
    st.mz = m.mean_innovation;
    st.ff = m.l2;
    st.fs = m.l1;
    st.fz = m.mu;
    st.ss = 1.0;
    st.sz = m.kappa;
    st.zz = sigma_v * sigma_v;
    st.abs_f = m.l1;
    return st;
}

RegressionStats RegressionStats::from_samples(std::span<const double> flow,
                                              std::span<const double> v, double p0) {
    if (flow.size() != v.size() || flow.empty())
        throw std::invalid_argument("regression stats: flow and v must be non-empty and equal length");
    const std::size_t n = flow.size();
    std::vector<double> buf(n);
    auto mean_of = [&](auto term) {
        for (std::size_t i = 0; i < n; ++i) buf[i] = term(flow[i], sign0(flow[i]), v[i] - p0);
        return ordered_sum(buf) / static_cast<double>(n);
    };
    RegressionStats st;
    st.mf = mean_of([](double f, double, double) { return f; });
    st.ms = mean_of([](double, double s, double) { return s; });
    st.mz = mean_of([](double, double, double z) { return z; });
    st.ff = mean_of([](double f, double, double) { return f * f; });
    st.fs = mean_of([](double f, double s, double) { return f * s; });
    st.fz = mean_of([](double f, double, double z) { return f * z; });
    st.ss = mean_of([](double, double s, double) { return s * s; });
    st.sz = mean_of([](double, double s, double z) { return s * z; });
    st.zz = mean_of([](double, double, double z) { return z * z; });
    st.abs_f = mean_of([](double f, double, double) { return std::abs(f); });
    return st;
}

double RegressionStats::loss(double lambda, double theta, double bias, double gamma) const {
    return zz + bias * bias + lambda * lambda * ff + theta * theta * ss - 2.0 * bias * mz -
           2.0 * lambda * fz - 2.0 * theta * sz + 2.0 * bias * lambda * mf +
           2.0 * bias * theta * ms + 2.0 * lambda * theta * fs - gamma * theta * abs_f;
}

MMObjective mm_cost(const PriceRule& rule, const ModelParams& params, const Moments& m) {
    const RegressionStats st = RegressionStats::from_moments(m, params.price.sigma_v);
    MMObjective out;
    out.efficiency_term = st.loss(rule.lambda, rule.theta, rule.bias, 0.0);
    out.revenue_term = params.gamma * rule.theta * m.l1;
    out.cost = out.efficiency_term - out.revenue_term;
    return out;
}

MMObjective mm_cost_mc(const PriceRule& rule, const ModelParams& params, std::size_t n,
                       std::uint64_t seed) {
    params.validate();
    const std::vector<double> v = sample(params.price, n, seed);
    const std::vector<double> u = sample(params.noise, n, stream_seed(seed, 1));
    std::vector<double> x(n);
    const InsiderSolver solver(rule, params.noise);
    if (best_response_batch(solver, v, x).unbounded > 0)
        throw std::domain_error("mm_cost_mc: insider response unbounded for this rule");
    std::vector<double> sq(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = x[i] + u[i];
        const double e = v[i] - rule.evaluate(f);
        sq[i] = e * e;
        ab[i] = std::abs(f);
    }
    MMObjective out;
    out.efficiency_term = ordered_sum(sq) / static_cast<double>(n);
    out.revenue_term = params.gamma * rule.theta * ordered_sum(ab) / static_cast<double>(n);
    out.cost = out.efficiency_term - out.revenue_term;
    return out;
}

MMGradient mm_gradient(const Moments& m, double lambda, double theta, double gamma) {
    return {-2.0 * m.mu + 2.0 * lambda * m.l2 + 2.0 * theta * m.l1,
            -2.0 * m.kappa + 2.0 * lambda * m.l1 + 2.0 * theta - gamma * m.l1};
}

MMSolution mm_fit_normal_equations(const RegressionStats& st, double gamma, bool fit_bias) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("market maker: gamma must be nonnegative");
    double a11 = st.ff, a12 = st.fs, a22 = st.ss, r1 = st.fz, r2 = st.sz;
    if (fit_bias) {
        a11 -= st.mf * st.mf;
        a12 -= st.mf * st.ms;
        a22 -= st.ms * st.ms;
        r1 -= st.mf * st.mz;
        r2 -= st.ms * st.mz;
    }
    r2 += 0.5 * gamma * st.abs_f;
    if (!std::isfinite(a11 + a12 + a22 + r1 + r2))
        throw std::domain_error("market maker: non-finite statistics");

    // q(λ, θ) = pᵀAp - 2rᵀp, the objective up to a constant.
    auto q = [&](double l, double t) {
        return a11 * l * l + 2.0 * a12 * l * t + a22 * t * t - 2.0 * r1 * l - 2.0 * r2 * t;
    };

    MMSolution sol;
    sol.determinant = a11 * a22 - a12 * a12;
    sol.singular = !(sol.determinant > 1e-14 * std::max(1.0, a11 * a22));
    if (!sol.singular) {
        sol.raw_lambda = (a22 * r1 - a12 * r2) / sol.determinant;
        sol.raw_theta = (a11 * r2 - a12 * r1) / sol.determinant;
    } else {
        sol.raw_lambda = sol.raw_theta = -1.0;
    }

    if (!sol.singular && sol.raw_lambda >= 0.0 && sol.raw_theta >= 0.0) {
        sol.lambda = sol.raw_lambda;
        sol.theta = sol.raw_theta;
        sol.face = MMFace::Interior;
    } else {
        const double t0 = a22 > 0.0 ? std::max(0.0, r2 / a22) : 0.0;
        const double l0 = a11 > 0.0 ? std::max(0.0, r1 / a11) : 0.0;
        if (q(0.0, t0) <= q(l0, 0.0)) {
            sol.lambda = 0.0;
            sol.theta = t0;
            sol.face = MMFace::LambdaZero;
        } else {
            sol.lambda = l0;
            sol.theta = 0.0;
            sol.face = MMFace::ThetaZero;
        }
    }
    sol.bias = fit_bias ? st.mz - sol.lambda * st.mf - sol.theta * st.ms : 0.0;
    return sol;
}

MMSolution mm_best_response(const Moments& m, double gamma) {
    return mm_fit_normal_equations(RegressionStats::from_moments(m, 1.0), gamma, false);
}

MMSolution mm_best_response_centered(const Moments& m, double gamma) {
    return mm_fit_normal_equations(RegressionStats::from_moments(m, 1.0), gamma, true);
}

double suggested_learning_rate(std::span<const double> flow) {
    if (flow.empty()) throw std::invalid_argument("suggested_learning_rate: no samples");
    std::vector<double> sq(flow.size());
    for (std::size_t i = 0; i < flow.size(); ++i) sq[i] = flow[i] * flow[i];
    const double ff = ordered_sum(sq) / static_cast<double>(flow.size());
    // Trace of the Hessian 2[[ff, fs, mf], [fs, ss, ms], [mf, ms, 1]] bounds its top eigenvalue.
    return 1.0 / (2.0 * (ff + 2.0));
}

GradientFit mm_fit_gradient(std::span<const double> flow, std::span<const double> v, double gamma,
                            const PriceRule& init, double lr, std::size_t epochs, double step_tol) {
    if (flow.size() < 2) throw std::invalid_argument("mm_fit_gradient: need samples");
    if (!(lr > 0.0)) throw std::invalid_argument("mm_fit_gradient: lr must be positive");
    init.validate();
    // The loss is quadratic in (λ, θ, b); its gradient over the full batch is
    // a linear map of these sample averages.
    const RegressionStats st = RegressionStats::from_samples(flow, v, init.p0);

    GradientFit fit;
    fit.learning_rate = lr;
    double l = init.lambda, t = init.theta, b = init.bias;
    double prev = st.loss(l, t, b, gamma);
    int rising = 0;
    for (std::size_t e = 0; e < epochs; ++e) {
        const double gl = 2.0 * (l * st.ff + t * st.fs + b * st.mf - st.fz);
        const double gt = 2.0 * (l * st.fs + t * st.ss + b * st.ms - st.sz) - gamma * st.abs_f;
        const double gb = 2.0 * (l * st.mf + t * st.ms + b - st.mz);
        const double nl = std::max(0.0, l - lr * gl);
        const double nt = std::max(0.0, t - lr * gt);
        const double nb = b - lr * gb;
        const double step = std::max({std::abs(nl - l), std::abs(nt - t), std::abs(nb - b)});
        l = nl;
        t = nt;
        b = nb;
        fit.epochs_run = e + 1;
        const double cur = st.loss(l, t, b, gamma);
        if (!std::isfinite(cur)) {
            fit.diverged = true;
            break;
        }
        rising = cur > prev ? rising + 1 : 0;
        prev = cur;
        if (rising >= 10) {
            fit.diverged = true;
            break;
        }
        if (step < step_tol) {
            fit.converged = true;
            break;
        }
    }
    fit.rule = PriceRule{l, t, b, init.p0};
    fit.final_loss = prev;
    return fit;
}

}  // namespace kyle
