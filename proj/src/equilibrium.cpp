#include "kyle/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kyle {

std::string to_string(Phase p) {
    switch (p) {
        case Phase::KyleLinear: return "kyle_linear";
        case Phase::LinearWithSpread: return "linear_with_spread";
        case Phase::SpreadOnly: return "spread_only";
        case Phase::NoEquilibrium: return "no_equilibrium";
    }
    return "unknown";
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::MaxIter: return "max_iter";
        case Termination::Oscillation: return "oscillation";
        case Termination::UnboundedResponse: return "unbounded_response";
        case Termination::NumericFailure: return "numeric_failure";
    }
    return "unknown";
}

std::string to_string(MomentBackend b) { return b == MomentBackend::MC ? "mc" : "quadrature"; }

Phase parse_phase(const std::string& s) {
    for (Phase p : {Phase::KyleLinear, Phase::LinearWithSpread, Phase::SpreadOnly, Phase::NoEquilibrium})
        if (to_string(p) == s) return p;
    throw std::invalid_argument("unknown phase '" + s + "'");
}

Termination parse_termination(const std::string& s) {
    for (Termination t : {Termination::Converged, Termination::MaxIter, Termination::Oscillation,
                          Termination::UnboundedResponse, Termination::NumericFailure})
        if (to_string(t) == s) return t;
    throw std::invalid_argument("unknown termination '" + s + "'");
}

MomentBackend parse_backend(const std::string& s) {
    if (s == "mc") return MomentBackend::MC;
    if (s == "quadrature") return MomentBackend::Quadrature;
    throw std::invalid_argument("unknown moment backend '" + s + "'");
}

void EquilibriumConfig::validate() const {
    if (n_mc < 2) throw std::invalid_argument("equilibrium: n_mc must be at least 2");
    if (!(tol > 0.0)) throw std::invalid_argument("equilibrium: tol must be positive");
    if (max_iter == 0) throw std::invalid_argument("equilibrium: max_iter must be positive");
    if (!(damping > 0.0 && damping <= 1.0) || !(fallback_damping > 0.0 && fallback_damping <= 1.0))
        throw std::invalid_argument("equilibrium: damping must lie in (0, 1]");
    if (!(theta_eps >= 0.0) || !(lambda_eps >= 0.0))
        throw std::invalid_argument("equilibrium: phase thresholds must be nonnegative");
    if (max_period < 2 || cycle_window <= max_period)
        throw std::invalid_argument("equilibrium: cycle window must exceed the maximal period");
}

Phase classify_phase(const PriceRule& rule, const EquilibriumConfig& cfg) {
    if (rule.theta < cfg.theta_eps) return Phase::KyleLinear;
    if (rule.lambda < cfg.lambda_eps) return Phase::SpreadOnly;
    return Phase::LinearWithSpread;
}

bool detect_cycle(const std::vector<TrajectoryPoint>& traj, std::size_t window,
                  std::size_t max_period, double tol) {
    if (traj.size() < window + max_period) return false;
    auto dist = [&](std::size_t i, std::size_t j) {
        return std::max(std::abs(traj[i].lambda - traj[j].lambda),
                        std::abs(traj[i].theta - traj[j].theta));
    };
    const std::size_t end = traj.size();
    double moving = 0.0;
    for (std::size_t k = end - window; k < end; ++k) moving = std::max(moving, dist(k, k - 1));
    if (moving <= tol) return false;
    for (std::size_t p = 2; p <= max_period; ++p) {
        bool cyc = true;
        for (std::size_t k = end - window; k < end && cyc; ++k) cyc = dist(k, k - p) < tol;
        if (cyc) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Verification

VerifyReport verify_equilibrium(const PriceRule& rule, const ModelParams& params,
                                const VerifyOptions& opt) {
    params.validate();
    rule.validate();
    VerifyReport rep;
    const std::vector<double> v = sample(params.price, opt.n_mc, opt.seed);
    std::vector<double> x(v.size()), pay(v.size());
    if (opt.strategy) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            x[i] = opt.strategy(v[i]);
            pay[i] = insider_payoff(rule, params.noise, v[i], x[i]);
            rep.unbounded += !std::isfinite(x[i]);
        }
    } else {
        const InsiderSolver solver(rule, params.noise);
        rep.unbounded = best_response_batch(solver, v, x, pay).unbounded;
    }
    if (rep.unbounded > 0) return rep;

    rep.moments = finalize_moments(accumulate_moments(v, x, params.price.p0, params.noise, opt.flow,
                                                      stream_seed(opt.seed, 1)));
    const Moments& m = rep.moments;
    const double l = rule.lambda, t = rule.theta, b = rule.bias, g = params.gamma;

    StatVector wl{}, wt{};
    wl[kStatOrderInnov] = -2.0;
    wl[kStatSqFlow] = 2.0 * l;
    wl[kStatAbsFlow] = 2.0 * t;
    wl[kStatFlow] = 2.0 * b;
    wt[kStatSignInnov] = -2.0;
    wt[kStatAbsFlow] = 2.0 * l - g;
    wt[kStatSign] = 2.0 * b;
    rep.foc_lambda = -2.0 * m.mu + 2.0 * l * m.l2 + 2.0 * t * m.l1 + 2.0 * b * m.mean_flow;
    rep.foc_theta = -2.0 * m.kappa + (2.0 * l - g) * m.l1 + 2.0 * t + 2.0 * b * m.mean_sign;
    rep.se_lambda = m.se_of(wl);
    rep.se_theta = m.se_of(wt);
    if (opt.fit_moments) {
        rep.se_lambda = std::hypot(rep.se_lambda, opt.fit_moments->se_of(wl));
        rep.se_theta = std::hypot(rep.se_theta, opt.fit_moments->se_of(wt));
    }
    const double k = opt.n_se;
    rep.lambda_ok = l > 0.0 ? std::abs(rep.foc_lambda) <= k * rep.se_lambda
                            : rep.foc_lambda >= -k * rep.se_lambda;
    rep.theta_ok = t > 0.0 ? std::abs(rep.foc_theta) <= k * rep.se_theta
                           : rep.foc_theta >= -k * rep.se_theta;

    std::vector<double> ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ax[i] = std::abs(x[i]);
    const double dn = static_cast<double>(v.size());
    rep.expected_profit = ordered_sum(pay) / dn;
    rep.expected_order = ordered_sum(ax) / dn;

    if (!opt.strategy && opt.optimality_quantiles > 0) {
        const InsiderSolver solver(rule, params.noise);
        const std::size_t q = opt.optimality_quantiles;
        constexpr int kGrid = 20001;
        for (std::size_t j = 0; j < q; ++j) {
            const double p = (static_cast<double>(j) + 0.5) / static_cast<double>(q);
            const double vj = params.price.p0 + params.price.sigma_v * std_normal_quantile(p);
            const BestResponse r = solver.solve(vj);
            if (r.unbounded) continue;
            const double span = 3.0 * std::max(1.0, std::abs(r.x_star));
            double best = 0.0;
            for (int i = 0; i < kGrid; ++i) {
                const double xg = -span + 2.0 * span * i / (kGrid - 1);
                best = std::max(best, insider_payoff(rule, params.noise, vj, xg));
            }
            const double gap = best - r.payoff;
            rep.insider_gap = std::max(rep.insider_gap, gap);
            if (gap > 1e-9 * std::max(1.0, std::abs(r.payoff))) rep.insider_ok = false;
        }
    }
    rep.passed = rep.lambda_ok && rep.theta_ok && rep.insider_ok;
    return rep;
}

VerifyReport verify_equilibrium(const PriceRule& rule, const ModelParams& params, std::size_t n_mc,
                                std::uint64_t seed) {
    VerifyOptions opt;
    opt.n_mc = n_mc;
    opt.seed = seed;
    return verify_equilibrium(rule, params, opt);
}

// ---------------------------------------------------------------------------
// Kyle baseline

EquilibriumReport solve_kyle_baseline(const ModelParams& params, double lambda0, double tol,
                                      std::size_t max_iter) {
    params.validate();
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
        throw std::invalid_argument("kyle baseline: lambda0 must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("kyle baseline: tol must be positive");
    const double sv2 = params.price.sigma_v * params.price.sigma_v;
    const double su2 = params.noise.variance();

    EquilibriumReport rep;
    rep.termination = Termination::MaxIter;
    double lam = lambda0;
    rep.trajectory.push_back({lam, 0.0, 0.0});
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const double next = 2.0 * lam * sv2 / (sv2 + 4.0 * lam * lam * su2);
        rep.trajectory.push_back({next, 0.0, 0.0});
        rep.iterations = it;
        const double delta = std::abs(next - lam);
        lam = next;
        if (delta < tol) {
            rep.converged = true;
            rep.termination = Termination::Converged;
            break;
        }
    }
    rep.rule_star = PriceRule{lam, 0.0, 0.0, params.price.p0};
    rep.phase = rep.converged ? Phase::KyleLinear : Phase::NoEquilibrium;
    // x*(v) = (v - p0)/(2λ): closed-form moments.
    rep.moments.mu = sv2 / (2.0 * lam);
    rep.moments.l2 = sv2 / (4.0 * lam * lam) + su2;
    rep.expected_profit = sv2 / (4.0 * lam);
    rep.expected_order = params.price.sigma_v * std::sqrt(2.0 / std::numbers::pi) / (2.0 * lam);
    rep.mm_cost = sv2 - 2.0 * lam * rep.moments.mu + lam * lam * rep.moments.l2;
    rep.foc_lambda = -2.0 * rep.moments.mu + 2.0 * lam * rep.moments.l2;
    rep.verified = rep.converged;
    return rep;
}

EquilibriumReport solve_kyle_baseline_mc(const ModelParams& params, double lambda0,
                                         EquilibriumConfig cfg) {
    if (!(lambda0 > 0.0)) throw std::invalid_argument("kyle baseline: lambda0 must be positive");
    cfg.linear_only = true;
    return solve_equilibrium(params, PriceRule{lambda0, 0.0, 0.0, params.price.p0}, cfg);
}

// ---------------------------------------------------------------------------
// Driver

namespace {

MMSolution fit_rule(const Moments& m, const ModelParams& params, const EquilibriumConfig& cfg) {
    const RegressionStats st = RegressionStats::from_moments(m, params.price.sigma_v);
    if (!cfg.linear_only) return mm_fit_normal_equations(st, params.gamma, cfg.fit_bias);
    MMSolution sol;
    double vf = st.ff, cfz = st.fz;
    if (cfg.fit_bias) {
        vf -= st.mf * st.mf;
        cfz -= st.mf * st.mz;
    }
    sol.raw_lambda = cfz / vf;
    sol.lambda = std::max(0.0, sol.raw_lambda);
    sol.face = MMFace::ThetaZero;
    sol.bias = cfg.fit_bias ? st.mz - sol.lambda * st.mf : 0.0;
    return sol;
}

void check_quadrature(const ModelParams& params) {
    if (!params.noise.is_uniform() || params.noise.scale() != 1.0 || params.price.sigma_v != 1.0)
        throw std::invalid_argument(
            "quadrature backend requires uniform noise on [-1, 1] and sigma_v = 1");
}

}  // namespace

EquilibriumReport solve_equilibrium(const ModelParams& params, const PriceRule& init,
                                    const EquilibriumConfig& cfg) {
    params.validate();
    cfg.validate();
    init.validate();
    const bool quad = cfg.backend == MomentBackend::Quadrature;
    if (quad) check_quadrature(params);

    const double p0 = params.price.p0;
    PriceRule rule = init;
    rule.p0 = p0;
    if (quad) rule.bias = 0.0;

    const std::vector<double> v = cfg.stratified ? sample_stratified(params.price, cfg.n_mc, cfg.seed)
                                                 : sample(params.price, cfg.n_mc, cfg.seed);
    std::vector<double> x(v.size()), pay(v.size());
    const std::uint64_t u_seed = stream_seed(cfg.seed, 1);

    EquilibriumReport rep;
    rep.trajectory.push_back({rule.lambda, rule.theta, rule.bias});
    double alpha = cfg.damping;
    std::size_t cycle_from = 0;

    // Moments of the insider's response to `r` on the common sample.
    auto moments_at = [&](const PriceRule& r, Termination& why) -> bool {
        if (r.lambda == 0.0 && r.theta == 0.0) {
            why = Termination::UnboundedResponse;
            return false;
        }
        try {
            if (quad) {
                if (!(r.lambda > 0.0)) {
                    why = Termination::UnboundedResponse;
                    return false;
                }
                rep.moments = moments_quadrature(r, params);
                return true;
            }
            const InsiderSolver solver(r, params.noise);
            if (best_response_batch(solver, v, x, pay).unbounded > 0) {
                why = Termination::UnboundedResponse;
                return false;
            }
            rep.moments = finalize_moments(accumulate_moments(v, x, p0, params.noise, cfg.flow, u_seed));
            return true;
        } catch (const NumericFailure& e) {
            rep.message = e.what();
            why = Termination::NumericFailure;
            return false;
        }
    };

    rep.termination = Termination::MaxIter;
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        Termination why{};
        if (!moments_at(rule, why)) {
            rep.termination = why;
            break;
        }
        const MMSolution sol = fit_rule(rep.moments, params, cfg);
        PriceRule next = rule;
        next.lambda = (1.0 - alpha) * rule.lambda + alpha * sol.lambda;
        next.theta = (1.0 - alpha) * rule.theta + alpha * sol.theta;
        next.bias = (1.0 - alpha) * rule.bias + alpha * sol.bias;
        const double delta = std::max({std::abs(next.lambda - rule.lambda),
                                       std::abs(next.theta - rule.theta),
                                       std::abs(next.bias - rule.bias)});
        rule = next;
        rep.trajectory.push_back({rule.lambda, rule.theta, rule.bias});
        rep.iterations = it;
        if (delta < cfg.tol) {
            rep.converged = true;
            rep.termination = Termination::Converged;
            break;
        }
        const std::vector<TrajectoryPoint> tail(rep.trajectory.begin() + static_cast<std::ptrdiff_t>(cycle_from),
                                                rep.trajectory.end());
        if (detect_cycle(tail, cfg.cycle_window, cfg.max_period, cfg.cycle_tol)) {
            if (alpha != cfg.fallback_damping) {
                alpha = cfg.fallback_damping;
                cycle_from = rep.trajectory.size() - 1;
            } else {
                rep.termination = Termination::Oscillation;
                break;
            }
        }
    }
    rep.damping_used = alpha;
    rep.rule_star = rule;
    rep.bias = rule.bias;
    rep.phase = rep.converged ? classify_phase(rule, cfg) : Phase::NoEquilibrium;
    if (!rep.converged) return rep;

    // Endpoint statistics at the final rule.
    Termination why{};
    if (!moments_at(rule, why)) {
        rep.converged = false;
        rep.termination = why;
        rep.phase = Phase::NoEquilibrium;
        return rep;
    }
    if (quad) {
        const InsiderSolver solver(rule, params.noise);
        best_response_batch(solver, v, x, pay);
    }
    std::vector<double> ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ax[i] = std::abs(x[i]);
    rep.expected_profit = ordered_sum(pay) / static_cast<double>(v.size());
    rep.expected_order = ordered_sum(ax) / static_cast<double>(v.size());
    const MMObjective obj = mm_cost(rule, params, rep.moments);
    rep.mm_cost = obj.cost;
    rep.revenue_term = obj.revenue_term;
    const MMGradient grad = mm_gradient(rep.moments, rule.lambda, rule.theta, params.gamma);
    rep.foc_lambda = grad.d_lambda;
    rep.foc_theta = grad.d_theta;

    if (cfg.verify_n > 0) {
        VerifyOptions vo;
        vo.n_mc = cfg.verify_n;
        vo.seed = stream_seed(cfg.seed, 7);
        vo.flow = cfg.flow;
        if (!quad) vo.fit_moments = &rep.moments;
        const VerifyReport vr = verify_equilibrium(rule, params, vo);
        if (vr.unbounded == 0) {
            rep.foc_lambda = vr.foc_lambda;
            rep.foc_theta = vr.foc_theta;
            rep.se_lambda = vr.se_lambda;
            rep.se_theta = vr.se_theta;
        } else {
            rep.message = "verification sample produced unbounded insider orders";
        }
        rep.verified = vr.passed;
    }
    return rep;
}

}  // namespace kyle
