#include "kyle/phase_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kyle {

std::optional<PhaseBoundary> SweepResult::find(Phase below, Phase above) const {
    for (const auto& b : boundaries)
        if (b.below == below && b.above == above) return b;
    return std::nullopt;
}

std::optional<double> SweepResult::gamma_lbid() const {
    for (const auto& b : boundaries)
        if (b.below == Phase::LinearWithSpread && b.above == Phase::NoEquilibrium) return b.estimate();
    return std::nullopt;
}

std::optional<double> SweepResult::gamma_bid() const {
    for (const auto& b : boundaries)
        if (b.above == Phase::SpreadOnly && b.below != Phase::SpreadOnly) return b.estimate();
    return std::nullopt;
}

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(step > 0.0) || hi < lo)
        throw std::invalid_argument("grid: need lo <= hi and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + static_cast<double>(i) * step;
    return g;
}

namespace {

PriceRule cold_rule(const ModelParams& params, const SweepConfig& cfg) {
    PriceRule r = cfg.cold_init;
    if (!(r.lambda > 0.0)) r.lambda = params.price.sigma_v / (2.0 * params.noise.std_dev());
    r.bias = 0.0;
    r.p0 = params.price.p0;
    return r;
}

PhasePoint to_point(double gamma, const EquilibriumReport& rep, bool warm) {
    PhasePoint p;
    p.gamma = gamma;
    p.phase = rep.phase;
    p.lambda_star = rep.rule_star.lambda;
    p.theta_star = rep.rule_star.theta;
    p.bias = rep.rule_star.bias;
    p.expected_order = rep.expected_order;
    p.expected_profit = rep.expected_profit;
    p.mm_value = rep.mm_cost;
    p.revenue_term = rep.revenue_term;
    p.n_iterations = rep.iterations;
    p.termination = rep.termination;
    p.warm_started = warm;
    return p;
}

}  // namespace

PhasePoint solve_point(const ModelParams& params, double gamma, const SweepConfig& cfg,
                       const PriceRule* warm, EquilibriumReport* report_out) {
    ModelParams p = params;
    p.gamma = gamma;
    EquilibriumReport rep;
    bool used_warm = false;
    if (warm && cfg.warm_start) {
        PriceRule init = *warm;
        init.bias = 0.0;
        // A zero coordinate is absorbing for some phases; nudge it off the boundary.
        if (init.theta == 0.0) init.theta = std::max(cfg.eq.theta_eps, 1e-3);
        if (init.lambda == 0.0) init.lambda = std::max(cfg.eq.lambda_eps, 1e-3);
        rep = solve_equilibrium(p, init, cfg.eq);
        used_warm = true;
    }
    if (!used_warm || !rep.converged) {
        rep = solve_equilibrium(p, cold_rule(params, cfg), cfg.eq);
        used_warm = false;
    }
    if (report_out) *report_out = rep;
    return to_point(gamma, rep, used_warm);
}

SweepResult sweep(const ModelParams& params, const std::vector<double>& gamma_grid,
                  const SweepConfig& cfg) {
    params.validate();
    cfg.eq.validate();
    if (gamma_grid.empty()) throw std::invalid_argument("sweep: empty grid");
    for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
        if (!(gamma_grid[i] >= 0.0)) throw std::invalid_argument("sweep: grid values must be nonnegative");
        if (i > 0 && !(gamma_grid[i] > gamma_grid[i - 1]))
            throw std::invalid_argument("sweep: grid must be strictly increasing");
    }

    SweepResult res;
    std::optional<PriceRule> last;
    std::vector<std::optional<PriceRule>> rules;
    for (double g : gamma_grid) {
        EquilibriumReport rep;
        const PhasePoint pt = solve_point(params, g, cfg, last ? &*last : nullptr, &rep);
        res.points.push_back(pt);
        res.reports.push_back(rep);
        if (rep.converged) {
            last = rep.rule_star;
            rules.emplace_back(rep.rule_star);
        } else {
            rules.emplace_back(std::nullopt);
        }
    }

    const std::size_t n = res.points.size();
    const std::size_t checks = std::min(cfg.cold_checks, n);
    for (std::size_t c = 0; c < checks; ++c) {
        const std::size_t i = checks == 1 ? 0 : c * (n - 1) / (checks - 1);
        SweepConfig cold = cfg;
        cold.warm_start = false;
        const PhasePoint pc = solve_point(params, res.points[i].gamma, cold, nullptr);
        res.cold_checks.push_back({res.points[i].gamma, res.points[i].phase, pc.phase});
    }

    for (std::size_t i = 1; i < res.points.size(); ++i) {
        const PhasePoint& a = res.points[i - 1];
        const PhasePoint& b = res.points[i];
        if (a.phase == b.phase) continue;
        PhaseBoundary bd;
        bd.below = a.phase;
        bd.above = b.phase;
        bd.gamma_lo = bd.refined_lo = a.gamma;
        bd.gamma_hi = bd.refined_hi = b.gamma;
        std::optional<PriceRule> lo_rule = rules[i - 1];
        std::optional<PriceRule> hi_rule = rules[i];
        for (int s = 0; s < cfg.refine_steps; ++s) {
            const double mid = 0.5 * (bd.refined_lo + bd.refined_hi);
            // Continue from whichever side converged.
            const PriceRule* warm = lo_rule ? &*lo_rule : (hi_rule ? &*hi_rule : nullptr);
            EquilibriumReport rep;
            const PhasePoint pm = solve_point(params, mid, cfg, warm, &rep);
            if (pm.phase == bd.below) {
                bd.refined_lo = mid;
                if (rep.converged) lo_rule = rep.rule_star;
            } else {
                bd.refined_hi = mid;
                if (rep.converged) hi_rule = rep.rule_star;
            }
        }
        res.boundaries.push_back(bd);
    }
    return res;
}

std::vector<CurvePoint> insider_curves(const ModelParams& params, const PriceRule& rule,
                                       const std::vector<double>& v_grid, std::size_t n_mc,
                                       std::uint64_t seed) {
    params.validate();
    std::vector<double> u = sample(params.noise, n_mc, seed);
    std::sort(u.begin(), u.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(u.size() - 1);
        const auto k = static_cast<std::size_t>(std::floor(pos));
        const double w = pos - static_cast<double>(k);
        return k + 1 < u.size() ? (1.0 - w) * u[k] + w * u[k + 1] : u[k];
    };
    const double q05 = quantile(0.05), q95 = quantile(0.95);
    const InsiderSolver solver(rule, params.noise);
    std::vector<CurvePoint> out;
    out.reserve(v_grid.size());
    for (double v : v_grid) {
        const BestResponse r = solver.solve(v);
        out.push_back({v, r.x_star, r.payoff, r.x_star + q05, r.x_star + q95});
    }
    return out;
}

}  // namespace kyle
