// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kyle/io.hpp"
#include "kyle/parallel.hpp"

using namespace kyle;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ModelParams params_for(const NoiseLaw& noise, double gamma = 0.0) {
    ModelParams p;
    p.noise = noise;
    p.gamma = gamma;
    return p;
}

// R_v(x) from its definition, for the grid oracle.
double payoff_ref(const PriceRule& r, const NoiseLaw& noise, double v, double x) {
    double F;
    if (noise.is_gaussian()) F = 0.5 * std::erfc(x / (noise.scale() * std::numbers::sqrt2));
    else F = std::clamp((noise.scale() - x) / (2.0 * noise.scale()), 0.0, 1.0);
    return -r.lambda * x * x + (v - r.p0 - r.bias - r.theta) * x + 2.0 * r.theta * x * F;
}

void kyle_recovery() {
    const auto t0 = Clock::now();
    const ModelParams p = params_for(NoiseLaw::gaussian(1.0));
    EquilibriumConfig cfg;
    const auto mc = solve_equilibrium(p, PriceRule{1.0, 0.1, 0.0, 0.0}, cfg);
    const auto rec = solve_kyle_baseline(p, 2.0, 1e-13, 200);
    const double dt = seconds_since(t0);
    const bool ok = mc.converged && std::abs(mc.rule_star.lambda - 0.5) <= 0.01 && mc.rule_star.theta <= 1e-3 &&
                    rec.converged && std::abs(rec.rule_star.lambda - 0.5) <= 1e-9 && dt < 5.0;
    report(1, "Kyle recovery", ok,
           fmt("MC lambda=%.6f theta=%.2e, recursion |lambda-0.5|=%.1e, %.2fs", mc.rule_star.lambda,
               mc.rule_star.theta, std::abs(rec.rule_star.lambda - 0.5), dt));
}

void baseline_convergence() {
    const ModelParams p = params_for(NoiseLaw::gaussian(1.0));
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> d(0.0, 10.0);
    bool ok = true;
    std::size_t worst_steps = 0;
    double worst_err = 0.0;
    for (int t = 0; t < 20; ++t) {
        double l0 = d(rng);
        if (l0 == 0.0) l0 = 10.0;
        const auto rep = solve_kyle_baseline(p, l0, 1e-13, 200);
        // Distance to the fixed point never grows.
        for (std::size_t i = 1; i < rep.trajectory.size(); ++i)
            ok = ok && std::abs(rep.trajectory[i].lambda - 0.5) <= std::abs(rep.trajectory[i - 1].lambda - 0.5);
        std::size_t hit = 0;
        while (hit < rep.trajectory.size() && std::abs(rep.trajectory[hit].lambda - 0.5) > 1e-9) ++hit;
        ok = ok && hit < rep.trajectory.size() && hit <= 200;
        worst_steps = std::max(worst_steps, hit);
        worst_err = std::max(worst_err, std::abs(rep.rule_star.lambda - 0.5));
    }
    report(2, "Baseline convergence", ok,
           fmt("20 starts, max steps to 1e-9 = %zu, max final error %.1e", worst_steps, worst_err));
}

void insider_oracle() {
    const auto t0 = Clock::now();
    const int grid = 100000;
    bool ok = true;
    std::string detail;
    for (const auto& noise : {NoiseLaw::gaussian(1.0), NoiseLaw::uniform(1.0)}) {
        std::mt19937_64 rng(noise.is_gaussian() ? 31 : 32);
        std::uniform_real_distribution<double> lam(0.02, 2.0), th(0.0, 2.0), vv(-4.0, 4.0);
        int matched = 0, ties = 0, bad_roots = 0;
        for (int t = 0; t < 200; ++t) {
            const PriceRule r{lam(rng), th(rng), 0.0, 0.0};
            const double v = vv(rng);
            const auto br = best_response(r, noise, v);
            const double bound = (std::abs(v) + r.theta) / r.lambda + 1.0;
            const double step = 2.0 * bound / (grid - 1);
            double xg = -bound, best = payoff_ref(r, noise, v, xg);
            for (int i = 1; i < grid; ++i) {
                const double x = -bound + step * i;
                const double y = payoff_ref(r, noise, v, x);
                if (y > best) best = y, xg = x;
            }
            const double rx = payoff_ref(r, noise, v, br.x_star);
            if (std::abs(br.x_star - xg) <= step && rx >= best - 1e-12) {
                ++matched;
            } else if (rx >= best - 1e-12) {
                // Two near-equal maxima: the grid picked the other one, x* is no worse.
                ++matched;
                ++ties;
            }
            if (noise.is_gaussian() && v != 0.0 && br.root_count != 1 && br.root_count != 3) ++bad_roots;
        }
        ok = ok && matched == 200 && bad_roots == 0;
        detail += fmt("%s %d/200 matched (%d near-ties), bad root counts %d; ", noise.name().c_str(), matched, ties,
                      bad_roots);
    }
    const double dt = seconds_since(t0);
    ok = ok && dt < 60.0;
    report(3, "Insider oracle equivalence", ok, detail + fmt("%.1fs", dt));
}

void moments_cross_check() {
    const ModelParams p = params_for(NoiseLaw::uniform(1.0));
    int checked = 0, agree = 0;
    double worst = 0.0;
    for (double l : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (double q : {0.05, 0.25, 0.5, 0.75, 1.0}) {
            const PriceRule r{l, q, 0.0, 0.0};
            const auto quad = moments_quadrature(r, p);
            const auto mc = moments_mc(r, p, MomentOptions{1000000, 101, false, FlowEstimator::Conditional});
            const double a[4] = {quad.l1, quad.l2, quad.mu, quad.kappa};
            const double b[4] = {mc.l1, mc.l2, mc.mu, mc.kappa};
            for (int i = 0; i < 4; ++i) {
                const double se = std::hypot(quad.std_errors[i], mc.std_errors[i]);
                const double z = std::abs(a[i] - b[i]) / se;
                worst = std::max(worst, z);
                ++checked;
                if (z <= 3.0) ++agree;
            }
        }
    }
    report(4, "Moments cross-check", agree == checked,
           fmt("%d/%d moment comparisons within 3 SE, largest |diff|/SE = %.2f", agree, checked, worst));
}

struct SweepRun {
    SweepResult res;
    double seconds = 0.0;
};

SweepRun run_sweep(const NoiseLaw& noise) {
    const ModelParams p = params_for(noise);
    SweepConfig sc;
    std::vector<double> grid = make_grid(0.0, 2.0, 0.1);
    for (double g : make_grid(2.5, 24.0, 0.5)) grid.push_back(g);
    const auto t0 = Clock::now();
    SweepRun run{sweep(p, grid, sc), 0.0};
    run.seconds = seconds_since(t0);
    return run;
}

void foc_residuals(const SweepRun& gs, const SweepRun& us) {
    bool ok = true;
    int n = 0;
    double worst_z = 0.0, worst_b = 0.0;
    for (const SweepRun* run : {&gs, &us}) {
        const auto lbid = run->res.gamma_lbid();
        if (!lbid) {
            ok = false;
            continue;
        }
        for (std::size_t i = 0; i < run->res.points.size(); ++i) {
            const auto& rep = run->res.reports[i];
            if (run->res.points[i].gamma >= *lbid || !rep.converged) continue;
            ++n;
            const double zl = rep.foc_lambda / rep.se_lambda;
            const double zt = rep.foc_theta / rep.se_theta;
            // On a zero coordinate only the KKT sign condition applies.
            const bool l_ok = rep.rule_star.lambda > 0.0 ? std::abs(zl) <= 3.0 : zl >= -3.0;
            const bool t_ok = rep.rule_star.theta > 0.0 ? std::abs(zt) <= 3.0 : zt >= -3.0;
            worst_z = std::max({worst_z, rep.rule_star.lambda > 0.0 ? std::abs(zl) : -zl,
                                rep.rule_star.theta > 0.0 ? std::abs(zt) : -zt});
            worst_b = std::max(worst_b, std::abs(rep.rule_star.bias));
            ok = ok && l_ok && t_ok && std::abs(rep.rule_star.bias) <= 1e-3;
        }
    }
    report(5, "Equilibrium FOC residuals", ok && n > 0,
           fmt("%d converged points below gamma_LBid, worst residual %.2f SE, max |b| = %.1e", n, worst_z, worst_b));
}

void convergence_speed() {
    bool ok = true;
    std::string detail;
    for (const auto& noise : {NoiseLaw::gaussian(1.0), NoiseLaw::uniform(1.0)}) {
        const ModelParams p = params_for(noise, 0.5);
        EquilibriumConfig cfg;
        cfg.max_iter = 50;
        const PriceRule init{p.price.sigma_v / (2.0 * noise.std_dev()), 0.1, 0.0, 0.0};
        const auto rep = solve_equilibrium(p, init, cfg);
        ok = ok && rep.converged && rep.iterations <= 50;
        detail += fmt("%s %zu iterations (%s); ", noise.name().c_str(), rep.iterations,
                      to_string(rep.termination).c_str());
    }
    report(6, "Convergence speed at gamma=0.5", ok, detail);
}

void phase_boundaries(const SweepRun& gs, const SweepRun& us) {
    const auto gl = gs.res.gamma_lbid(), gb = gs.res.gamma_bid();
    const auto ul = us.res.gamma_lbid(), ub = us.res.gamma_bid();
    const bool ok = gl && gb && ul && ub && std::abs(*gl - 0.7) <= 0.3 && std::abs(*gb - 10.0) <= 3.0 &&
                    std::abs(*ul - 1.0) <= 0.4 && std::abs(*ub - 16.0) <= 4.0 && gs.seconds < 600.0 &&
                    us.seconds < 600.0;
    auto val = [](const std::optional<double>& x) { return x ? *x : NAN; };
    report(7, "Phase boundaries", ok,
           fmt("gaussian LBid=%.3f Bid=%.3f (%.0fs), uniform LBid=%.3f Bid=%.3f (%.0fs)", val(gl), val(gb),
               gs.seconds, val(ul), val(ub), us.seconds));
}

void metastable_point() {
    bool ok = true;
    double prev = 0.0, worst_h = 0.0, min_margin = 1e300;
    for (int g = 11; g <= 20; ++g) {
        const auto st = metastability_check(g, 0.9, 200, 500 + g);
        const auto& pt = st.point;
        worst_h = std::max(worst_h, std::abs(pt.h_residual));
        const double margin = (st.fraction - (pt.escape_prob_bound - 3.0 * st.binomial_se));
        min_margin = std::min(min_margin, margin);
        ok = ok && std::abs(pt.h_residual) <= 1e-10 && pt.theta_star > prev && pt.partial_lambda_C > 0.0 &&
             margin >= 0.0;
        prev = pt.theta_star;
    }
    const auto lo = metastable_theta(11.0), hi = metastable_theta(20.0);
    report(8, "Metastable point", ok,
           fmt("theta* %.4f..%.4f, max |H| = %.1e, min stay-fraction margin over bound = %.1e", lo.theta_star, hi.theta_star,
               worst_h, min_margin));
}

void comparative_statics(const SweepRun& gs, const SweepRun& us) {
    bool ok = true;
    std::string detail;
    for (const SweepRun* run : {&gs, &us}) {
        const auto& pts = run->res.points;
        const auto& reps = run->res.reports;
        const ModelParams p = params_for(run == &gs ? NoiseLaw::gaussian(1.0) : NoiseLaw::uniform(1.0));
        // Seed-replicate spread of (λ*, θ*) at each point in the phase.
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (pts[i].phase == Phase::LinearWithSpread) idx.push_back(i);
        std::vector<double> se_l(idx.size()), se_t(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            std::vector<double> ls{pts[idx[k]].lambda_star}, ts{pts[idx[k]].theta_star};
            for (std::uint64_t seed = 2; seed <= 5; ++seed) {
                SweepConfig sc;
                sc.eq.seed = seed;
                const auto pt = solve_point(p, pts[idx[k]].gamma, sc, &reps[idx[k]].rule_star);
                if (pt.termination != Termination::Converged) continue;
                ls.push_back(pt.lambda_star);
                ts.push_back(pt.theta_star);
            }
            auto sd = [](const std::vector<double>& x) {
                double m = 0.0, s = 0.0;
                for (double t : x) m += t;
                m /= x.size();
                for (double t : x) s += (t - m) * (t - m);
                return x.size() > 1 ? std::sqrt(s / (x.size() - 1)) : 0.0;
            };
            se_l[k] = sd(ls);
            se_t[k] = sd(ts);
        }
        int viol = 0;
        for (std::size_t k = 1; k < idx.size(); ++k) {
            const auto& a = pts[idx[k - 1]];
            const auto& b = pts[idx[k]];
            if (b.lambda_star - a.lambda_star > 2.0 * std::hypot(se_l[k], se_l[k - 1])) ++viol;
            if (a.theta_star - b.theta_star > 2.0 * std::hypot(se_t[k], se_t[k - 1])) ++viol;
        }
        ok = ok && idx.size() >= 2 && viol == 0;
        detail += fmt("%s %zu points, %d violations; ", run == &gs ? "gaussian" : "uniform", idx.size(), viol);
    }
    report(9, "Monotone comparative statics", ok, detail);
}

void sign_gap() {
    const std::size_t n = 1000000;
    const double s = 1.0;
    const auto a = sign_gap_mc(s, NoiseLaw::gaussian(s), n, 61);
    bool ok = a.value >= -3.0 * a.std_error;
    std::string detail = fmt("gaussian %.2e (SE %.1e)", a.value, a.std_error);
    for (double k : {1.0, 1.5, 2.0}) {
        const auto b = sign_gap_mc(s, NoiseLaw::uniform(k * std::sqrt(3.0) * s), n, 62 + static_cast<int>(2 * k));
        ok = ok && b.value >= -3.0 * b.std_error;
        if (k == 2.0) ok = ok && b.value > 3.0 * b.std_error;
        detail += fmt(", uniform b=%.1f*sqrt3 %.4f (SE %.1e)", k, b.value, b.std_error);
    }
    report(10, "Sign-gap inequality", ok, detail);
}

void polynomial_collapse() {
    const ModelParams p = params_for(NoiseLaw::uniform(1.0), 0.5);
    EquilibriumConfig cfg;
    const auto ref = solve_equilibrium(p, PriceRule{0.8, 0.1, 0.0, 0.0}, cfg);
    bool ok = ref.converged;
    std::string detail = fmt("P-class (%.4f, %.4f); ", ref.rule_star.lambda, ref.rule_star.theta);
    for (int degree : {3, 5, 7}) {
        PolyConfig pc;
        pc.fit = PolyFit::Gradient;
        const auto rep = solve_poly_equilibrium(p, degree, pc);
        const auto& c = rep.final_rule.odd_coeffs;
        double higher = 0.0;
        for (std::size_t i = 1; i < c.size(); ++i) higher = std::max(higher, c[i]);
        const bool near = std::abs(c[0] - ref.rule_star.lambda) <= 5e-2 &&
                          std::abs(rep.final_rule.theta - ref.rule_star.theta) <= 5e-2;
        ok = ok && rep.converged && higher < 1e-2 && near;
        detail += fmt("deg %d: lambda1=%.4f theta=%.4f max higher=%.4f (%s); ", degree, c[0], rep.final_rule.theta,
                      higher, to_string(rep.termination).c_str());
    }
    report(11, "Polynomial collapse", ok, detail);
}

void gradient_vs_closed_form() {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    double worst = 0.0;
    bool ok = true;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2000;
        const double slope = pick(rng), spread = pick(rng) - 0.2, gamma = pick(rng);
        std::vector<double> flow(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            flow[i] = 1.5 * z(rng);
            v[i] = slope * flow[i] + spread * (flow[i] > 0 ? 1.0 : -1.0) + 0.7 * z(rng);
        }
        const auto exact = mm_fit_normal_equations(RegressionStats::from_samples(flow, v, 0.0), gamma);
        const auto gd = mm_fit_gradient(flow, v, gamma, PriceRule{0.5, 0.1, 0.0, 0.0},
                                        suggested_learning_rate(flow), 500000);
        const double d = std::max({std::abs(gd.rule.lambda - exact.lambda), std::abs(gd.rule.theta - exact.theta),
                                   std::abs(gd.rule.bias - exact.bias)});
        worst = std::max(worst, d);
        ok = ok && !gd.diverged && d <= 1e-4;
    }
    report(12, "Gradient vs closed form", ok, fmt("20 datasets, max parameter difference %.1e", worst));
}

}  // namespace

int main() {
    apply_thread_env();
    kyle_recovery();
    baseline_convergence();
    insider_oracle();
    moments_cross_check();
    const SweepRun gs = run_sweep(NoiseLaw::gaussian(1.0));
    const SweepRun us = run_sweep(NoiseLaw::uniform(1.0));
    foc_residuals(gs, us);
    convergence_speed();
    phase_boundaries(gs, us);
    metastable_point();
    comparative_statics(gs, us);
    sign_gap();
    polynomial_collapse();
    gradient_vs_closed_form();
    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
