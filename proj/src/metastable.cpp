#include "kyle/metastable.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kyle {

namespace {

constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

void check_theta(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::invalid_argument("metastable: theta must be positive");
}

}  // namespace

double h_function(double theta, double gamma) {
    check_theta(theta);
    if (!(gamma >= 0.0)) throw std::invalid_argument("metastable: gamma must be nonnegative");
    const double e = std::erf(theta * std::numbers::sqrt2);
    const double tail = std::exp(-2.0 * theta * theta) * kInvSqrt2Pi / theta;
    return -e / theta - 0.5 * gamma * (e * (1.0 + 0.25 / (theta * theta)) + tail) + 2.0 * theta;
}

double metastable_partial_lambda(double theta) {
    check_theta(theta);
    const double e = std::erf(theta * std::numbers::sqrt2);
    return -1.0 / theta + e * (theta + 0.25 / theta) + std::exp(-2.0 * theta * theta) * kInvSqrt2Pi;
}

Moments metastable_moments(double theta) {
    check_theta(theta);
    const double e = std::erf(theta * std::numbers::sqrt2);
    Moments m;
    m.mu = 0.5 / theta;
    m.kappa = 0.5 * e / theta;
    m.l2 = 0.25 / (theta * theta) + 1.0 / 3.0;
    m.l1 = 0.5 * (std::exp(-2.0 * theta * theta) * kInvSqrt2Pi / theta +
                  e * (1.0 + 0.25 / (theta * theta)));
    return m;
}

MetastablePoint metastable_theta(double gamma, double tol) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("metastable: gamma must be nonnegative");
    double lo = 1e-6, hi = 1.0;
    if (h_function(lo, gamma) >= 0.0) throw std::runtime_error("metastable: H(1e-6) is not negative");
    int grow = 0;
    while (h_function(hi, gamma) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 60) throw std::runtime_error("metastable: failed to bracket the root of H");
    }
    MetastablePoint pt;
    pt.gamma = gamma;
    int it = 0;
    while (hi - lo > tol * hi && it < 200) {
        const double mid = 0.5 * (lo + hi);
        if (h_function(mid, gamma) < 0.0) lo = mid; else hi = mid;
        ++it;
    }
    const double hl = h_function(lo, gamma), hh = h_function(hi, gamma);
    pt.theta_star = std::abs(hl) <= std::abs(hh) ? lo : hi;
    pt.h_residual = std::abs(hl) <= std::abs(hh) ? hl : hh;
    pt.iterations = it;
    pt.partial_lambda_C = metastable_partial_lambda(pt.theta_star);
    pt.escape_prob_bound = std::erf(pt.theta_star / std::numbers::sqrt2);
    return pt;
}

StayReport metastability_check(double gamma, double alpha, std::size_t n_trials, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("metastability: alpha in (0, 1)");
    if (n_trials == 0) throw std::invalid_argument("metastability: n_trials must be positive");
    StayReport rep;
    rep.point = metastable_theta(gamma);
    rep.alpha = alpha;
    rep.trials = n_trials;
    const double ts = rep.point.theta_star;

    const MMSolution mm = mm_best_response(metastable_moments(ts), gamma);
    rep.market_maker_stays = mm.lambda == 0.0 && std::abs(mm.theta - ts) <= 1e-8 * std::max(1.0, ts);

    const ModelParams params{NoiseLaw::uniform(1.0), PriceLaw{0.0, 1.0}, gamma};
    const InsiderSolver solver(PriceRule{0.0, ts, 0.0, 0.0}, params.noise);
    std::size_t stays = 0;
#pragma omp parallel for schedule(static) reduction(+ : stays)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_trials); ++i) {
        const double v = sample(params.price, 1, chunk_seed(seed, static_cast<std::uint64_t>(i)))[0];
        const BestResponse r = solver.solve(v);
        const bool insider_stays =
            !r.unbounded && std::abs(r.x_star - v / (2.0 * ts)) <= 1e-12 * std::max(1.0, std::abs(r.x_star));
        stays += (insider_stays && rep.market_maker_stays) ? 1 : 0;
    }
    rep.stays = stays;
    const double n = static_cast<double>(n_trials);
    rep.fraction = static_cast<double>(stays) / n;
    const double p = rep.point.escape_prob_bound;
    rep.binomial_se = std::sqrt(p * (1.0 - p) / n);
    rep.exceeds_alpha = rep.fraction > alpha;
    return rep;
}

}  // namespace kyle
