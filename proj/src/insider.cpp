#include "kyle/insider.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace kyle {

std::string to_string(Branch b) {
    switch (b) {
        case Branch::AtZero: return "zero";
        case Branch::UniformCaseI: return "uniform_i";
        case Branch::UniformCaseII: return "uniform_ii";
        case Branch::GaussianUniqueRoot: return "gaussian_unique";
        case Branch::GaussianThreeRoots: return "gaussian_three";
        case Branch::NumericGrid: return "numeric";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BestResponse mirrored(BestResponse r, double sign) {
    r.x_star *= sign;
    return r;
}

BestResponse unbounded_response(double sign) {
    BestResponse r;
    r.x_star = sign * kInf;
    r.payoff = kInf;
    r.unbounded = true;
    return r;
}

void check_rule(const PriceRule& rule) {
    rule.validate();
    if (rule.lambda == 0.0 && rule.theta == 0.0)
        throw std::invalid_argument("insider: rule with lambda = theta = 0 has no best response");
}

// φ(t)(t² - 2): zero at √2, peak 2φ(2) at t = 2, decays to 0.
double crit_map(double t) { return std_normal_pdf(t) * (t * t - 2.0); }

double bisect_crit(double target, double lo, double hi, bool increasing) {
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const bool below = crit_map(mid) < target;
        if (below == increasing) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Uniform

BestResponse best_response_uniform(const PriceRule& rule, const NoiseLaw& noise, double v) {
    if (!noise.is_uniform()) throw std::invalid_argument("best_response_uniform: noise not uniform");
    return InsiderSolver(rule, noise).solve(v);
}

// ---------------------------------------------------------------------------
// Gaussian

GaussianResponder::GaussianResponder(const PriceRule& rule, double sigma, double tol)
    : lambda_(rule.lambda), theta_(rule.theta), sigma_(sigma), tol_(tol) {
    check_rule(rule);
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian responder: sigma must be positive");
    if (theta_ == 0.0) return;
    const double r = lambda_ * sigma_ / theta_;
    const double peak = crit_map(2.0);
    if (r >= peak) return;
    crit_[0] = sigma_ * bisect_crit(r, std::numbers::sqrt2, 2.0, true);
    crit_count_ = 1;
    if (lambda_ > 0.0) {
        double hi = 4.0;
        while (crit_map(hi) > r) hi *= 2.0;
        crit_[1] = sigma_ * bisect_crit(r, 2.0, hi, false);
        crit_count_ = 2;
    }
}

double GaussianResponder::g(double x) const {
    const double t = x / sigma_;
    return 2.0 * lambda_ * x - 2.0 * theta_ * std_normal_cdf(-t) + 2.0 * theta_ * t * std_normal_pdf(t);
}

double GaussianResponder::g_prime(double x) const {
    const double t = x / sigma_;
    return 2.0 * lambda_ + 2.0 * theta_ / sigma_ * std_normal_pdf(t) * (2.0 - t * t);
}

double GaussianResponder::payoff(double c, double x) const {
    if (x == 0.0) return 0.0;
    return -lambda_ * x * x + (c - theta_) * x + 2.0 * theta_ * x * std_normal_cdf(-x / sigma_);
}

double GaussianResponder::refine(double target, double lo, double hi, bool increasing) const {
    // Safeguarded Newton on a piece where g is monotone and brackets target.
    const double dir = increasing ? 1.0 : -1.0;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = dir * (g(x) - target);
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        const double d = dir * g_prime(x);
        double next = d > 0.0 ? x - f / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step <= tol_ * std::max(1.0, std::abs(x)) || hi - lo <= tol_ * std::max(1.0, std::abs(x)))
            return x;
    }
    std::ostringstream msg;
    msg << "gaussian best response: no convergence (lambda=" << lambda_ << ", theta=" << theta_
        << ", target=" << target << ", bracket=[" << lo << ", " << hi << "])";
    throw NumericFailure(msg.str());
}

BestResponse GaussianResponder::solve(double c) const {
    if (c == 0.0 || !std::isfinite(c)) {
        if (!std::isfinite(c)) throw std::invalid_argument("gaussian best response: non-finite v");
        BestResponse r;
        r.root_count = 1;
        return r;
    }
    const double sign = c > 0.0 ? 1.0 : -1.0;
    c = std::abs(c);
    const double target = c - theta_;

    if (theta_ == 0.0) {
        BestResponse r;
        r.x_star = c / (2.0 * lambda_);
        r.payoff = c * c / (4.0 * lambda_);
        r.branch = Branch::GaussianUniqueRoot;
        r.root_count = 1;
        return mirrored(r, sign);
    }

    if (crit_count_ == 0) {
        // g increasing from -θ, and g(x) >= 2λx - θ, so c/(2λ) brackets.
        BestResponse r;
        r.x_star = refine(target, 0.0, c / (2.0 * lambda_), true);
        r.payoff = payoff(c, r.x_star);
        r.branch = Branch::GaussianUniqueRoot;
        r.root_count = 1;
        return mirrored(r, sign);
    }

    const double xa = crit_[0];
    const double ga = g(xa);
    if (crit_count_ == 1) {
        // λ = 0: g rises to g(xa) > 0 then decays to 0 from above.
        if (c > theta_) return unbounded_response(sign);
        BestResponse r;
        r.x_star = refine(target, 0.0, xa, true);
        r.payoff = payoff(c, r.x_star);
        r.branch = Branch::GaussianUniqueRoot;
        r.root_count = 1;
        return mirrored(r, sign);
    }

    const double xb = crit_[1];
    const double gb = g(xb);
    const bool has1 = target <= ga;
    const bool has3 = target >= gb;
    BestResponse r;
    r.root_count = static_cast<int>(has1) + static_cast<int>(has3) +
                   static_cast<int>(has1 && has3);
    if (has1 && !has3) {
        r.x_star = refine(target, 0.0, xa, true);
        r.branch = Branch::GaussianUniqueRoot;
    } else if (has3 && !has1) {
        r.x_star = refine(target, xb, std::max(xb, c / (2.0 * lambda_)), true);
        r.branch = Branch::GaussianUniqueRoot;
    } else {
        const double x1 = refine(target, 0.0, xa, true);
        const double x3 = refine(target, xb, std::max(xb, c / (2.0 * lambda_)), true);
        const double r1 = payoff(c, x1);
        const double r3 = payoff(c, x3);
        r.branch = Branch::GaussianThreeRoots;
        r.tie = (r1 == r3);
        r.x_star = (r3 > r1) ? x3 : x1;
    }
    r.payoff = payoff(c, r.x_star);
    return mirrored(r, sign);
}

BestResponse best_response_gaussian(const PriceRule& rule, const NoiseLaw& noise, double v,
                                    double tol) {
    if (!noise.is_gaussian())
        throw std::invalid_argument("best_response_gaussian: noise not gaussian");
    return GaussianResponder(rule, noise.scale(), tol).solve(v - rule.p0 - rule.bias);
}

BestResponse best_response(const PriceRule& rule, const NoiseLaw& noise, double v) {
    return InsiderSolver(rule, noise).solve(v);
}

// ---------------------------------------------------------------------------
// Dispatch

InsiderSolver::InsiderSolver(const PriceRule& rule, const NoiseLaw& noise)
    : rule_(rule), noise_(noise) {
    check_rule(rule);
    if (noise.is_gaussian()) {
        gauss_.emplace_back(rule, noise.scale());
    } else {
        const double h = noise.scale();
        a_ = rule.lambda + rule.theta / h;
        zbar_ = rule.lambda * h + rule.theta + h * std::sqrt(a_ * rule.lambda);
    }
}

BestResponse InsiderSolver::solve_innovation(double c) const {
    if (!std::isfinite(c)) throw std::invalid_argument("insider: non-finite v");
    if (!gauss_.empty()) return gauss_.front().solve(c);

    BestResponse r;
    r.root_count = 1;
    if (c == 0.0) return r;
    const double sign = c > 0.0 ? 1.0 : -1.0;
    c = std::abs(c);
    if (c <= zbar_) {
        r.x_star = c / (2.0 * a_);
        r.payoff = c * c / (4.0 * a_);
        r.branch = Branch::UniformCaseI;
    } else {
        if (rule_.lambda == 0.0) return unbounded_response(sign);
        const double d = c - rule_.theta;
        r.x_star = d / (2.0 * rule_.lambda);
        r.payoff = d * d / (4.0 * rule_.lambda);
        r.branch = Branch::UniformCaseII;
    }
    return mirrored(r, sign);
}

// ---------------------------------------------------------------------------
// Polynomial rules

std::vector<double> antithetic_noise(const NoiseLaw& noise, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("antithetic_noise: n must be at least 1");
    const std::size_t half = (n + 1) / 2;
    std::vector<double> u = sample(noise, half, seed);
    u.reserve(2 * half);
    for (std::size_t i = 0; i < half; ++i) u.push_back(-u[i]);
    return u;
}

NumericResponder::NumericResponder(const PolyPriceRule& rule, std::vector<double> noise_draws,
                                   double max_innovation, std::size_t grid_points)
    : rule_(rule), noise_(std::move(noise_draws)) {
    rule_.validate();
    for (double c : rule_.odd_coeffs)
        if (c < 0.0) throw std::invalid_argument("numeric responder: coefficients must be nonnegative");
    if (noise_.empty()) throw std::invalid_argument("numeric responder: no noise draws");
    if (grid_points < 3) throw std::invalid_argument("numeric responder: grid too small");
    const double cmax = std::abs(max_innovation);
    // mean_price is nondecreasing; beyond the first x with m(x) >= |c| the
    // payoff is negative, so that x bounds the search.
    x_max_ = 1.0;
    while (mean_price(x_max_) < cmax) {
        x_max_ *= 2.0;
        if (x_max_ > 1e8) {
            bound_found_ = false;
            break;
        }
    }
    grid_x_.resize(grid_points);
    grid_m_.resize(grid_points);
    const double step = x_max_ / static_cast<double>(grid_points - 1);
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(grid_points); ++k) {
        grid_x_[k] = step * static_cast<double>(k);
        grid_m_[k] = mean_price(grid_x_[k]);
    }
}

double NumericResponder::mean_price(double x) const {
    double s = 0.0;
    for (double u : noise_) {
        const double y = x + u;
        s += rule_.polynomial(y) + rule_.theta * sign0(y);
    }
    return s / static_cast<double>(noise_.size());
}

double NumericResponder::payoff(double v, double x) const {
    return ((v - rule_.p0) - mean_price(x)) * x;
}

BestResponse NumericResponder::solve(double v) const {
    const double c0 = v - rule_.p0;
    if (!std::isfinite(c0)) throw std::invalid_argument("numeric responder: non-finite v");
    BestResponse r;
    r.branch = Branch::NumericGrid;
    r.root_count = 1;
    if (c0 == 0.0) {
        r.branch = Branch::AtZero;
        return r;
    }
    const double sign = c0 > 0.0 ? 1.0 : -1.0;
    const double c = std::abs(c0);
    if (!bound_found_ && c > grid_m_.back()) return unbounded_response(sign);

    // Payoff is odd-symmetric; for c > 0 any x < 0 is dominated by -x.
    std::size_t best = 0;
    double best_val = 0.0;
    for (std::size_t k = 1; k < grid_x_.size(); ++k) {
        const double val = (c - grid_m_[k]) * grid_x_[k];
        if (val > best_val) {
            best_val = val;
            best = k;
        }
    }
    double lo, hi;
    if (c > grid_m_.back()) {
        // Innovation beyond the range the grid was built for: widen directly.
        double x = x_max_;
        while (mean_price(x) < c) x *= 2.0;
        lo = 0.0;
        hi = x;
        const int n = 256;
        double bx = 0.0, bv = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double xk = hi * k / n;
            const double val = (c - mean_price(xk)) * xk;
            if (val > bv) { bv = val; bx = xk; }
        }
        if (bv <= 0.0) {
            r.branch = Branch::AtZero;
            return r;
        }
        lo = std::max(0.0, bx - hi / n);
        hi = bx + hi / n;
    } else {
        if (best == 0) {
            r.branch = Branch::AtZero;
            return r;
        }
        lo = grid_x_[best - 1];
        hi = grid_x_[std::min(best + 1, grid_x_.size() - 1)];
    }

    const double invphi = 1.0 / std::numbers::phi;
    auto f = [&](double x) { return (c - mean_price(x)) * x; };
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80 && b - a > 1e-12 * std::max(1.0, b); ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a); f1 = f(x1);
        }
    }
    double x = 0.5 * (a + b);
    double fx = f(x);
    // Keep the better of the refined point and the grid point.
    if (best > 0 && best_val > fx && c <= grid_m_.back()) {
        x = grid_x_[best];
        fx = best_val;
    }
    if (fx <= 0.0) {
        r.branch = Branch::AtZero;
        return r;
    }
    r.x_star = sign * x;
    r.payoff = fx;
    return r;
}

BestResponse best_response_numeric(const PolyPriceRule& rule, const ModelParams& params, double v,
                                   std::size_t mc_n, std::uint64_t seed) {
    params.validate();
    NumericResponder solver(rule, antithetic_noise(params.noise, mc_n, seed), v - rule.p0);
    return solver.solve(v);
}

}  // namespace kyle
