#pragma once

// Insider best response x*(v) against a spread pricing rule.
//
// With c = v - p0 - b the insider maximizes
//     R(x) = -λx² + (c - θ)x + 2θ x F_u(-x),
// whose stationarity condition is g(x) = c - θ for the v-independent map
//     g(x) = 2λx - 2θ F_u(-x) + 2θ x f_u(x).
// Solutions are odd in c, so all solvers work on c > 0 and mirror.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kyle/price_rule.hpp"

namespace kyle {

enum class Branch {
    AtZero,
    UniformCaseI,
    UniformCaseII,
    GaussianUniqueRoot,
    GaussianThreeRoots,
    NumericGrid,
};

std::string to_string(Branch b);

struct BestResponse {
    double x_star = 0.0;
    double payoff = 0.0;
    Branch branch = Branch::AtZero;
    /// Payoff unbounded above (λ = 0 and |c| > θ): x_star is ±infinity.
    bool unbounded = false;
    /// Number of stationary points of R on the half-line of sign(c).
    int root_count = 0;
    /// Two local maxima with bitwise-equal payoff; the smaller root is returned.
    bool tie = false;
};

/// Thrown when a root cannot be bracketed or refined.
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed-form response for uniform noise on [-h, h]:
///   x* = c / (2(λ + θ/h))   for 0 < c <= z̄,
///   x* = (c - θ) / (2λ)     for c > z̄,
/// with z̄ = λh + θ + h·sqrt((λ + θ/h)λ). Ties at c = z̄ go to the first branch.
BestResponse best_response_uniform(const PriceRule& rule, const NoiseLaw& noise, double v);

/// Root-classifying solver for Gaussian noise. The critical points of g are
/// computed once per rule; each call then brackets at most three roots on
/// monotone pieces of g and keeps the better of the outer two.
class GaussianResponder {
public:
    GaussianResponder(const PriceRule& rule, double sigma, double tol = 1e-12);

    /// Best response for innovation c = v - p0 - b.
    BestResponse solve(double c) const;

    double g(double x) const;
    double g_prime(double x) const;
    double payoff(double c, double x) const;

    /// Critical points of g on x > 0 (empty when g is monotone).
    std::span<const double> critical_points() const { return {crit_.data(), crit_count_}; }

private:
    double refine(double target, double lo, double hi, bool increasing) const;

    double lambda_, theta_, sigma_, tol_;
    std::array<double, 2> crit_{0.0, 0.0};
    std::size_t crit_count_ = 0;
};

BestResponse best_response_gaussian(const PriceRule& rule, const NoiseLaw& noise, double v,
                                    double tol = 1e-12);

/// Dispatches on the noise law.
BestResponse best_response(const PriceRule& rule, const NoiseLaw& noise, double v);

/// Maps innovations c = v - p0 - b to best responses for one rule. Holds the
/// per-rule precomputation so batch evaluation reuses it.
class InsiderSolver {
public:
    InsiderSolver(const PriceRule& rule, const NoiseLaw& noise);
    BestResponse solve_innovation(double c) const;
    BestResponse solve(double v) const { return solve_innovation(v - rule_.p0 - rule_.bias); }
    const PriceRule& rule() const { return rule_; }
    const NoiseLaw& noise() const { return noise_; }

private:
    PriceRule rule_;
    NoiseLaw noise_;
    double a_ = 0.0, zbar_ = 0.0;
    std::vector<GaussianResponder> gauss_;
};

/// Best response to a polynomial rule with the noise expectation replaced by
/// an average over fixed draws (antithetic pairs, so the payoff map is odd).
/// A coarse grid scan locates the maximizer, golden-section search refines it.
class NumericResponder {
public:
    NumericResponder(const PolyPriceRule& rule, std::vector<double> noise_draws,
                     double max_innovation, std::size_t grid_points = 2049);

    BestResponse solve(double v) const;
    /// Average of P(x + u_i) - p0 over the draws.
    double mean_price(double x) const;
    double payoff(double v, double x) const;
    double search_bound() const { return x_max_; }

private:
    PolyPriceRule rule_;
    std::vector<double> noise_;
    double x_max_ = 1.0;
    bool bound_found_ = true;
    std::vector<double> grid_x_, grid_m_;
};

/// Antithetic noise draws: n/2 samples (rounded up) and their negatives.
std::vector<double> antithetic_noise(const NoiseLaw& noise, std::size_t n, std::uint64_t seed);

BestResponse best_response_numeric(const PolyPriceRule& rule, const ModelParams& params, double v,
                                   std::size_t mc_n, std::uint64_t seed);

}  // namespace kyle
