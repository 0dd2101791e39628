#pragma once

// Spread-only state for large γ (uniform noise on [-1, 1], standard normal v).
// With λ = 0 the insider plays x(v) = (v - p0)/(2θ) while |v - p0| <= θ, and
// the market maker's θ-condition reduces to H(θ) = 0 with
//   H(θ) = -erf(θ√2)/θ - (γ/2)(erf(θ√2)(1 + 1/(4θ²)) + e^{-2θ²}/(θ√(2π))) + 2θ.

#include <cstdint>

#include "kyle/market_maker.hpp"

namespace kyle {

double h_function(double theta, double gamma);

/// ∂C/∂λ at (λ = 0, θ) under x(v) = (v - p0)/(2θ).
double metastable_partial_lambda(double theta);

/// Closed-form moments of x(v) = (v - p0)/(2θ).
Moments metastable_moments(double theta);

struct MetastablePoint {
    double theta_star = 0.0;
    double gamma = 0.0;
    double h_residual = 0.0;
    double partial_lambda_C = 0.0;
    /// P(|v - p0| < θ*) = erf(θ*/√2).
    double escape_prob_bound = 0.0;
    int iterations = 0;
};

/// Bisection for the root of H, bracket grown from [1e-6, 1] by doubling.
MetastablePoint metastable_theta(double gamma, double tol = 1e-13);

struct StayReport {
    MetastablePoint point;
    std::size_t trials = 0;
    std::size_t stays = 0;
    double fraction = 0.0;
    double binomial_se = 0.0;
    double alpha = 0.0;
    /// The market maker's exact refit at the metastable moments returns (0, θ*).
    bool market_maker_stays = false;
    bool exceeds_alpha = false;
};

/// One best-response step from (λ = 0, θ*) per trial, each with a fresh draw
/// of v: the trial stays when the insider's order is the bounded response
/// (v - p0)/(2θ*) and the market maker's refit returns (0, θ*).
StayReport metastability_check(double gamma, double alpha, std::size_t n_trials, std::uint64_t seed);

}  // namespace kyle
