#pragma once

// Admissible pricing rules: the spread class P(x) = λx + θ·sign(x) + b + p0
// and its odd-polynomial extensions.

#include <span>
#include <vector>

#include "kyle/model.hpp"

namespace kyle {

/// sign with sign(0) = 0.
inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct PriceRule {
    double lambda = 0.0;
    double theta = 0.0;
    double bias = 0.0;
    double p0 = 0.0;

    /// Throws unless lambda, theta >= 0 and all fields are finite.
    void validate() const;
    double evaluate(double total_flow) const;

    bool operator==(const PriceRule&) const = default;
};

/// P(x) = Σ λ_k x^k (odd k) + θ·sign(x) + p0. odd_coeffs[i] multiplies x^(2i+1).
struct PolyPriceRule {
    std::vector<double> odd_coeffs{0.0};
    double theta = 0.0;
    double p0 = 0.0;

    static PolyPriceRule from_rule(const PriceRule& rule, int degree = 1);

    int degree() const { return 2 * static_cast<int>(odd_coeffs.size()) - 1; }
    void validate() const;
    double evaluate(double total_flow) const;
    /// Σ λ_k x^k without the spread and p0 terms.
    double polynomial(double x) const;

    bool operator==(const PolyPriceRule&) const = default;
};

/// Expected insider profit R_v(x) = -λx² + (v-p0-b-θ)x + 2θ x F_u(-x).
double insider_payoff(const PriceRule& rule, const NoiseLaw& noise, double v, double x);

/// Sample average of (v - P(x + u_i)) x over the given noise draws.
double insider_payoff_mc(const PolyPriceRule& rule, std::span<const double> noise, double v,
                         double x);

}  // namespace kyle
