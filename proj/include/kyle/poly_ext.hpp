#pragma once

// Best-response dynamics over odd-polynomial-plus-spread rules
//   P(x) = λ₁x + λ₃x³ + ... + θ sign(x) + p0,   all coefficients >= 0.
// The insider's expectation over noise is a fixed-sample average, the market
// maker refits all coefficients on (flow, v) samples each iteration.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kyle/equilibrium.hpp"

namespace kyle {

enum class PolyFit { Exact, Gradient };

std::string to_string(PolyFit f);
PolyFit parse_poly_fit(const std::string& s);

struct PolyConfig {
    std::size_t n = 10000;   // v samples for the fit
    std::size_t m = 1000;    // noise draws in the insider's payoff
    std::size_t epochs = 20000;
    double lr = 0.0;         // <= 0: 1 / trace bound of the Hessian
    double tol = 1e-6;
    std::size_t max_iter = 200;
    std::uint64_t seed = 1;
    PolyFit fit = PolyFit::Exact;
    double collapse_eps = 1e-2;
    std::size_t grid_points = 2049;

    void validate() const;
};

struct PolyFitReport {
    PolyPriceRule final_rule;
    /// Per iterate: odd coefficients followed by θ.
    std::vector<std::vector<double>> coeff_trajectory;
    /// Fit loss of the previous rule and of the refitted rule on each iteration's samples.
    std::vector<double> loss_before;
    std::vector<double> loss_after;
    bool converged = false;
    bool collapsed = false;
    std::size_t iterations = 0;
    Termination termination = Termination::MaxIter;
    std::string message;
};

/// Samples for one market maker refit of a polynomial rule.
struct PolySamples {
    std::vector<double> flow;
    std::vector<double> v;
    double p0 = 0.0;
};

struct PolyFitResult {
    std::vector<double> odd_coeffs;
    double theta = 0.0;
    double intercept = 0.0;  // added to p0
    double loss = 0.0;
};

/// Minimizes (1/N) Σ (P(f_j) - v_j)² - γθ (1/N) Σ |f_j| over coefficients
/// >= 0 and a free intercept.
PolyFitResult fit_poly_rule(const PolySamples& s, int degree, double gamma, PolyFit method,
                            std::size_t epochs = 20000, double lr = 0.0);

/// Empirical objective of a rule on samples.
double poly_loss(const PolyPriceRule& rule, const PolySamples& s, double gamma);

PolyFitReport solve_poly_equilibrium(const ModelParams& params, int degree, const PolyConfig& cfg,
                                     std::optional<PolyPriceRule> init = std::nullopt);

}  // namespace kyle
