#pragma once

// Market maker side: the objective
//     C(λ, θ, b) = E[(v - p0 - b - λf - θ sign f)²] - γθ E|f|,   f = x* + u,
// and its minimizer over λ, θ >= 0 (b free).

#include <cstddef>
#include <span>

#include "kyle/moments.hpp"

namespace kyle {

struct MMObjective {
    double cost = 0.0;
    double revenue_term = 0.0;     // γθℓ₁
    double efficiency_term = 0.0;  // E[(v - p)²]
};

/// Second-order statistics of (f, s = sign f, z = v - p0) that determine the
/// quadratic objective.
struct RegressionStats {
    double mf = 0.0, ms = 0.0, mz = 0.0;
    double ff = 0.0, fs = 0.0, fz = 0.0, ss = 1.0, sz = 0.0, zz = 0.0;
    double abs_f = 0.0;

    /// Population statistics implied by the moments (E s² = 1, E z² = σ_v²).
    static RegressionStats from_moments(const Moments& m, double sigma_v);
    /// Empirical statistics of flow/value samples.
    static RegressionStats from_samples(std::span<const double> flow, std::span<const double> v,
                                        double p0);

    /// C at (λ, θ, b).
    double loss(double lambda, double theta, double bias, double gamma) const;
};

/// Moment expansion of C with the rule's bias included.
MMObjective mm_cost(const PriceRule& rule, const ModelParams& params, const Moments& m);
/// Direct Monte Carlo evaluation of C with sampled noise flow.
MMObjective mm_cost_mc(const PriceRule& rule, const ModelParams& params, std::size_t n,
                       std::uint64_t seed);

/// ∂C/∂λ and ∂C/∂θ at b = 0.
struct MMGradient {
    double d_lambda = 0.0;
    double d_theta = 0.0;
};
MMGradient mm_gradient(const Moments& m, double lambda, double theta, double gamma);

enum class MMFace { Interior, LambdaZero, ThetaZero };

struct MMSolution {
    double lambda = 0.0;
    double theta = 0.0;
    double bias = 0.0;
    /// Unconstrained solution of the 2×2 system (may be negative).
    double raw_lambda = 0.0;
    double raw_theta = 0.0;
    MMFace face = MMFace::Interior;
    double determinant = 0.0;
    bool singular = false;
};

/// Exact minimizer with b = 0: solves [[ℓ₂, ℓ₁], [ℓ₁, 1]](λ, θ) = (μ, κ + γℓ₁/2)
/// and, outside the first quadrant, keeps the cheaper boundary minimizer.
MMSolution mm_best_response(const Moments& m, double gamma);

/// Exact minimizer with the bias fitted jointly (centered system).
MMSolution mm_best_response_centered(const Moments& m, double gamma);

/// Exact minimizer of the empirical objective (normal equations).
MMSolution mm_fit_normal_equations(const RegressionStats& st, double gamma, bool fit_bias = true);

struct GradientFit {
    PriceRule rule;
    std::size_t epochs_run = 0;
    double final_loss = 0.0;
    double learning_rate = 0.0;
    bool diverged = false;
    bool converged = false;
};

/// Full-batch projected gradient descent on the empirical loss
///   (1/N) Σ (P(f_j) - v_j)² - γθ (1/N) Σ |f_j|.
/// Stops after `epochs` or once the parameter step falls below `step_tol`.
/// Divergence (loss increase over 10 consecutive epochs) is reported.
GradientFit mm_fit_gradient(std::span<const double> flow, std::span<const double> v, double gamma,
                            const PriceRule& init, double lr, std::size_t epochs,
                            double step_tol = 1e-13);

/// 1 / (largest eigenvalue bound of the loss Hessian) for the given samples.
double suggested_learning_rate(std::span<const double> flow);

}  // namespace kyle
