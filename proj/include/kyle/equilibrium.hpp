#pragma once

// Best-response dynamics: alternate the insider response and the market
// maker's exact fit until the pricing rule stops moving.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kyle/market_maker.hpp"

namespace kyle {

enum class Phase { KyleLinear, LinearWithSpread, SpreadOnly, NoEquilibrium };
enum class Termination { Converged, MaxIter, Oscillation, UnboundedResponse, NumericFailure };
enum class MomentBackend { MC, Quadrature };

std::string to_string(Phase p);
std::string to_string(Termination t);
std::string to_string(MomentBackend b);
Phase parse_phase(const std::string& s);
Termination parse_termination(const std::string& s);
MomentBackend parse_backend(const std::string& s);

struct EquilibriumConfig {
    std::size_t n_mc = 100000;
    double tol = 1e-6;
    std::size_t max_iter = 200;
    std::uint64_t seed = 1;
    MomentBackend backend = MomentBackend::MC;
    /// Stratified draws of v (one per quantile stratum), shared by all iterations.
    bool stratified = true;
    FlowEstimator flow = FlowEstimator::Conditional;
    bool fit_bias = true;
    /// Fit λ and b only (θ pinned at 0): the classical linear model.
    bool linear_only = false;
    double damping = 1.0;
    double fallback_damping = 0.5;
    double theta_eps = 1e-3;
    double lambda_eps = 1e-3;
    /// Cycle detection: period <= max_period, revisits within cycle_tol over the
    /// last cycle_window iterates while still moving by more than cycle_tol.
    std::size_t cycle_window = 20;
    std::size_t max_period = 4;
    double cycle_tol = 1e-4;
    /// Sample size of the independent verification run (0 disables it).
    std::size_t verify_n = 100000;

    void validate() const;
};

struct TrajectoryPoint {
    double lambda = 0.0;
    double theta = 0.0;
    double bias = 0.0;
};

struct VerifyOptions {
    std::size_t n_mc = 100000;
    std::uint64_t seed = 1;
    FlowEstimator flow = FlowEstimator::Conditional;
    /// Strategy played instead of the best response, when set.
    std::function<double(double)> strategy;
    /// Moments of the fitting sample; their SE is combined with the fresh one.
    const Moments* fit_moments = nullptr;
    std::size_t optimality_quantiles = 32;
    double n_se = 3.0;
};

struct VerifyReport {
    double foc_lambda = 0.0;  // ∂C/∂λ
    double foc_theta = 0.0;   // ∂C/∂θ
    double se_lambda = 0.0;
    double se_theta = 0.0;
    bool lambda_ok = false;
    bool theta_ok = false;
    /// Largest payoff shortfall of x* against a dense grid over the v quantiles.
    double insider_gap = 0.0;
    bool insider_ok = true;
    std::size_t unbounded = 0;
    double expected_profit = 0.0;
    double expected_order = 0.0;
    Moments moments;
    bool passed = false;
};

/// Recomputes the moments at `rule` on a fresh iid sample and checks the
/// market maker's first-order conditions (KKT on a zero coordinate) and the
/// insider's optimality at quantiles of v.
VerifyReport verify_equilibrium(const PriceRule& rule, const ModelParams& params,
                                const VerifyOptions& opt);
VerifyReport verify_equilibrium(const PriceRule& rule, const ModelParams& params, std::size_t n_mc,
                                std::uint64_t seed);

struct EquilibriumReport {
    std::vector<TrajectoryPoint> trajectory;
    bool converged = false;
    PriceRule rule_star;
    /// Residuals at the endpoint: foc_lambda, foc_theta from verification, bias.
    double foc_lambda = 0.0;
    double foc_theta = 0.0;
    double bias = 0.0;
    double se_lambda = 0.0;
    double se_theta = 0.0;
    bool verified = false;
    Phase phase = Phase::NoEquilibrium;
    Termination termination = Termination::MaxIter;
    std::size_t iterations = 0;
    double expected_profit = 0.0;
    double expected_order = 0.0;
    double mm_cost = 0.0;
    double revenue_term = 0.0;
    double damping_used = 1.0;
    Moments moments;
    std::string message;
};

Phase classify_phase(const PriceRule& rule, const EquilibriumConfig& cfg);

/// Iterates λₙ = 2λσ_v²/(σ_v² + 4λ²σ_u²) from λ₀ (θ = 0 throughout).
EquilibriumReport solve_kyle_baseline(const ModelParams& params, double lambda0, double tol,
                                      std::size_t max_iter);
/// Same fixed point through the Monte Carlo pipeline, fitting λ and b only.
EquilibriumReport solve_kyle_baseline_mc(const ModelParams& params, double lambda0,
                                         EquilibriumConfig cfg);

EquilibriumReport solve_equilibrium(const ModelParams& params, const PriceRule& init,
                                    const EquilibriumConfig& cfg);

/// True when the tail of the trajectory revisits itself with period <= max_period.
bool detect_cycle(const std::vector<TrajectoryPoint>& traj, std::size_t window,
                  std::size_t max_period, double tol);

}  // namespace kyle
