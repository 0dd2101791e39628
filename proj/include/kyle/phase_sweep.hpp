#pragma once

// Sweeps over the market maker's revenue weight γ: phase labels, equilibrium
// parameters and the insider's behavior at a converged rule.

#include <optional>
#include <vector>

#include "kyle/equilibrium.hpp"

namespace kyle {

struct PhasePoint {
    double gamma = 0.0;
    Phase phase = Phase::NoEquilibrium;
    double lambda_star = 0.0;
    double theta_star = 0.0;
    double bias = 0.0;
    double expected_order = 0.0;
    double expected_profit = 0.0;
    double mm_value = 0.0;
    double revenue_term = 0.0;
    std::size_t n_iterations = 0;
    Termination termination = Termination::MaxIter;
    bool warm_started = false;
};

struct PhaseBoundary {
    Phase below = Phase::NoEquilibrium;
    Phase above = Phase::NoEquilibrium;
    /// Grid cell containing the label change.
    double gamma_lo = 0.0;
    double gamma_hi = 0.0;
    /// Bracket after bisection refinement.
    double refined_lo = 0.0;
    double refined_hi = 0.0;
    double estimate() const { return 0.5 * (refined_lo + refined_hi); }
};

struct SweepConfig {
    EquilibriumConfig eq;
    bool warm_start = true;
    int refine_steps = 6;
    /// Grid points re-solved from the cold start to detect hysteresis.
    std::size_t cold_checks = 5;
    /// Starting rule when no warm start is available; lambda <= 0 selects
    /// the Kyle value σ_v/(2σ_u).
    PriceRule cold_init{0.0, 0.1, 0.0, 0.0};
};

/// Warm- and cold-started phase labels at one grid point.
struct ColdCheck {
    double gamma = 0.0;
    Phase warm = Phase::NoEquilibrium;
    Phase cold = Phase::NoEquilibrium;
    bool agrees() const { return warm == cold; }
};

struct SweepResult {
    std::vector<PhasePoint> points;
    std::vector<PhaseBoundary> boundaries;
    /// Full solver report per grid point.
    std::vector<EquilibriumReport> reports;
    std::vector<ColdCheck> cold_checks;

    /// First boundary whose lower side is `below` and upper side is `above`.
    std::optional<PhaseBoundary> find(Phase below, Phase above) const;
    /// Upper edge of the linear-with-spread phase (start of the nonconvergent band).
    std::optional<double> gamma_lbid() const;
    /// Lower edge of the spread-only phase.
    std::optional<double> gamma_bid() const;
};

/// γ grid lo, lo + step, ..., up to hi (inclusive within rounding).
std::vector<double> make_grid(double lo, double hi, double step);

PhasePoint solve_point(const ModelParams& params, double gamma, const SweepConfig& cfg,
                       const PriceRule* warm, EquilibriumReport* report_out = nullptr);

SweepResult sweep(const ModelParams& params, const std::vector<double>& gamma_grid,
                  const SweepConfig& cfg);

struct CurvePoint {
    double v = 0.0;
    double x_star = 0.0;
    double profit = 0.0;
    double flow_q05 = 0.0;
    double flow_q95 = 0.0;
};

/// Best response, its payoff and the 5%/95% quantiles of x* + u (from n_mc
/// noise draws) at each v of the grid.
std::vector<CurvePoint> insider_curves(const ModelParams& params, const PriceRule& rule,
                                       const std::vector<double>& v_grid, std::size_t n_mc,
                                       std::uint64_t seed);

}  // namespace kyle
