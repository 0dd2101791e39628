#pragma once

// Batch kernels behind the Monte Carlo estimators. Each kernel has a serial
// reference and an OpenMP version; both walk the same fixed chunks and merge
// partial results in chunk order, so their outputs are bitwise identical.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "kyle/insider.hpp"

namespace kyle {

/// Per-sample statistics, in accumulator order.
enum Stat : std::size_t {
    kStatAbsFlow = 0,   // |x + u|, or E_u|x + u|
    kStatSqFlow,        // (x + u)²
    kStatOrderInnov,    // x (v - p0)
    kStatSignInnov,     // sign(x + u)(v - p0)
    kStatFlow,          // x + u
    kStatSign,          // sign(x + u)
    kStatInnov,         // v - p0
    kStatCount
};

using StatVector = std::array<double, kStatCount>;

struct MomentAccumulator {
    double count = 0.0;
    StatVector sum{};
    std::array<double, kStatCount * kStatCount> cross{};

    void add(const StatVector& s);
    void merge(const MomentAccumulator& other);
};

/// How the noise flow enters the statistics: averaged out in closed form
/// given x (Rao-Blackwellized), or drawn once per sample.
enum class FlowEstimator { Conditional, Sampled };

struct ResponseCounts {
    std::size_t unbounded = 0;
    std::size_t ties = 0;
    std::size_t three_roots = 0;
};

/// Seed of an auxiliary stream derived from a base seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// x[i] = x*(v[i]); payoff (optional, may be empty) receives R_v(x*).
ResponseCounts best_response_batch(const InsiderSolver& solver, std::span<const double> v,
                                   std::span<double> x, std::span<double> payoff = {});
ResponseCounts best_response_batch_serial(const InsiderSolver& solver, std::span<const double> v,
                                          std::span<double> x, std::span<double> payoff = {});

ResponseCounts best_response_batch(const NumericResponder& solver, std::span<const double> v,
                                   std::span<double> x, std::span<double> payoff = {});

/// Accumulates the statistics of (v, x) pairs. u_seed feeds the sampled
/// estimator and is ignored by the conditional one.
MomentAccumulator accumulate_moments(std::span<const double> v, std::span<const double> x,
                                     double p0, const NoiseLaw& noise, FlowEstimator flow,
                                     std::uint64_t u_seed);
MomentAccumulator accumulate_moments_serial(std::span<const double> v, std::span<const double> x,
                                            double p0, const NoiseLaw& noise, FlowEstimator flow,
                                            std::uint64_t u_seed);

/// Sum in fixed chunk order (thread-count independent).
double ordered_sum(std::span<const double> values);

}  // namespace kyle
