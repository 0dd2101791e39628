#pragma once

// The four equilibrium statistics of the insider response x*:
//   ℓ₁ = E|x* + u|,  ℓ₂ = E(x* + u)²,  μ = E[x*(v - p0)],  κ = E[sign(x* + u)(v - p0)],
// plus the first moments needed to fit the bias term.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kyle/kernels.hpp"

namespace kyle {

struct Moments {
    double l1 = 0.0;
    double l2 = 0.0;
    double mu = 0.0;
    double kappa = 0.0;
    /// Standard errors of (l1, l2, mu, kappa); zero for quadrature.
    std::array<double, 4> std_errors{};

    double mean_flow = 0.0;
    double mean_sign = 0.0;
    double mean_innovation = 0.0;

    /// Covariance matrix of the sample means of the per-sample statistics
    /// (row-major, Stat order). Zero for quadrature.
    std::array<double, kStatCount * kStatCount> mean_cov{};

    std::size_t n = 0;
    /// Samples whose best response was unbounded; the moments are then infinite.
    std::size_t unbounded = 0;

    /// Standard error of Σ w_i · mean(stat_i).
    double se_of(const StatVector& w) const;
};

Moments finalize_moments(const MomentAccumulator& acc);

struct MomentOptions {
    std::size_t n = 100000;
    std::uint64_t seed = 1;
    /// One draw of v per quantile stratum instead of iid draws.
    bool stratified = false;
    FlowEstimator flow = FlowEstimator::Conditional;
};

Moments moments_mc(const PriceRule& rule, const ModelParams& params, const MomentOptions& opt);
Moments moments_mc(const PriceRule& rule, const ModelParams& params, std::size_t n,
                   std::uint64_t seed);

/// Moments of an arbitrary strategy given as (v_i, x_i) pairs.
Moments moments_of_strategy(std::span<const double> v, std::span<const double> x,
                            const ModelParams& params, FlowEstimator flow, std::uint64_t u_seed);

// ---------------------------------------------------------------------------
// Quadrature (uniform noise on [-1, 1], standard normal v - p0)

/// ∫₀^β z² φ(z) dz = ½ erf(β/√2) - β φ(β).
double f1_integral(double beta);

/// Threshold between the two uniform-noise response branches.
double uniform_threshold(double lambda, double theta);

/// Piecewise integrals over z ≥ 0, split at the threshold z̄ of the rule.
///   F2(f, g)  = ∫ f (1 ∧ g + 1)₊ 1{z > z̄} φ dz,   F2bar: same over z ≤ z̄,
///   F3(f)     = ∫ (1 - (1 ∧ f)²) 1{f > -1} 1{z > z̄} φ dz,   F3bar: same over z ≤ z̄.
class UniformMomentIntegrals {
public:
    UniformMomentIntegrals(double lambda, double theta);

    template <class F, class G>
    double f2(F f, G g, bool upper) const {
        return integrate([&](double z) { return f(z) * std::max(0.0, std::min(1.0, g(z)) + 1.0); },
                         upper);
    }
    template <class F>
    double f3(F f, bool upper) const {
        return integrate(
            [&](double z) {
                const double fz = f(z);
                if (!(fz > -1.0)) return 0.0;
                const double m = std::min(1.0, fz);
                return 1.0 - m * m;
            },
            upper);
    }

    double threshold() const { return zbar_; }

private:
    template <class H>
    double integrate(H h, bool upper) const {
        using boost::math::quadrature::gauss_kronrod;
        auto w = [&](double z) { return h(z) * std_normal_pdf(z); };
        if (upper) return gauss_kronrod<double, 61>::integrate(w, zbar_, zbar_ + 40.0, 15, 1e-13);
        return gauss_kronrod<double, 61>::integrate(w, 0.0, zbar_, 15, 1e-13);
    }
    double zbar_;
};

/// Requires uniform noise on [-1, 1], sigma_v = 1, lambda > 0 and zero bias.
Moments moments_quadrature(const PriceRule& rule, const ModelParams& params);

// ---------------------------------------------------------------------------
// Sign gap E|Z + Y| - 2 E[sign(Z + Y) Z] for Z ~ N(0, sigma_z²) independent of Y.

struct SignGap {
    double value = 0.0;
    double std_error = 0.0;
};

SignGap sign_gap_mc(double sigma_z, const NoiseLaw& y, std::size_t n, std::uint64_t seed);
/// Exact value by one-dimensional quadrature over Z.
double sign_gap_exact(double sigma_z, const NoiseLaw& y);

}  // namespace kyle
