#include "kyle/moments.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace kyle {

double Moments::se_of(const StatVector& w) const {
    double var = 0.0;
    for (std::size_t i = 0; i < kStatCount; ++i)
        for (std::size_t j = 0; j < kStatCount; ++j) var += w[i] * w[j] * mean_cov[i * kStatCount + j];
    return std::sqrt(std::max(0.0, var));
}

Moments finalize_moments(const MomentAccumulator& acc) {
    Moments m;
    const double n = acc.count;
    m.n = static_cast<std::size_t>(n);
    if (n <= 0.0) throw std::invalid_argument("finalize_moments: empty accumulator");
    StatVector mean{};
    for (std::size_t i = 0; i < kStatCount; ++i) mean[i] = acc.sum[i] / n;
    for (std::size_t i = 0; i < kStatCount; ++i) {
        for (std::size_t j = i; j < kStatCount; ++j) {
            double c = acc.cross[i * kStatCount + j] / n - mean[i] * mean[j];
            // Sample covariance, then covariance of the mean.
            c = n > 1.0 ? c * n / (n - 1.0) / n : 0.0;
            m.mean_cov[i * kStatCount + j] = c;
            m.mean_cov[j * kStatCount + i] = c;
        }
    }
    m.l1 = mean[kStatAbsFlow];
    m.l2 = mean[kStatSqFlow];
    m.mu = mean[kStatOrderInnov];
    m.kappa = mean[kStatSignInnov];
    m.mean_flow = mean[kStatFlow];
    m.mean_sign = mean[kStatSign];
    m.mean_innovation = mean[kStatInnov];
    for (std::size_t k = 0; k < 4; ++k)
        m.std_errors[k] = std::sqrt(std::max(0.0, m.mean_cov[k * kStatCount + k]));
    return m;
}

namespace {

Moments unbounded_moments(std::size_t n, std::size_t unbounded) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Moments m;
    m.l1 = m.l2 = m.mu = m.kappa = inf;
    m.n = n;
    m.unbounded = unbounded;
    return m;
}

}  // namespace

Moments moments_of_strategy(std::span<const double> v, std::span<const double> x,
                            const ModelParams& params, FlowEstimator flow, std::uint64_t u_seed) {
    std::size_t unbounded = 0;
    for (double xi : x) unbounded += !std::isfinite(xi);
    if (unbounded > 0) return unbounded_moments(v.size(), unbounded);
    return finalize_moments(
        accumulate_moments(v, x, params.price.p0, params.noise, flow, u_seed));
}

Moments moments_mc(const PriceRule& rule, const ModelParams& params, const MomentOptions& opt) {
    params.validate();
    if (opt.n < 2) throw std::invalid_argument("moments_mc: n must be at least 2");
    const std::vector<double> v = opt.stratified ? sample_stratified(params.price, opt.n, opt.seed)
                                                 : sample(params.price, opt.n, opt.seed);
    std::vector<double> x(v.size());
    const InsiderSolver solver(rule, params.noise);
    const ResponseCounts counts = best_response_batch(solver, v, x);
    if (counts.unbounded > 0) return unbounded_moments(v.size(), counts.unbounded);
    return finalize_moments(accumulate_moments(v, x, params.price.p0, params.noise, opt.flow,
                                               stream_seed(opt.seed, 1)));
}

Moments moments_mc(const PriceRule& rule, const ModelParams& params, std::size_t n,
                   std::uint64_t seed) {
    MomentOptions opt;
    opt.n = n;
    opt.seed = seed;
    return moments_mc(rule, params, opt);
}

// ---------------------------------------------------------------------------

double f1_integral(double beta) {
    return 0.5 * std::erf(beta / std::numbers::sqrt2) - beta * std_normal_pdf(beta);
}

double uniform_threshold(double lambda, double theta) {
    return lambda + theta + std::sqrt((lambda + theta) * lambda);
}

UniformMomentIntegrals::UniformMomentIntegrals(double lambda, double theta)
    : zbar_(uniform_threshold(lambda, theta)) {}

Moments moments_quadrature(const PriceRule& rule, const ModelParams& params) {
    rule.validate();
    params.validate();
    if (!params.noise.is_uniform() || params.noise.scale() != 1.0)
        throw std::invalid_argument("moments_quadrature: requires uniform noise on [-1, 1]");
    if (params.price.sigma_v != 1.0)
        throw std::invalid_argument("moments_quadrature: requires sigma_v = 1");
    if (!(rule.lambda > 0.0)) throw std::invalid_argument("moments_quadrature: requires lambda > 0");
    if (rule.bias != 0.0) throw std::invalid_argument("moments_quadrature: requires zero bias");

    const double lam = rule.lambda, th = rule.theta;
    const double a = lam + th;
    const UniformMomentIntegrals F(lam, th);
    const double zb = F.threshold();
    const double f1 = f1_integral(zb);
    const double tail_phi = std_normal_pdf(zb);
    const double tail_p = 0.5 * std::erfc(zb / std::numbers::sqrt2);

    auto x1 = [a](double z) { return z / (2.0 * a); };
    auto x2 = [lam, th](double z) { return (z - th) / (2.0 * lam); };
    auto nx1 = [&](double z) { return -x1(z); };
    auto nx2 = [&](double z) { return -x2(z); };
    auto id = [](double z) { return z; };

    Moments m;
    const double ex2 = f1 / (2.0 * a * a) +
                       (0.5 - f1 - 2.0 * th * tail_phi + th * th * tail_p) / (2.0 * lam * lam);
    m.l2 = ex2 + params.noise.variance();
    m.mu = f1 / a + (0.5 - f1 - th * tail_phi) / lam;
    m.kappa = F.f2(id, x1, false) - F.f2(id, nx1, false) + F.f2(id, x2, true) - F.f2(id, nx2, true);
    m.l1 = F.f2(x1, x1, false) - F.f2(x1, nx1, false) + F.f2(x2, x2, true) - F.f2(x2, nx2, true) +
           0.5 * (F.f3(x1, false) + F.f3(nx1, false) + F.f3(x2, true) + F.f3(nx2, true));
    m.n = 0;
    return m;
}

// ---------------------------------------------------------------------------

SignGap sign_gap_mc(double sigma_z, const NoiseLaw& y, std::size_t n, std::uint64_t seed) {
    if (!(sigma_z > 0.0)) throw std::invalid_argument("sign_gap_mc: sigma_z must be positive");
    if (n < 2) throw std::invalid_argument("sign_gap_mc: n must be at least 2");
    const std::vector<double> z = sample(PriceLaw{0.0, sigma_z}, n, seed);
    const std::vector<double> u = sample(y, n, stream_seed(seed, 2));
    std::vector<double> term(n), sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = z[i] + u[i];
        term[i] = std::abs(s) - 2.0 * sign0(s) * z[i];
        sq[i] = term[i] * term[i];
    }
    const double dn = static_cast<double>(n);
    const double mean = ordered_sum(term) / dn;
    const double var = (ordered_sum(sq) / dn - mean * mean) * dn / (dn - 1.0);
    return {mean, std::sqrt(std::max(0.0, var) / dn)};
}

double sign_gap_exact(double sigma_z, const NoiseLaw& y) {
    using boost::math::quadrature::gauss_kronrod;
    // The integrand is even in z.
    auto h = [&](double z) {
        const double d = expected_abs_shifted(y, z) - 2.0 * z * expected_sign_shifted(y, z);
        return d * std_normal_pdf(z / sigma_z) / sigma_z;
    };
    double total = 0.0;
    // Split at the uniform kink so each panel is smooth.
    const double kink = y.is_uniform() ? y.scale() : sigma_z;
    total += gauss_kronrod<double, 61>::integrate(h, 0.0, kink, 15, 1e-13);
    total += gauss_kronrod<double, 61>::integrate(h, kink, kink + 40.0 * sigma_z, 15, 1e-13);
    return 2.0 * total;
}

}  // namespace kyle
