#include "kyle/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace kyle {

NoiseLaw NoiseLaw::gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("gaussian noise: sigma must be positive");
    return NoiseLaw(GaussianNoise{sigma});
}

NoiseLaw NoiseLaw::uniform(double half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw std::invalid_argument("uniform noise: half-width must be positive");
    return NoiseLaw(UniformNoise{half_width});
}

double NoiseLaw::scale() const {
    if (auto g = std::get_if<GaussianNoise>(&law_)) return g->sigma;
    return std::get<UniformNoise>(law_).half_width;
}

double NoiseLaw::std_dev() const {
    if (auto g = std::get_if<GaussianNoise>(&law_)) return g->sigma;
    return std::get<UniformNoise>(law_).half_width / std::numbers::sqrt3;
}

std::string NoiseLaw::name() const { return is_gaussian() ? "gaussian" : "uniform"; }

void PriceLaw::validate() const {
    if (!(sigma_v > 0.0) || !std::isfinite(sigma_v))
        throw std::invalid_argument("price law: sigma_v must be positive");
    if (!std::isfinite(p0)) throw std::invalid_argument("price law: p0 must be finite");
}

double erf(double x) { return std::erf(x); }
double erfc(double x) { return std::erfc(x); }

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal quantile: p outside (0,1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double pdf(const NoiseLaw& law, double x) {
    if (law.is_gaussian()) {
        const double s = law.scale();
        return std_normal_pdf(x / s) / s;
    }
    const double b = law.scale();
    return std::abs(x) <= b ? 0.5 / b : 0.0;
}

double cdf(const NoiseLaw& law, double x) {
    if (law.is_gaussian()) return std_normal_cdf(x / law.scale());
    const double b = law.scale();
    return std::clamp((x + b) / (2.0 * b), 0.0, 1.0);
}

double expected_sign_shifted(const NoiseLaw& law, double x) {
    if (law.is_gaussian()) return std::erf(x / (law.scale() * std::numbers::sqrt2));
    return std::clamp(x / law.scale(), -1.0, 1.0);
}

double expected_abs_shifted(const NoiseLaw& law, double x) {
    const double s = law.scale();
    if (law.is_gaussian()) {
        const double t = x / s;
        return 2.0 * s * std_normal_pdf(t) + x * std::erf(t / std::numbers::sqrt2);
    }
    const double ax = std::abs(x);
    return ax >= s ? ax : (s * s + x * x) / (2.0 * s);
}

double expected_abs(const NoiseLaw& law) { return expected_abs_shifted(law, 0.0); }

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

template <class Fill>
std::vector<double> chunked(std::size_t n, std::uint64_t seed, Fill fill) {
    if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
    std::vector<double> out(n);
    const std::int64_t chunks = static_cast<std::int64_t>((n + kSampleChunk - 1) / kSampleChunk);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        std::mt19937_64 eng(chunk_seed(seed, static_cast<std::uint64_t>(c)));
        const std::size_t lo = static_cast<std::size_t>(c) * kSampleChunk;
        const std::size_t hi = std::min(n, lo + kSampleChunk);
        for (std::size_t i = lo; i < hi; ++i) out[i] = fill(i, eng());
    }
    return out;
}

}  // namespace

std::vector<double> sample(const NoiseLaw& law, std::size_t n, std::uint64_t seed) {
    const double s = law.scale();
    if (law.is_gaussian())
        return chunked(n, seed, [s](std::size_t, std::uint64_t r) {
            return s * std_normal_quantile(open_unit(r));
        });
    return chunked(n, seed, [s](std::size_t, std::uint64_t r) {
        return s * (2.0 * open_unit(r) - 1.0);
    });
}

std::vector<double> sample(const PriceLaw& law, std::size_t n, std::uint64_t seed) {
    law.validate();
    return chunked(n, seed, [&law](std::size_t, std::uint64_t r) {
        return law.p0 + law.sigma_v * std_normal_quantile(open_unit(r));
    });
}

std::vector<double> sample_stratified(const PriceLaw& law, std::size_t n, std::uint64_t seed) {
    law.validate();
    const double dn = static_cast<double>(n);
    return chunked(n, seed, [&law, dn](std::size_t i, std::uint64_t r) {
        const double p = (static_cast<double>(i) + open_unit(r)) / dn;
        return law.p0 + law.sigma_v * std_normal_quantile(p);
    });
}

}  // namespace kyle
