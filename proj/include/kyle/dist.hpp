#pragma once

// Probability primitives for the two noise-trader laws and the Gaussian
// fundamental price.
//
// Random streams are split into fixed-size chunks, each seeded from
// (seed, chunk index), so every sampler returns the same sequence no matter
// how many threads fill it. Gaussian variates use the inverse-CDF method.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace kyle {

struct GaussianNoise {
    double sigma = 1.0;
    bool operator==(const GaussianNoise&) const = default;
};

struct UniformNoise {
    double half_width = 1.0;
    bool operator==(const UniformNoise&) const = default;
};

/// Law of the aggregate noise-trader order flow. Always symmetric about 0.
class NoiseLaw {
public:
    static NoiseLaw gaussian(double sigma);
    static NoiseLaw uniform(double half_width = 1.0);

    bool is_gaussian() const { return std::holds_alternative<GaussianNoise>(law_); }
    bool is_uniform() const { return std::holds_alternative<UniformNoise>(law_); }

    /// Gaussian sigma or uniform half-width.
    double scale() const;
    /// Standard deviation of the law.
    double std_dev() const;
    double variance() const { return std_dev() * std_dev(); }
    std::string name() const;

    const std::variant<GaussianNoise, UniformNoise>& law() const { return law_; }

    bool operator==(const NoiseLaw&) const = default;

private:
    explicit NoiseLaw(std::variant<GaussianNoise, UniformNoise> law) : law_(law) {}
    std::variant<GaussianNoise, UniformNoise> law_;
};

/// Law of the fundamental value v: Gaussian with mean p0.
struct PriceLaw {
    double p0 = 0.0;
    double sigma_v = 1.0;

    void validate() const;
    bool operator==(const PriceLaw&) const = default;
};

double pdf(const NoiseLaw& law, double x);
double cdf(const NoiseLaw& law, double x);

/// Error function, absolute error below 1e-15 (libm).
double erf(double x);
double erfc(double x);

double std_normal_pdf(double x);
double std_normal_cdf(double x);
/// Inverse of the standard normal CDF on (0, 1).
double std_normal_quantile(double p);

/// E[sign(x + u)] = 1 - 2 F(-x).
double expected_sign_shifted(const NoiseLaw& law, double x);
/// E|x + u|.
double expected_abs_shifted(const NoiseLaw& law, double x);
/// E|u|.
double expected_abs(const NoiseLaw& law);

// ---------------------------------------------------------------------------
// Seeded sampling

/// Samples per independently seeded chunk.
inline constexpr std::size_t kSampleChunk = 8192;

/// Seed for chunk `index` of the stream `seed` (splitmix64 mix).
std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t index);

/// Uniform double on the open interval (0, 1) from one 64-bit draw.
inline double open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> sample(const NoiseLaw& law, std::size_t n, std::uint64_t seed);
std::vector<double> sample(const PriceLaw& law, std::size_t n, std::uint64_t seed);

/// Stratified draw of v: one point per quantile stratum [i/n, (i+1)/n), with
/// a uniform jitter inside the stratum. Output is sorted ascending.
std::vector<double> sample_stratified(const PriceLaw& law, std::size_t n, std::uint64_t seed);

}  // namespace kyle
