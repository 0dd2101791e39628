#include "kyle/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace kyle {

void MomentAccumulator::add(const StatVector& s) {
    count += 1.0;
    for (std::size_t i = 0; i < kStatCount; ++i) {
        sum[i] += s[i];
        for (std::size_t j = i; j < kStatCount; ++j) cross[i * kStatCount + j] += s[i] * s[j];
    }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    count += other.count;
    for (std::size_t i = 0; i < kStatCount; ++i) sum[i] += other.sum[i];
    for (std::size_t i = 0; i < cross.size(); ++i) cross[i] += other.cross[i];
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return chunk_seed(seed ^ 0x5bd1e9955bd1e995ULL, stream + (1ULL << 40));
}

namespace {

std::size_t chunk_count(std::size_t n) { return (n + kSampleChunk - 1) / kSampleChunk; }

template <class Solver>
ResponseCounts respond_chunk(const Solver& solver, std::span<const double> v, std::span<double> x,
                             std::span<double> payoff, std::size_t lo, std::size_t hi) {
    ResponseCounts c;
    for (std::size_t i = lo; i < hi; ++i) {
        const BestResponse r = solver.solve(v[i]);
        x[i] = r.x_star;
        if (!payoff.empty()) payoff[i] = r.payoff;
        c.unbounded += r.unbounded;
        c.ties += r.tie;
        c.three_roots += (r.root_count == 3);
    }
    return c;
}

void add_counts(ResponseCounts& a, const ResponseCounts& b) {
    a.unbounded += b.unbounded;
    a.ties += b.ties;
    a.three_roots += b.three_roots;
}

void check_sizes(std::span<const double> v, std::span<double> x, std::span<double> payoff) {
    if (x.size() != v.size() || (!payoff.empty() && payoff.size() != v.size()))
        throw std::invalid_argument("best_response_batch: size mismatch");
}

template <class Solver>
ResponseCounts respond_parallel(const Solver& solver, std::span<const double> v,
                                std::span<double> x, std::span<double> payoff) {
    check_sizes(v, x, payoff);
    const std::size_t n = v.size();
    const auto chunks = static_cast<std::int64_t>(chunk_count(n));
    std::vector<ResponseCounts> parts(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kSampleChunk;
        parts[static_cast<std::size_t>(c)] =
            respond_chunk(solver, v, x, payoff, lo, std::min(n, lo + kSampleChunk));
    }
    ResponseCounts total;
    for (const auto& p : parts) add_counts(total, p);
    return total;
}

StatVector sample_stats(double v, double x, double p0, const NoiseLaw& noise, FlowEstimator flow,
                        double u) {
    const double z = v - p0;
    StatVector s{};
    if (flow == FlowEstimator::Conditional) {
        const double sg = expected_sign_shifted(noise, x);
        s[kStatAbsFlow] = expected_abs_shifted(noise, x);
        s[kStatSqFlow] = x * x + noise.variance();
        s[kStatFlow] = x;
        s[kStatSign] = sg;
        s[kStatSignInnov] = sg * z;
    } else {
        const double f = x + u;
        const double sg = sign0(f);
        s[kStatAbsFlow] = std::abs(f);
        s[kStatSqFlow] = f * f;
        s[kStatFlow] = f;
        s[kStatSign] = sg;
        s[kStatSignInnov] = sg * z;
    }
    s[kStatOrderInnov] = x * z;
    s[kStatInnov] = z;
    return s;
}

MomentAccumulator moment_chunk(std::span<const double> v, std::span<const double> x, double p0,
                               const NoiseLaw& noise, FlowEstimator flow, std::uint64_t u_seed,
                               std::size_t chunk) {
    const std::size_t lo = chunk * kSampleChunk;
    const std::size_t hi = std::min(v.size(), lo + kSampleChunk);
    MomentAccumulator acc;
    if (flow == FlowEstimator::Conditional) {
        for (std::size_t i = lo; i < hi; ++i) acc.add(sample_stats(v[i], x[i], p0, noise, flow, 0.0));
        return acc;
    }
    std::mt19937_64 eng(chunk_seed(u_seed, chunk));
    const double s = noise.scale();
    for (std::size_t i = lo; i < hi; ++i) {
        const double p = open_unit(eng());
        const double u = noise.is_gaussian() ? s * std_normal_quantile(p) : s * (2.0 * p - 1.0);
        acc.add(sample_stats(v[i], x[i], p0, noise, flow, u));
    }
    return acc;
}

void check_pairs(std::span<const double> v, std::span<const double> x) {
    if (v.size() != x.size()) throw std::invalid_argument("accumulate_moments: size mismatch");
    if (v.empty()) throw std::invalid_argument("accumulate_moments: no samples");
}

}  // namespace

ResponseCounts best_response_batch(const InsiderSolver& solver, std::span<const double> v,
                                   std::span<double> x, std::span<double> payoff) {
    return respond_parallel(solver, v, x, payoff);
}

ResponseCounts best_response_batch(const NumericResponder& solver, std::span<const double> v,
                                   std::span<double> x, std::span<double> payoff) {
    return respond_parallel(solver, v, x, payoff);
}

ResponseCounts best_response_batch_serial(const InsiderSolver& solver, std::span<const double> v,
                                          std::span<double> x, std::span<double> payoff) {
    check_sizes(v, x, payoff);
    ResponseCounts total;
    for (std::size_t lo = 0; lo < v.size(); lo += kSampleChunk)
        add_counts(total, respond_chunk(solver, v, x, payoff, lo, std::min(v.size(), lo + kSampleChunk)));
    return total;
}

MomentAccumulator accumulate_moments(std::span<const double> v, std::span<const double> x,
                                     double p0, const NoiseLaw& noise, FlowEstimator flow,
                                     std::uint64_t u_seed) {
    check_pairs(v, x);
    const auto chunks = static_cast<std::int64_t>(chunk_count(v.size()));
    std::vector<MomentAccumulator> parts(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c)
        parts[static_cast<std::size_t>(c)] =
            moment_chunk(v, x, p0, noise, flow, u_seed, static_cast<std::size_t>(c));
    MomentAccumulator total;
    for (const auto& p : parts) total.merge(p);
    return total;
}

MomentAccumulator accumulate_moments_serial(std::span<const double> v, std::span<const double> x,
                                            double p0, const NoiseLaw& noise, FlowEstimator flow,
                                            std::uint64_t u_seed) {
    check_pairs(v, x);
    MomentAccumulator total;
    for (std::size_t c = 0; c < chunk_count(v.size()); ++c)
        total.merge(moment_chunk(v, x, p0, noise, flow, u_seed, c));
    return total;
}

double ordered_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    const auto chunks = static_cast<std::int64_t>(chunk_count(n));
    std::vector<double> parts(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kSampleChunk;
        const std::size_t hi = std::min(n, lo + kSampleChunk);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += values[i];
        parts[static_cast<std::size_t>(c)] = s;
    }
    double total = 0.0;
    for (double p : parts) total += p;
    return total;
}

}  // namespace kyle
