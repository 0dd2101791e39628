#include <cmath>
#include <cstring>
#include <random>

#include <doctest.h>

#include "kyle/kernels.hpp"
#include "kyle/parallel.hpp"

using namespace kyle;

namespace {

bool bit_equal(const MomentAccumulator& a, const MomentAccumulator& b) {
    return a.count == b.count && std::memcmp(a.sum.data(), b.sum.data(), sizeof a.sum) == 0 &&
           std::memcmp(a.cross.data(), b.cross.data(), sizeof a.cross) == 0;
}

}  // namespace

TEST_CASE("parallel kernels are bitwise equal to the serial reference") {
    const std::size_t n = 5 * kSampleChunk + 123;
    const auto v = sample_stratified(PriceLaw{0.5, 1.2}, n, 8);
    for (const auto& noise : {NoiseLaw::gaussian(1.0), NoiseLaw::uniform(1.0)}) {
        const InsiderSolver solver(PriceRule{0.05, 0.9, 0.01, 0.5}, noise);
        std::vector<double> xs(n), xp(n), ps(n), pp(n);
        const auto cs = best_response_batch_serial(solver, v, xs, ps);
        for (int threads : {1, 2, 3, 8}) {
            set_thread_cap(threads);
            const auto cp = best_response_batch(solver, v, xp, pp);
            CHECK(std::memcmp(xs.data(), xp.data(), n * sizeof(double)) == 0);
            CHECK(std::memcmp(ps.data(), pp.data(), n * sizeof(double)) == 0);
            CHECK(cs.three_roots == cp.three_roots);
            for (auto flow : {FlowEstimator::Conditional, FlowEstimator::Sampled}) {
                const auto a = accumulate_moments_serial(v, xs, 0.5, noise, flow, 77);
                const auto b = accumulate_moments(v, xs, 0.5, noise, flow, 77);
                CHECK(bit_equal(a, b));
            }
        }
        set_thread_cap(0);
    }
}

TEST_CASE("ordered sum is thread independent and accurate") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    std::vector<double> x(100003);
    long double ref = 0.0L;
    for (auto& t : x) {
        t = d(rng);
        ref += t;
    }
    set_thread_cap(1);
    const double a = ordered_sum(x);
    set_thread_cap(5);
    const double b = ordered_sum(x);
    set_thread_cap(0);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    CHECK(a == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
}

TEST_CASE("accumulator cross products") {
    MomentAccumulator a, b, all;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        StatVector s;
        for (auto& t : s) t = d(rng);
        (i < 20 ? a : b).add(s);
        all.add(s);
    }
    a.merge(b);
    CHECK(a.count == 50.0);
    for (std::size_t i = 0; i < kStatCount; ++i) {
        CHECK(a.sum[i] == doctest::Approx(all.sum[i]));
        // Cross products are kept on and above the diagonal.
        for (std::size_t j = i; j < kStatCount; ++j)
            CHECK(a.cross[i * kStatCount + j] == doctest::Approx(all.cross[i * kStatCount + j]));
    }
    CHECK(stream_seed(1, 1) != stream_seed(1, 2));
    CHECK(stream_seed(1, 1) != stream_seed(2, 1));
}
