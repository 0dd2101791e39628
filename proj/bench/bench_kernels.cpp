// Times the serial and OpenMP best-response and moment kernels.
//   bench_kernels [n] [repeats]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include "kyle/kernels.hpp"
#include "kyle/parallel.hpp"

namespace {

template <class F>
double seconds(F&& f, int repeats) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) f();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return dt.count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
    kyle::apply_thread_env();
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1000000;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

    for (const auto& noise : {kyle::NoiseLaw::gaussian(1.0), kyle::NoiseLaw::uniform(1.0)}) {
        const kyle::PriceRule rule{0.45, 0.3, 0.0, 0.0};
        const kyle::InsiderSolver solver(rule, noise);
        const auto v = kyle::sample_stratified(kyle::PriceLaw{0.0, 1.0}, n, 1);
        std::vector<double> x(n);

        const double t_br_s = seconds([&] { kyle::best_response_batch_serial(solver, v, x); }, repeats);
        const double t_br_p = seconds([&] { kyle::best_response_batch(solver, v, x); }, repeats);
        const double t_mo_s = seconds(
            [&] { kyle::accumulate_moments_serial(v, x, 0.0, noise, kyle::FlowEstimator::Conditional, 2); },
            repeats);
        const double t_mo_p = seconds(
            [&] { kyle::accumulate_moments(v, x, 0.0, noise, kyle::FlowEstimator::Conditional, 2); }, repeats);

        std::cout << noise.name() << " n=" << n << " threads=" << kyle::thread_count() << "\n"
                  << "  best_response serial " << t_br_s << " s, parallel " << t_br_p << " s\n"
                  << "  moments       serial " << t_mo_s << " s, parallel " << t_mo_p << " s\n";
    }
    return 0;
}
