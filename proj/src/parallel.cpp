#include "kyle/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace kyle {

namespace {
int g_default_threads = 0;
}

int thread_count() { return omp_get_max_threads(); }

void set_thread_cap(int threads) {
    if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
    omp_set_num_threads(threads < 1 ? g_default_threads : threads);
}

void apply_thread_env() {
    const char* env = std::getenv("KYLE_SPREAD_THREADS");
    if (env == nullptr) return;
    try {
        int n = std::stoi(env);
        if (n > 0) set_thread_cap(n);
    } catch (const std::exception&) {
        // ignored: malformed cap leaves the default in place
    }
}

}  // namespace kyle
