#pragma once

namespace kyle {

/// Number of OpenMP threads the library kernels use.
int thread_count();

/// Caps the kernel thread count. Values < 1 restore the OpenMP default.
void set_thread_cap(int threads);

/// Applies KYLE_SPREAD_THREADS from the environment, if set and positive.
void apply_thread_env();

}  // namespace kyle
