#ifndef SGLAB_DETAIL_PARALLEL_HPP
#define SGLAB_DETAIL_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace sglab::detail {

/// Worker cap: min(hardware threads, SGLAB_THREADS when set).
inline int worker_count()
{
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("SGLAB_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

/// Runs fn(k) for k in [0, n) across the worker pool.  Tasks must write to
/// disjoint slots; results are then independent of the thread count.
template <class Fn>
void parallel_for(int n, const Fn& fn)
{
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int k = 0; k < n; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&, t] {
            for (int k = t; k < n; k += workers) fn(k);
        });
    for (auto& th : pool) th.join();
}

} // namespace sglab::detail

#endif
