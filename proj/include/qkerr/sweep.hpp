#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qkerr {

// Worker count resolution order: explicit flag, QKERR_WORKERS environment
// variable, config value, hardware concurrency.
inline int resolve_workers(int flag_value = 0, int config_value = 0) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("QKERR_WORKERS"); env && *env) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (config_value > 0) return config_value;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? int(hc) : 1;
}

// Runs fn(0..n-1) on a pool. Each index is processed exactly once and writes
// only its own slot, so results are identical for any worker count.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        int i;
        while ((i = next.fetch_add(1)) < n) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace qkerr
