#pragma once

// Minimal index-parallel loop. Worker count is capped by QUASISPEC_THREADS.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace quasispec {

inline int thread_limit() {
    if (const char* env = std::getenv("QUASISPEC_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1)
                return v;
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls body(i) for i in [0, count). Results must be written to per-index slots;
/// the first exception thrown by any call is rethrown.
template <class Body>
void parallel_for(int count, Body&& body) {
    const int workers = std::min(thread_limit(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex mu;
    auto run = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back(run);
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace quasispec
