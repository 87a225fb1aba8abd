#pragma once

// Deterministic parallel-for: static block partition over a fixed worker
// count, results written to disjoint indices, so output never depends on
// scheduling. Worker count comes from set_job_count (CLI --jobs) or the
// DYADIC_TB_JOBS environment variable; default is single-threaded.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace dytb {

inline int& job_count_ref() {
    static int jobs = [] {
        if (const char* env = std::getenv("DYADIC_TB_JOBS")) {
            const int v = std::atoi(env);
            if (v >= 1) return v;
        }
        return 1;
    }();
    return jobs;
}

inline void set_job_count(int jobs) { job_count_ref() = jobs >= 1 ? jobs : 1; }
inline int job_count() { return job_count_ref(); }

template <typename F>
inline void parallel_for(std::int64_t count, F&& fn) {
    const int jobs = job_count();
    if (jobs <= 1 || count < 2) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(jobs, count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::int64_t lo = count * w / workers;
            const std::int64_t hi = count * (w + 1) / workers;
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace dytb
