#include "pano/parallel.hpp"

#include <atomic>

namespace pano {

namespace {
std::atomic<int> g_threads{0};  // 0 = hardware default
}

int thread_count() {
    int n = g_threads.load();
    if (n > 0) return n;
    n = static_cast<int>(std::thread::hardware_concurrency());
    return n > 0 ? n : 1;
}

void set_thread_count(int n) { g_threads.store(n > 0 ? n : 0); }

void parallel_for(int begin, int end, const std::function<void(int)>& body) {
    const int n = end - begin;
    if (n <= 0) return;
    const int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace pano
