#ifndef MAPCERT_PARALLEL_HPP
#define MAPCERT_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mapcert {

// chunked parallel loop over [0, n); body(k) must be safe to run concurrently
// for distinct k.  The first worker exception is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
    if (workers <= 1 || n < 2) {
        for (std::size_t k = 0; k < n; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    const std::size_t chunk = std::max<std::size_t>(1, n / (std::size_t(workers) * 32));
    auto run = [&] {
        try {
            while (!failed.load(std::memory_order_relaxed)) {
                std::size_t base = next.fetch_add(chunk);
                if (base >= n) break;
                std::size_t end = std::min(n, base + chunk);
                for (std::size_t k = base; k < end; ++k) body(k);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
            failed.store(true, std::memory_order_relaxed);
        }
    };
    std::vector<std::thread> pool;
    int count = std::min<int>(workers, int(std::max<std::size_t>(1, n / chunk)) + 1);
    pool.reserve(std::size_t(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace mapcert

#endif
