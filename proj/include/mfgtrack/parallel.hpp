#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mfgtrack {

// Runs fn(chunk_index, first, last) over [0, n_items) split into fixed-size
// chunks. The decomposition depends only on n_items and chunk_size, never on
// the worker count, so per-chunk accumulators merged in chunk order give
// bit-identical results on any machine.
inline void parallel_chunks(std::size_t n_items, std::size_t chunk_size,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n_items == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const std::size_t n_threads = n_chunks < hw ? n_chunks : hw;

    if (n_threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            const std::size_t first = c * chunk_size;
            const std::size_t last = first + chunk_size < n_items ? first + chunk_size : n_items;
            fn(c, first, last);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks || failed.load()) return;
            const std::size_t first = c * chunk_size;
            const std::size_t last = first + chunk_size < n_items ? first + chunk_size : n_items;
            try {
                fn(c, first, last);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

inline std::size_t chunk_count(std::size_t n_items, std::size_t chunk_size) {
    if (chunk_size == 0) chunk_size = 1;
    return (n_items + chunk_size - 1) / chunk_size;
}

}  // namespace mfgtrack
