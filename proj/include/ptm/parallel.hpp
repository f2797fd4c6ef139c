#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ptm {

/// Runs body(begin, end, worker) over contiguous chunks of [0, n). Chunks are
/// fixed by (n, threads) alone, so per-worker partial results combined in
/// worker order give the same bytes on every run.
template <class Body>
void parallel_chunks(size_t n, int threads, Body&& body) {
    const size_t t = std::max<size_t>(1, std::min<size_t>(threads > 0 ? threads : 1, n ? n : 1));
    if (t == 1) {
        body(size_t(0), n, 0);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(t);
    const size_t chunk = (n + t - 1) / t;
    for (size_t w = 0; w < t; ++w) {
        const size_t b = std::min(n, w * chunk), e = std::min(n, b + chunk);
        pool.emplace_back([&, b, e, w] {
            try {
                body(b, e, int(w));
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ptm
