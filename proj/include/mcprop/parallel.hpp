#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace mcprop {

inline int resolve_threads(int requested) {
    if (requested >= 1) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Run fn(band, begin, end) over contiguous row bands and return the band
// count. The band layout depends only on (n_rows, threads); callers must
// write to disjoint output slots or merge per-band results deterministically.
template <typename Fn>
int parallel_row_bands(int n_rows, int threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (n_rows <= 0) return 0;
    const int bands = std::max(1, std::min(threads, n_rows));
    if (bands == 1) {
        fn(0, 0, n_rows);
        return 1;
    }
    std::vector<std::thread> workers;
    workers.reserve(bands);
    for (int b = 0; b < bands; ++b) {
        const int begin = static_cast<int>(static_cast<long long>(n_rows) * b / bands);
        const int end =
            static_cast<int>(static_cast<long long>(n_rows) * (b + 1) / bands);
        workers.emplace_back([&fn, b, begin, end] { fn(b, begin, end); });
    }
    for (auto& w : workers) w.join();
    return bands;
}

template <typename Fn>
void parallel_rows(int n_rows, int threads, Fn&& fn) {
    parallel_row_bands(n_rows, threads,
                       [&fn](int, int begin, int end) { fn(begin, end); });
}

} // namespace mcprop
