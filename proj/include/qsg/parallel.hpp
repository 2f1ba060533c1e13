#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace qsg {

inline unsigned hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Runs fn(begin, end) on disjoint chunks of [begin, end). Falls back to a single
// call when the range is small. Chunk boundaries are deterministic, so callers
// that reduce per-chunk results in index order get bit-identical totals.
inline void parallel_for_chunks(std::size_t begin, std::size_t end,
                                const std::function<void(std::size_t, std::size_t)>& fn,
                                std::size_t min_chunk = 16384) {
    const std::size_t total = end > begin ? end - begin : 0;
    unsigned nthreads = hardware_threads();
    if (total < 2 * min_chunk || nthreads <= 1) {
        if (total > 0) fn(begin, end);
        return;
    }
    std::size_t nchunks = std::min<std::size_t>(nthreads, total / min_chunk);
    if (nchunks < 2) {
        fn(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nchunks);
    const std::size_t step = total / nchunks;
    for (std::size_t i = 0; i < nchunks; ++i) {
        std::size_t lo = begin + i * step;
        std::size_t hi = (i + 1 == nchunks) ? end : lo + step;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

// Deterministic chunk boundaries for per-chunk accumulator reductions.
inline std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t begin, std::size_t end,
                                                                     std::size_t min_chunk = 16384) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t total = end > begin ? end - begin : 0;
    unsigned nthreads = hardware_threads();
    std::size_t nchunks = (total < 2 * min_chunk || nthreads <= 1)
                              ? 1
                              : std::min<std::size_t>(nthreads, std::max<std::size_t>(1, total / min_chunk));
    const std::size_t step = nchunks ? total / nchunks : 0;
    for (std::size_t i = 0; i < nchunks && total > 0; ++i) {
        std::size_t lo = begin + i * step;
        std::size_t hi = (i + 1 == nchunks) ? end : lo + step;
        out.emplace_back(lo, hi);
    }
    return out;
}

}  // namespace qsg
