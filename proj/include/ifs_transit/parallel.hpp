#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace ifs_transit {

/// 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, n) into at most `threads` contiguous chunks and runs
/// fn(chunk, begin, end) for each. Callers combine per-chunk results in chunk
/// order, so outputs never depend on scheduling.
template <class Fn>
std::size_t parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n));
    const std::size_t step = (n + chunks - 1) / std::max<std::size_t>(chunks, 1);
    if (chunks == 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return 1;
    }
    std::vector<std::jthread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = std::min(n, c * step);
        const std::size_t end = std::min(n, begin + step);
        pool.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
    }
    return chunks;
}

inline std::size_t chunk_count(std::size_t n, unsigned threads) {
    return std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n));
}

} // namespace ifs_transit
