#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace levyruin {

// Replica scheduling options shared by every Monte Carlo estimator.
struct McOptions {
    std::uint64_t replicas = 100000;
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
};

inline constexpr std::uint64_t kChunkSize = 4096;

// Runs body(begin, end) -> Partial over fixed-size replica chunks and folds
// the partials in chunk order. Chunk boundaries depend only on n, so the
// folded result is bit-identical for every thread count.
template <class Partial, class Body, class Merge>
Partial run_chunked(std::uint64_t n, unsigned threads, Body body, Merge merge, Partial init = Partial{}) {
    const std::uint64_t chunks = (n + kChunkSize - 1) / kChunkSize;
    std::vector<Partial> parts(chunks, init);
    auto work = [&](std::uint64_t c) {
        const std::uint64_t b = c * kChunkSize;
        parts[c] = body(b, std::min(n, b + kChunkSize));
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
    if (workers <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) work(c);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::uint64_t c = next++; c < chunks; c = next++) work(c);
            });
        }
    }
    Partial out = init;
    for (auto& p : parts) merge(out, p);
    return out;
}

}  // namespace levyruin
