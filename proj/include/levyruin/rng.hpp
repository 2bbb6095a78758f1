#pragma once

#include <array>
#include <cstdint>

namespace levyruin {

// Philox4x64-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

PhiloxCounter philox4x64(PhiloxCounter ctr, PhiloxKey key);

// Stream purposes. Each estimator draws replica i from the substream
// (seed, purpose, i), so results do not depend on how replicas are
// scheduled across workers.
enum class StreamTag : std::uint64_t {
    generic = 0,
    sup_mgf = 1,
    ruin = 2,
    tail = 3,
    exp_time = 4,
    geometric = 5,
    passage_grid = 6,
    limit_triple = 7,
    conditional = 8,
    quadrature_b = 9,
};

// Counter-based random stream. The key is (seed, tag); the replica index
// occupies the second counter word and the first counter word enumerates
// 256-bit blocks, so every replica owns 2^64 blocks.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index);
    RandomStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1).
    double uniform();
    double exponential(double rate);
    double standard_normal();

    std::uint64_t blocks_used() const { return ctr_[0]; }

private:
    PhiloxKey key_;
    PhiloxCounter ctr_;
    PhiloxCounter buf_{};
    int pos_ = 4;
};

}  // namespace levyruin
