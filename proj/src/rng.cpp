#include "levyruin/rng.hpp"

#include <cmath>
#include <numbers>

namespace levyruin {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

}  // namespace

PhiloxCounter philox4x64(PhiloxCounter ctr, PhiloxKey key) {
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index)
    : RandomStream(seed, static_cast<std::uint64_t>(tag), index) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
    : key_{seed, tag}, ctr_{0, index, 0, 0} {}

std::uint64_t RandomStream::next_u64() {
    if (pos_ == 4) {
        buf_ = philox4x64(ctr_, key_);
        ++ctr_[0];
        pos_ = 0;
    }
    return buf_[pos_++];
}

double RandomStream::uniform() {
    // 53 random bits centred in their cell: never 0 or 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::exponential(double rate) {
    return -std::log(uniform()) / rate;
}

double RandomStream::standard_normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
}

}  // namespace levyruin
