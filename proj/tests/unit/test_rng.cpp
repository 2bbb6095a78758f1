#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "levyruin/rng.hpp"

using namespace levyruin;

// numpy.random.Philox(key=[0, 0], counter=0).random_raw(4): numpy bumps the
// counter before each block, so these are the outputs for counter 1.
TEST_CASE("philox matches numpy reference blocks") {
    const PhiloxCounter a = philox4x64({1, 0, 0, 0}, {0, 0});
    CHECK(a[0] == 0x02f4ba6408e4d89bULL);
    CHECK(a[1] == 0x3dd62b0b9ca8c5b2ULL);
    CHECK(a[2] == 0x1c8667a55d902e79ULL);
    CHECK(a[3] == 0x907d7a052fd5b4dcULL);

    // Philox(key=[5, 7], counter=[3, 9, 0, 0]).
    const PhiloxCounter b = philox4x64({4, 9, 0, 0}, {5, 7});
    CHECK(b[0] == 0x41697e8a06b510bfULL);
    CHECK(b[1] == 0x4ffdac00a63fc475ULL);
    CHECK(b[2] == 0x5855720c7639864eULL);
    CHECK(b[3] == 0x06321764162ed1e4ULL);
}

TEST_CASE("streams are reproducible and disjoint") {
    RandomStream s1(42, StreamTag::ruin, 7), s2(42, StreamTag::ruin, 7);
    for (int i = 0; i < 100; ++i) REQUIRE(s1.next_u64() == s2.next_u64());

    std::set<std::uint64_t> seen;
    for (std::uint64_t idx = 0; idx < 50; ++idx) {
        RandomStream s(42, StreamTag::ruin, idx);
        seen.insert(s.next_u64());
    }
    RandomStream other(42, StreamTag::tail, 0);
    seen.insert(other.next_u64());
    CHECK(seen.size() == 51);
}

TEST_CASE("uniform stays in the open unit interval with the right moments") {
    RandomStream s(1, StreamTag::generic, 0);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(sum2 / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("exponential and normal draws have the right means") {
    RandomStream s(3, StreamTag::generic, 1);
    double se = 0.0, sn = 0.0, sn2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        se += s.exponential(2.0);
        const double z = s.standard_normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(std::abs(se / n - 0.5) < 4.0 * 0.5 / std::sqrt(n));
    CHECK(std::abs(sn / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1.0) < 0.02);
}
