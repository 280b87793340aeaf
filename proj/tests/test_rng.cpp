#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "scts/rng.hpp"

using namespace scts;

TEST_CASE("rng stream is deterministic per seed") {
    RngStream a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        uint64_t va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_diff = any_diff || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform draws live in [0,1) with mean near 1/2") {
    RngStream rng(7);
    double sum = 0.0;
    bool in_range = true;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.next_uniform();
        in_range = in_range && u >= 0.0 && u < 1.0;
        sum += u;
    }
    CHECK(in_range);
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("normal draws have unit moments") {
    RngStream rng(11);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double x = rng.next_normal();
        sum += x;
        sq += x * x;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("coin is fair") {
    RngStream rng(5);
    int ones = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ones += rng.next_coin();
    CHECK(std::abs(static_cast<double>(ones) / n - 0.5) < 0.01);
}

TEST_CASE("stable_hash is order sensitive and input sensitive") {
    CHECK(stable_hash(1, 2, 3) != stable_hash(1, 3, 2));
    CHECK(stable_hash(1, 2, 3) == stable_hash(1, 2, 3));
    CHECK(stable_hash(1, 2.0) != stable_hash(1, 2));
    CHECK(stable_hash(9, std::string_view("scts")) != stable_hash(9, std::string_view("ucb")));
    CHECK(stable_hash(9, std::string_view("ab")) != stable_hash(9, std::string_view("ba")));
    // Long strings exercise multi-chunk folding.
    CHECK(stable_hash(0, std::string_view("abcdefghijklmnop")) !=
          stable_hash(0, std::string_view("abcdefghijklmnoq")));
}

TEST_CASE("stable_hash spreads nearby seeds") {
    std::set<uint64_t> seen;
    for (int i = 0; i < 2000; ++i) seen.insert(stable_hash(1, i));
    CHECK(seen.size() == 2000);
}

TEST_CASE("mix64 avalanche spot checks") {
    CHECK(mix64(0) != 0);
    CHECK(mix64(1) != mix64(2));
    std::set<uint64_t> seen;
    for (uint64_t i = 0; i < 1000; ++i) seen.insert(mix64(i));
    CHECK(seen.size() == 1000);
}
