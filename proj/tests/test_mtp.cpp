#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ltest/error.hpp"
#include "ltest/mtp.hpp"

using namespace ltest;

namespace {

std::vector<bool> mask(std::initializer_list<int> bits) {
    std::vector<bool> out;
    for (int b : bits) out.push_back(b != 0);
    return out;
}

std::vector<std::size_t> ascending_order(const std::vector<double>& p) {
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    return idx;
}

// Adjusted p-value routes.
std::vector<bool> holm_by_adjusted(const std::vector<double>& p, double alpha) {
    const auto idx = ascending_order(p);
    const double m = static_cast<double>(p.size());
    std::vector<bool> out(p.size(), false);
    double running = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        running = std::max(running, std::min(1.0, (m - static_cast<double>(i)) * p[idx[i]]));
        out[idx[i]] = running <= alpha;
    }
    return out;
}

std::vector<bool> bh_by_adjusted(const std::vector<double>& p, double q) {
    const auto idx = ascending_order(p);
    const double m = static_cast<double>(p.size());
    std::vector<bool> out(p.size(), false);
    double running = 1.0;
    for (std::size_t i = idx.size(); i-- > 0;) {
        running = std::min(running, m * p[idx[i]] / static_cast<double>(i + 1));
        out[idx[i]] = running <= q;
    }
    return out;
}

}  // namespace

TEST_CASE("Holm hand examples") {
    CHECK(holm({0.01, 0.03, 0.04}, 0.05).rejected == mask({1, 0, 0}));
    CHECK(holm({1.0, 1.0, 1.0}, 0.05).rejected == mask({0, 0, 0}));
    CHECK(holm({0.05}, 0.05).rejected == mask({1}));
    CHECK(holm({0.0501}, 0.05).rejected == mask({0}));
    const AdjustedResults r = holm({0.04, 0.01, 0.03}, 0.05);
    CHECK(r.rejected == mask({0, 1, 0}));
    CHECK(r.raw == std::vector<double>{0.04, 0.01, 0.03});
    CHECK(r.procedure == Procedure::Holm);
    CHECK(r.level == 0.05);
}

TEST_CASE("BH hand examples") {
    CHECK(bh({0.01, 0.02, 0.05, 0.9}, 0.1).rejected == mask({1, 1, 1, 0}));
    CHECK(bh({0.2, 0.3}, 0.1).rejected == mask({0, 0}));
    CHECK(bh({0.001}, 0.1).rejected == mask({1}));
    // Step-up: a later pass rescues an earlier failure.
    CHECK(bh({0.04, 0.045, 0.05}, 0.05).rejected == mask({1, 1, 1}));
    CHECK(adjust({0.01, 0.02, 0.05, 0.9}, Procedure::Bh, 0.1).procedure == Procedure::Bh);
}

TEST_CASE("empty input") {
    CHECK(holm({}, 0.05).rejected.empty());
    CHECK(bh({}, 0.1).rejected.empty());
}

TEST_CASE("level and p-value validation") {
    for (double bad : {0.0, 1.0, -0.1, 1.5}) {
        try {
            (void)holm({0.1}, bad);
            FAIL("expected BadLevel");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::BadLevel);
        }
        CHECK_THROWS_AS(bh({0.1}, bad), Error);
    }
    CHECK_THROWS_AS(holm({0.1, 1.2}, 0.05), Error);
    CHECK_THROWS_AS(bh({-0.1}, 0.05), Error);
}

TEST_CASE("procedure names round trip") {
    for (Procedure p : {Procedure::Holm, Procedure::Bh}) CHECK(parse_procedure(to_string(p)) == p);
    CHECK_FALSE(parse_procedure("bonferroni").has_value());
}

TEST_CASE("procedures agree with adjusted p-value routes and are monotone") {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> size(1, 30);
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = size(gen);
        std::vector<double> p(static_cast<std::size_t>(m));
        // Mix of tiny signals, nulls and exact ties.
        for (auto& v : p) {
            const double u = unif(gen);
            v = u < 0.3 ? 0.01 * unif(gen) : u < 0.4 ? 0.02 : unif(gen);
        }
        const double level = trial % 2 ? 0.05 : 0.1;
        const auto h = holm(p, level).rejected;
        const auto b = bh(p, level).rejected;
        REQUIRE(h == holm_by_adjusted(p, level));
        REQUIRE(b == bh_by_adjusted(p, level));

        std::vector<double> lowered = p;
        for (auto& v : lowered)
            if (unif(gen) < 0.5) v *= unif(gen);
        const auto h2 = holm(lowered, level).rejected;
        const auto b2 = bh(lowered, level).rejected;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (h[i]) REQUIRE(h2[i]);
            if (b[i]) REQUIRE(b2[i]);
        }
    }
}
