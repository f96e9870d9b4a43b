#include <doctest.h>

#include <array>
#include <utility>
#include <vector>

#include "qlab/clebsch.hpp"
#include "qlab/error.hpp"

using namespace qlab;

namespace {

std::vector<std::pair<int, int>> pairs(const std::vector<ClassSolution>& v) {
    std::vector<std::pair<int, int>> out;
    for (const auto& s : v) out.emplace_back(s.k, s.m);
    return out;
}

using P = std::vector<std::pair<int, int>>;

}  // namespace

TEST_CASE("enumeration examples") {
    CHECK(pairs(enumerate_class_solutions(1)) == P{{0, 1}});
    CHECK(pairs(enumerate_class_solutions(2)) == P{{1, 2}, {3, 1}});
    CHECK(pairs(enumerate_class_solutions(3)) == P{{0, 4}, {2, 3}, {4, 2}, {6, 1}});
    CHECK(pairs(enumerate_class_solutions(1, true)) == P{{0, 1}, {2, 0}});
    CHECK_THROWS_AS(enumerate_class_solutions(0), ConfigError);
}

TEST_CASE("regular solution examples") {
    for (auto [N, k, m] : std::array<std::array<int, 3>, 3>{{{1, 0, 1}, {2, 1, 2}, {5, 4, 5}}}) {
        const ClassSolution s = regular_solution(N);
        CHECK(s.k == k);
        CHECK(s.m == m);
        CHECK(s.regular);
        CHECK_FALSE(s.maximal_redundancy);
    }
}

TEST_CASE("variable count examples") {
    CHECK(variable_count(regular_solution(1)) == 4);
    CHECK(variable_count(regular_solution(3)) == 8);
    for (int N : {1, 4, 9}) {
        const auto all = enumerate_class_solutions(N, true);
        CHECK(all.back().maximal_redundancy);
        CHECK(variable_count(all.back()) == 2);
    }
}

TEST_CASE("parity check examples") {
    for (int N : {1, 2, 7}) {
        const ParityVerdict v = parity_check(N);
        CHECK(v.representation == "odd");
        CHECK(v.reason.find("N = 1") != std::string::npos);
    }
}

TEST_CASE("every solution satisfies the class equation and flags") {
    for (int N = 1; N <= 100; ++N) {
        for (const auto& s : enumerate_class_solutions(N, true)) {
            CHECK(s.n - s.k - 2 * s.m - 1 == 0);
            CHECK(s.k >= 0);
            CHECK(s.k <= s.n - 1);
            CHECK(s.regular == (s.k == N - 1 && s.m == N));
            CHECK(s.maximal_redundancy == (s.m == 0 && s.k == s.n - 1));
        }
    }
}

TEST_CASE("enumeration matches a brute-force scan") {
    for (int N = 1; N <= 50; ++N) {
        const int n = 3 * N;
        P scan;
        for (int k = 0; k <= n; ++k)
            for (int m = 1; m <= n; ++m)
                if (n - k == 2 * m + 1 && k <= n - 1) scan.emplace_back(k, m);
        CHECK(pairs(enumerate_class_solutions(N)) == scan);
        CHECK(static_cast<int>(scan.size()) == (n - 1) / 2);
    }
}

TEST_CASE("regular variable count grows by two") {
    for (int N = 1; N < 100; ++N) CHECK(variable_count(regular_solution(N + 1)) - variable_count(regular_solution(N)) == 2);
}

TEST_CASE("invalid class solutions are rejected") {
    CHECK_THROWS_AS(make_class_solution(1, 1, 1), ConfigError);
    CHECK_THROWS_AS(make_class_solution(2, 6, 0), ConfigError);
    CHECK_NOTHROW(make_class_solution(2, 5, 0));
}
