#include "qlab/clebsch.hpp"

#include <algorithm>

#include "qlab/error.hpp"

namespace qlab {

ClassSolution make_class_solution(int N, int k, int m) {
    if (N < 1) throw ConfigError("particle count must be at least 1");
    const int n = 3 * N;
    if (k < 0 || k > n - 1 || m < 0 || n - k != 2 * m + 1)
        throw ConfigError("(k, m) does not satisfy n - k = 2m + 1 with 0 <= k <= n - 1");
    ClassSolution s;
    s.N = N;
    s.n = n;
    s.k = k;
    s.m = m;
    s.regular = k == N - 1 && m == N;
    s.maximal_redundancy = m == 0 && k == n - 1;
    return s;
}

std::vector<ClassSolution> enumerate_class_solutions(int N, bool include_maximal) {
    if (N < 1) throw ConfigError("particle count must be at least 1");
    const int n = 3 * N;
    std::vector<ClassSolution> out;
    for (int k = (n - 1) % 2; k <= n - 1; k += 2) {
        const int m = (n - k - 1) / 2;
        if (m == 0 && !include_maximal) continue;
        out.push_back(make_class_solution(N, k, m));
    }
    return out;
}

ClassSolution regular_solution(int N) {
    ClassSolution s = make_class_solution(N, N - 1, N);
    const auto all = enumerate_class_solutions(N);
    if (std::find(all.begin(), all.end(), s) == all.end()) throw Error("regular solution missing from enumeration");
    return s;
}

int variable_count(const ClassSolution& sol) { return 2 * sol.m + 2; }

ParityVerdict parity_check(int N) {
    if (N < 1) throw ConfigError("particle count must be at least 1");
    return {"odd",
            "the even representation needs at least three fields for a single particle (N = 1) and so cannot "
            "hold for every N; the odd representation holds for all N"};
}

}  // namespace qlab
