#pragma once

#include <string>
#include <vector>

namespace qlab {

// Admissible split of the n = 3N momentum components into k redundant ones and m Clebsch
// pairs, with n - k = 2m + 1.
struct ClassSolution {
    int N = 1;
    int n = 3;
    int k = 0;
    int m = 1;
    bool regular = false;
    bool maximal_redundancy = false;

    bool operator==(const ClassSolution&) const = default;
};

ClassSolution make_class_solution(int N, int k, int m);

// Sorted by k. The maximal-redundancy solution (m = 0, k = n - 1) only with include_maximal.
std::vector<ClassSolution> enumerate_class_solutions(int N, bool include_maximal = false);

ClassSolution regular_solution(int N);

// Clebsch potentials plus the density.
int variable_count(const ClassSolution& sol);

struct ParityVerdict {
    std::string representation;
    std::string reason;
};
ParityVerdict parity_check(int N);

}  // namespace qlab
