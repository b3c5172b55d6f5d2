#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slasf/linalg.hpp"
#include "slasf/model.hpp"

namespace slasf {

// {v : v in img B and A v in img B}: the eigenvectors inside img B that feedback can assign
// with any eigenvalue.
SubspaceBasis assignable_subspace(const Matrix& a, const Matrix& b, const TolerancePolicy& pol);

// Controllability indices of (A, B) by the greedy chain construction over b_1..b_m, Ab_1..Ab_m, ...
// One index per independent input direction; they sum to n. Throws ValidationError when the pair
// is not controllable.
std::vector<int> controllability_indices(const Matrix& a, const Matrix& b,
                                         const TolerancePolicy& pol);

// Two independent counts of the unit controllability indices.
struct RhoFromIndices {
    int unit_indices = 0;  // number of controllability indices equal to 1
    int rank_formula = 0;  // 2 rank(B) - rank[beta, A beta], img beta = img B
    // log10 distance of the [beta, A beta] rank decision from the threshold (large is safe).
    double rank_margin = 0.0;

    bool agree() const noexcept { return unit_indices == rank_formula; }
};

RhoFromIndices rho_via_indices(const Matrix& a, const Matrix& b, const TolerancePolicy& pol);

struct SubsetDims {
    std::vector<int> members;  // 0-based subspace indices
    Eigen::Index intersection_dim = 0;
    Eigen::Index expected_intersection = 0;
    Eigen::Index sum_dim = 0;
    Eigen::Index expected_sum = 0;

    bool ok() const noexcept {
        return intersection_dim == expected_intersection && sum_dim == expected_sum;
    }
};

struct TransversalityResult {
    bool transverse = false;
    std::vector<SubsetDims> subsets;  // every nonempty subset, ordered by bitmask
    // Inductive cross-check: each prefix set {S_1..S_k} extended by S_{k+1} keeps
    // (intersection of the prefix) + S_{k+1} equal to the whole space. Only meaningful when p >= 0.
    bool inductive_check = false;
    double rank_margin = 0.0;  // smallest log10 gap of any sum rank decision from the threshold
};

// Exhaustive check over all 2^N - 1 subsets; N <= 12.
TransversalityResult transversality_check(const std::vector<SubspaceBasis>& subspaces,
                                          const TolerancePolicy& pol);

struct GenericityReport {
    std::vector<Eigen::Index> rho;           // dim of the assignable subspace per subsystem
    std::vector<int> rho_from_indices;       // same, from the unit controllability indices
    std::vector<std::optional<int>> rho_expected;  // m_i - (n mod m_i) when m_i > n/2
    int q1 = 0;
    bool transverse = false;
    bool verdict = false;                    // transverse and q1 >= 0
    std::vector<SubsetDims> per_subset_dims;
    bool routes_agree = true;                // subspace and index routes give the same rho
    double rank_margin = 0.0;                // smallest log10 gap of the rank decisions involved
};

GenericityReport genericity_precheck(const SwitchedSystem& sys, const TolerancePolicy& pol);

// Laws a triangularisation trace must obey. Each vector lists human-readable violations.
struct TraceCheck {
    // m_i drops by at most one per iteration, and by exactly one iff v1 lies in img B_i.
    std::vector<std::string> rank_evolution;
    // p_{l+1} >= p_l - 1 with equality iff v1 lies in the intersection of all img B_i.
    std::vector<std::string> p_step;
    // p_l > 0 implies p_q > 0 for q = l .. l + p_l - 1.
    std::vector<std::string> positive_window;
    // p_l > 0 and v1 outside some img B_k implies p_{l+1} > 0.
    std::vector<std::string> escape;

    bool ok() const noexcept {
        return rank_evolution.empty() && p_step.empty() && positive_window.empty() && escape.empty();
    }
};

TraceCheck check_trace(const std::vector<IterationRecord>& records);

}  // namespace slasf
