#include "slasf/structural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace slasf {

namespace {

constexpr double kMarginCap = 20.0;

double decision_margin(const RankDecision& d, const TolerancePolicy& pol) {
    double margin = kMarginCap;
    if (d.rank > 0 && d.smallest_kept_ratio > 0.0) {
        margin = std::min(margin, std::log10(d.smallest_kept_ratio / pol.rank_rel_tol));
    }
    if (d.largest_dropped_ratio > 0.0) {
        margin = std::min(margin, std::log10(pol.rank_rel_tol / d.largest_dropped_ratio));
    }
    return margin;
}

}  // namespace

SubspaceBasis assignable_subspace(const Matrix& a, const Matrix& b, const TolerancePolicy& pol) {
    if (a.rows() != a.cols() || b.rows() != a.rows()) {
        throw DimensionError("assignable_subspace: A must be square with as many rows as B");
    }
    const SubspaceBasis image = image_basis(b, pol);
    return intersect(image, preimage(a, image, pol), pol);
}

std::vector<int> controllability_indices(const Matrix& a, const Matrix& b,
                                         const TolerancePolicy& pol) {
    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.cols();
    SubspaceBasis kept(n);
    std::vector<int> index(static_cast<size_t>(m), 0);
    std::vector<bool> alive(static_cast<size_t>(m), true);
    Matrix chain = b;

    // Chain j stops at its first vector lying in the span of everything kept before it; later
    // powers of that chain are then dependent as well.
    for (Eigen::Index k = 0; k < n && kept.dim() < n; ++k) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto jj = static_cast<size_t>(j);
            if (!alive[jj]) continue;
            Vector c = chain.col(j);
            const double norm = c.norm();
            if (norm == 0.0 || contains_vector(kept, c, pol)) {
                alive[jj] = false;
                continue;
            }
            c /= norm;
            chain.col(j) = c;
            const Vector residual = c - kept.basis() * (kept.basis().transpose() * c);
            Matrix grown(n, kept.dim() + 1);
            grown << kept.basis(), residual.normalized();
            kept = SubspaceBasis(n, grown);
            ++index[jj];
        }
        chain = a * chain;
    }
    if (kept.dim() != n) {
        throw ValidationError("controllability_indices: pair is not controllable (reachable dimension " +
                              std::to_string(kept.dim()) + " < " + std::to_string(n) + ")");
    }
    std::vector<int> out;
    for (int i : index) {
        if (i > 0) out.push_back(i);
    }
    return out;
}

RhoFromIndices rho_via_indices(const Matrix& a, const Matrix& b, const TolerancePolicy& pol) {
    RhoFromIndices r;
    const std::vector<int> idx = controllability_indices(a, b, pol);
    r.unit_indices = static_cast<int>(std::count(idx.begin(), idx.end(), 1));

    const SubspaceBasis beta = image_basis(b, pol);
    Matrix pair(a.rows(), 2 * beta.dim());
    pair << beta.basis(), a * beta.basis();
    const RankDecision d = rank_decision(pair, pol, std::max(1.0, a.norm()));
    r.rank_formula = static_cast<int>(2 * beta.dim() - d.rank);
    r.rank_margin = decision_margin(d, pol);
    return r;
}

TransversalityResult transversality_check(const std::vector<SubspaceBasis>& subspaces,
                                          const TolerancePolicy& pol) {
    TransversalityResult out;
    const auto count = static_cast<int>(subspaces.size());
    if (count == 0) throw DimensionError("transversality_check: no subspaces");
    if (count > 12) throw DimensionError("transversality_check: at most 12 subspaces");
    const Eigen::Index x = subspaces.front().ambient_dim();
    for (const auto& s : subspaces) {
        if (s.ambient_dim() != x) throw DimensionError("transversality_check: ambient mismatch");
    }

    out.rank_margin = kMarginCap;
    out.transverse = true;
    for (unsigned mask = 1; mask < (1u << count); ++mask) {
        SubsetDims row;
        SubspaceBasis meet = SubspaceBasis::full(x);
        Eigen::Index total = 0;
        Eigen::Index joined_cols = 0;
        for (int i = 0; i < count; ++i) {
            if (!(mask & (1u << i))) continue;
            row.members.push_back(i);
            meet = intersect(meet, subspaces[static_cast<size_t>(i)], pol);
            total += subspaces[static_cast<size_t>(i)].dim();
            joined_cols += subspaces[static_cast<size_t>(i)].dim();
        }
        Matrix joined(x, joined_cols);
        Eigen::Index col = 0;
        for (int i : row.members) {
            const Matrix& basis = subspaces[static_cast<size_t>(i)].basis();
            joined.middleCols(col, basis.cols()) = basis;
            col += basis.cols();
        }
        const RankDecision d = rank_decision(joined, pol, 1.0);
        out.rank_margin = std::min(out.rank_margin, decision_margin(d, pol));

        const auto size = static_cast<Eigen::Index>(row.members.size());
        row.intersection_dim = meet.dim();
        row.expected_intersection = std::max<Eigen::Index>(0, x + total - size * x);
        row.sum_dim = d.rank;
        row.expected_sum = std::min(x, total);
        out.transverse = out.transverse && row.ok();
        out.subsets.push_back(std::move(row));
    }

    out.inductive_check = true;
    SubspaceBasis prefix = subspaces.front();
    for (int k = 1; k < count; ++k) {
        if (sum(prefix, subspaces[static_cast<size_t>(k)], pol).dim() != x) {
            out.inductive_check = false;
        }
        prefix = intersect(prefix, subspaces[static_cast<size_t>(k)], pol);
    }
    return out;
}

GenericityReport genericity_precheck(const SwitchedSystem& sys, const TolerancePolicy& pol) {
    GenericityReport rep;
    const Eigen::Index n = sys.n();
    const int count = sys.count();
    std::vector<SubspaceBasis> spaces;
    rep.rank_margin = kMarginCap;
    Eigen::Index total = 0;
    for (const auto& s : sys.subsystems()) {
        spaces.push_back(assignable_subspace(s.a, s.b, pol));
        rep.rho.push_back(spaces.back().dim());
        total += spaces.back().dim();

        const RhoFromIndices via = rho_via_indices(s.a, s.b, pol);
        rep.rho_from_indices.push_back(via.unit_indices);
        rep.routes_agree = rep.routes_agree && via.agree() && via.unit_indices == spaces.back().dim();
        rep.rank_margin = std::min(rep.rank_margin, via.rank_margin);

        const Eigen::Index m = s.b.cols();
        if (2 * m > n) {
            rep.rho_expected.emplace_back(static_cast<int>(m - (n % m)));
        } else {
            rep.rho_expected.emplace_back(std::nullopt);
        }
    }
    rep.q1 = static_cast<int>(n + total - count * n);
    const TransversalityResult t = transversality_check(spaces, pol);
    rep.transverse = t.transverse;
    rep.per_subset_dims = t.subsets;
    rep.rank_margin = std::min(rep.rank_margin, t.rank_margin);
    rep.verdict = rep.transverse && rep.q1 >= 0;
    return rep;
}

TraceCheck check_trace(const std::vector<IterationRecord>& records) {
    TraceCheck out;
    const auto at = [](const IterationRecord& r) { return "iteration " + std::to_string(r.ell) + ": "; };
    for (size_t k = 0; k + 1 < records.size(); ++k) {
        const IterationRecord& cur = records[k];
        const IterationRecord& next = records[k + 1];
        for (size_t i = 0; i < cur.m_ranks.size() && i < next.m_ranks.size(); ++i) {
            const Eigen::Index drop = cur.m_ranks[i] - next.m_ranks[i];
            const bool in_image = i < cur.v1_in_image.size() && cur.v1_in_image[i];
            if (drop != 0 && drop != 1) {
                out.rank_evolution.push_back(at(cur) + "rank of B_" + std::to_string(i + 1) +
                                             " changed by " + std::to_string(-drop));
            } else if ((drop == 1) != in_image) {
                out.rank_evolution.push_back(at(cur) + "rank drop of B_" + std::to_string(i + 1) +
                                             " disagrees with image membership of v1");
            }
        }
        if (next.p_ell < cur.p_ell - 1) {
            out.p_step.push_back(at(cur) + "p fell from " + std::to_string(cur.p_ell) + " to " +
                                 std::to_string(next.p_ell));
        } else if ((next.p_ell == cur.p_ell - 1) != cur.v1_in_all_images) {
            out.p_step.push_back(at(cur) + "p step " + std::to_string(cur.p_ell) + " -> " +
                                 std::to_string(next.p_ell) +
                                 " disagrees with membership of v1 in every img B_i");
        }
        if (cur.p_ell > 0) {
            bool outside_some = false;
            for (bool in : cur.v1_in_image) outside_some = outside_some || !in;
            if (outside_some && next.p_ell <= 0) {
                out.escape.push_back(at(cur) + "v1 left some img B_k but p_{l+1} = " +
                                     std::to_string(next.p_ell));
            }
        }
    }
    for (size_t k = 0; k < records.size(); ++k) {
        const int p = records[k].p_ell;
        if (p <= 0) continue;
        for (size_t q = k; q < records.size() && q < k + static_cast<size_t>(p); ++q) {
            if (records[q].p_ell <= 0) {
                out.positive_window.push_back(at(records[k]) + "p = " + std::to_string(p) +
                                              " but p = " + std::to_string(records[q].p_ell) +
                                              " at iteration " + std::to_string(records[q].ell));
            }
        }
    }
    return out;
}

}  // namespace slasf
