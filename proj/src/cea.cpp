#include "slasf/cea.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace slasf {

namespace {

void check_input(const CeaInput& input) {
    const size_t count = input.a.size();
    if (count == 0) throw DimensionError("cea: no subsystems");
    if (input.b.size() != count || static_cast<size_t>(input.lambda.size()) != count) {
        throw DimensionError("cea: A, B and lambda lists differ in length");
    }
    if (!input.b_scales.empty() && input.b_scales.size() != count) {
        throw DimensionError("cea: b_scales length differs from subsystem count");
    }
    const Eigen::Index n = input.a.front().rows();
    for (size_t i = 0; i < count; ++i) {
        if (input.a[i].rows() != n || input.a[i].cols() != n || input.b[i].rows() != n) {
            throw DimensionError("cea: subsystem " + std::to_string(i + 1) +
                                 " does not share the internal dimension " + std::to_string(n));
        }
    }
}

std::vector<InputFactor> factor_all(const CeaInput& input, const TolerancePolicy& pol) {
    std::vector<InputFactor> factors;
    factors.reserve(input.b.size());
    for (size_t i = 0; i < input.b.size(); ++i) {
        const double scale = input.b_scales.empty() ? 0.0 : input.b_scales[i];
        factors.push_back(factor_input_matrix(input.b[i], pol, scale));
    }
    return factors;
}

CeaOutput solve(const CeaInput& input, const std::vector<InputFactor>& factors,
                const TolerancePolicy& pol, const CeaOptions& opts) {
    for (Eigen::Index i = 0; i < input.lambda.size(); ++i) {
        if (!(std::abs(input.lambda(i)) < 1.0)) {
            std::ostringstream msg;
            msg << "cea: eigenvalue " << input.lambda(i) << " for subsystem " << i + 1
                << " is not inside the unit disc";
            throw Error(msg.str());
        }
    }
    const Matrix q = build_q(input, factors);
    const SubspaceBasis kernel = null_space(q, pol);
    if (kernel.dim() == 0) {
        throw KernelEmpty("kernel of Q(Lambda) is trivial");
    }
    const Eigen::Index pick = std::min(opts.kernel_index, kernel.dim() - 1);
    Vector w = kernel.basis().col(kernel.dim() - 1 - pick);

    const Eigen::Index n = input.a.front().rows();
    const double vnorm = w.head(n).norm();
    if (!(vnorm > pol.rank_rel_tol * w.norm())) {
        throw NumericalResidual("cea: state part of the kernel vector vanished");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(w(k)) > pol.rank_rel_tol * vnorm) {
            if (w(k) < 0.0) w = -w;
            break;
        }
    }

    CeaOutput out;
    out.w = w;
    out.v1 = w.head(n) / vnorm;
    out.f = feedbacks_from_kernel_vector(w, factors, input.b, pol);
    out.kernel_dim = kernel.dim();
    out.lambda = input.lambda;
    out.factors = factors;
    for (size_t i = 0; i < input.a.size(); ++i) {
        const Vector r = (input.a[i] + input.b[i] * out.f[i]) * out.v1 -
                         input.lambda(static_cast<Eigen::Index>(i)) * out.v1;
        out.residuals.push_back(r.norm());
    }
    for (size_t i = 0; i < out.residuals.size(); ++i) {
        if (!(out.residuals[i] <= pol.residual_tol)) {
            throw NumericalResidual("cea: eigen-equation residual " +
                                    std::to_string(out.residuals[i]) + " for subsystem " +
                                    std::to_string(i + 1) + " exceeds tolerance");
        }
    }
    return out;
}

}  // namespace

InputFactor factor_input_matrix(const Matrix& b, const TolerancePolicy& pol,
                                double reference_scale) {
    InputFactor f;
    f.b = Matrix(b.rows(), 0);
    f.r = Matrix(0, b.cols());
    if (b.size() == 0) return f;
    Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    f.decision = rank_decision(b, pol, reference_scale);
    const Eigen::Index r = f.decision.rank;
    f.rank = r;
    Matrix u = svd.matrixU().leftCols(r);
    Matrix rt = svd.singularValues().head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    // Column signs: first significant entry of each b column positive.
    for (Eigen::Index c = 0; c < r; ++c) {
        for (Eigen::Index k = 0; k < u.rows(); ++k) {
            if (std::abs(u(k, c)) > pol.rank_rel_tol) {
                if (u(k, c) < 0.0) {
                    u.col(c) *= -1.0;
                    rt.row(c) *= -1.0;
                }
                break;
            }
        }
    }
    f.b = std::move(u);
    f.r = std::move(rt);
    return f;
}

Matrix build_q(const CeaInput& input, const std::vector<InputFactor>& factors) {
    check_input(input);
    if (factors.size() != input.a.size()) throw DimensionError("build_q: one factor per subsystem");
    const Eigen::Index n = input.a.front().rows();
    const auto count = static_cast<Eigen::Index>(input.a.size());
    Eigen::Index total_rank = 0;
    for (const auto& f : factors) {
        if (f.b.rows() != n) throw DimensionError("build_q: factor b has wrong row count");
        total_rank += f.b.cols();
    }
    Matrix q = Matrix::Zero(count * n, n + total_rank);
    Eigen::Index col = n;
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto k = static_cast<size_t>(i);
        q.block(i * n, 0, n, n) = input.lambda(i) * Matrix::Identity(n, n) - input.a[k];
        q.block(i * n, col, n, factors[k].b.cols()) = -factors[k].b;
        col += factors[k].b.cols();
    }
    return q;
}

int compute_p(Eigen::Index n_ell, const std::vector<Eigen::Index>& m_ranks, int count) {
    Eigen::Index total = 0;
    for (auto m : m_ranks) total += m;
    return static_cast<int>(n_ell + total - count * n_ell);
}

std::vector<Matrix> feedbacks_from_kernel_vector(const Vector& w,
                                                 const std::vector<InputFactor>& factors,
                                                 const std::vector<Matrix>& b,
                                                 const TolerancePolicy& pol) {
    if (factors.size() != b.size()) throw DimensionError("feedbacks: one factor per subsystem");
    const Eigen::Index n = w.size() - [&] {
        Eigen::Index t = 0;
        for (const auto& f : factors) t += f.rank;
        return t;
    }();
    if (n <= 0) throw DimensionError("feedbacks: kernel vector too short");
    const Vector v = w.head(n);
    const double vv = v.squaredNorm();
    if (vv == 0.0) throw NumericalResidual("feedbacks: zero state part");
    const Eigen::RowVectorXd v_pinv = v.transpose() / vv;

    std::vector<Matrix> f;
    f.reserve(factors.size());
    Eigen::Index offset = n;
    for (size_t i = 0; i < factors.size(); ++i) {
        const Eigen::Index rank = factors[i].rank;
        const Vector u = w.segment(offset, rank);
        offset += rank;
        if (rank == 0) {
            f.push_back(Matrix::Zero(b[i].cols(), n));
        } else {
            f.push_back(pseudo_inverse(factors[i].r, pol) * u * v_pinv);
        }
    }
    return f;
}

CeaOutput cea(const CeaInput& input, const TolerancePolicy& pol, const CeaOptions& opts) {
    check_input(input);
    return solve(input, factor_all(input, pol), pol, opts);
}

CeaOutput cea_with_probe(const CeaInput& input, const TolerancePolicy& pol, int probe_budget,
                         std::uint64_t seed, const CeaOptions& opts) {
    if (probe_budget < 1) throw Error("cea_with_probe: probe budget must be at least 1");
    check_input(input);
    const std::vector<InputFactor> factors = factor_all(input, pol);
    try {
        return solve(input, factors, pol, opts);
    } catch (const KernelEmpty&) {
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> draw(-0.95, 0.95);
    CeaInput probe = input;
    for (int attempt = 1; attempt <= probe_budget; ++attempt) {
        for (Eigen::Index i = 0; i < probe.lambda.size(); ++i) probe.lambda(i) = draw(rng);
        try {
            CeaOutput out = solve(probe, factors, pol, opts);
            out.attempts = attempt + 1;
            out.probed = true;
            return out;
        } catch (const KernelEmpty&) {
        }
    }
    throw KernelEmptyAllProbes("kernel empty after " + std::to_string(probe_budget) + " probes",
                               probe_budget);
}

}  // namespace slasf
