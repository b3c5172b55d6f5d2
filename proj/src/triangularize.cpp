#include "slasf/triangularize.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "slasf/seeds.hpp"
#include "slasf/structural.hpp"

namespace slasf {

EigenvalueSchedule EigenvalueSchedule::constant(double lambda) {
    EigenvalueSchedule s;
    s.values_ = Matrix::Constant(1, 1, lambda);
    return s;
}

EigenvalueSchedule EigenvalueSchedule::per_iteration(std::vector<double> lambdas) {
    EigenvalueSchedule s;
    s.values_ = Eigen::Map<const Vector>(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
    return s;
}

EigenvalueSchedule EigenvalueSchedule::table(Matrix lambdas) {
    EigenvalueSchedule s;
    s.values_ = std::move(lambdas);
    s.table_ = true;
    return s;
}

Vector EigenvalueSchedule::at(int ell, int count) const {
    const Eigen::Index row = values_.rows() == 1 ? 0 : ell - 1;
    if (row >= values_.rows()) {
        throw ValidationError("eigenvalue schedule has no entry for iteration " + std::to_string(ell));
    }
    if (table_) {
        if (values_.cols() != count) {
            throw ValidationError("eigenvalue table has " + std::to_string(values_.cols()) +
                                  " columns for " + std::to_string(count) + " subsystems");
        }
        return values_.row(row).transpose();
    }
    return Vector::Constant(count, values_(row, 0));
}

void EigenvalueSchedule::validate(Eigen::Index n, int count) const {
    if (values_.size() == 0) throw ValidationError("eigenvalue schedule is empty");
    if (values_.rows() != 1 && values_.rows() < n) {
        throw ValidationError("eigenvalue schedule covers " + std::to_string(values_.rows()) +
                              " iterations, need " + std::to_string(n));
    }
    if (table_ && values_.cols() != count) {
        throw ValidationError("eigenvalue table has " + std::to_string(values_.cols()) +
                              " columns for " + std::to_string(count) + " subsystems");
    }
    for (Eigen::Index k = 0; k < values_.size(); ++k) {
        const double v = values_.data()[k];
        if (!(std::abs(v) < 1.0)) {
            std::ostringstream msg;
            msg << "eigenvalue " << v << " is not inside (-1, 1)";
            throw ValidationError(msg.str());
        }
    }
}

DesignFailed::DesignFailed(int ell, std::string cause, std::vector<IterationRecord> partial)
    : Error("design failed at iteration " + std::to_string(ell) + ": " + cause),
      ell_(ell),
      cause_(std::move(cause)),
      partial_(std::move(partial)) {}

Reduction reduce_dimension(const std::vector<Matrix>& a_cl, const std::vector<Matrix>& b,
                           const Vector& v1, const TolerancePolicy& pol) {
    if (a_cl.size() != b.size()) throw DimensionError("reduce_dimension: list lengths differ");
    const Eigen::Index n = v1.size();
    if (n < 2) throw DimensionError("reduce_dimension: nothing to reduce below dimension 2");
    for (size_t i = 0; i < a_cl.size(); ++i) {
        if (a_cl[i].rows() != n || a_cl[i].cols() != n || b[i].rows() != n) {
            throw DimensionError("reduce_dimension: subsystem " + std::to_string(i + 1) +
                                 " does not match the eigenvector length");
        }
        const double lambda = v1.dot(a_cl[i] * v1) / v1.squaredNorm();
        const double residual = (a_cl[i] * v1 - lambda * v1).norm();
        if (!(residual <= pol.residual_tol)) {
            throw Error("reduce_dimension: v1 is not an eigenvector of closed-loop matrix " +
                        std::to_string(i + 1) + " (residual " + std::to_string(residual) + ")");
        }
    }
    Reduction r;
    r.u = unitary_complement(v1, pol);
    const Matrix ut = r.u.transpose();
    for (size_t i = 0; i < a_cl.size(); ++i) {
        r.a_next.push_back(ut * a_cl[i] * r.u);
        r.b_next.push_back(ut * b[i]);
    }
    return r;
}

Matrix accumulate_gain(const Matrix& k_prev, const Matrix& f, const Matrix& u_product) {
    if (f.rows() != k_prev.rows() || u_product.rows() != k_prev.cols() ||
        u_product.cols() != f.cols()) {
        throw DimensionError("accumulate_gain: shapes K " + std::to_string(k_prev.rows()) + "x" +
                             std::to_string(k_prev.cols()) + ", F " + std::to_string(f.rows()) +
                             "x" + std::to_string(f.cols()) + ", U " +
                             std::to_string(u_product.rows()) + "x" +
                             std::to_string(u_product.cols()) + " are inconsistent");
    }
    return k_prev + f * u_product.transpose();
}

Matrix assemble_transformation(const std::vector<Vector>& v1_list, const std::vector<Matrix>& u_list,
                               const TolerancePolicy& pol) {
    const auto n = static_cast<Eigen::Index>(v1_list.size());
    if (n == 0) throw DimensionError("assemble_transformation: no iterations");
    if (static_cast<Eigen::Index>(u_list.size()) != n - 1) {
        throw DimensionError("assemble_transformation: need one complement per reduction");
    }
    Matrix t(n, n);
    Matrix product = Matrix::Identity(n, n);
    for (Eigen::Index ell = 0; ell < n; ++ell) {
        const Vector& v = v1_list[static_cast<size_t>(ell)];
        if (v.size() != n - ell || product.cols() != n - ell) {
            throw DimensionError("assemble_transformation: iteration " + std::to_string(ell + 1) +
                                 " has inconsistent dimensions");
        }
        t.col(ell) = product * v;
        if (ell + 1 < n) {
            const Matrix& u = u_list[static_cast<size_t>(ell)];
            if (u.rows() != n - ell || u.cols() != n - ell - 1) {
                throw DimensionError("assemble_transformation: complement " +
                                     std::to_string(ell + 1) + " has wrong shape");
            }
            product = product * u;
        }
    }
    const double defect = (t.transpose() * t - Matrix::Identity(n, n)).norm();
    if (!(defect <= pol.residual_tol)) {
        throw Error("assemble_transformation: result is not orthogonal (defect " +
                    std::to_string(defect) + ")");
    }
    return t;
}

namespace {

SubspaceBasis intersection_of_images(const std::vector<InputFactor>& factors, Eigen::Index n,
                                     const TolerancePolicy& pol) {
    SubspaceBasis meet = SubspaceBasis::full(n);
    for (const auto& f : factors) meet = intersect(meet, SubspaceBasis(n, f.b), pol);
    return meet;
}

// Checks how the assignable subspaces change across one deflation step.
void check_subspace_evolution(int ell, const std::vector<SubspaceBasis>& before,
                              const std::vector<bool>& v1_in_before,
                              const std::vector<Matrix>& a_next, const std::vector<Matrix>& b_next,
                              const Matrix& u, const TolerancePolicy& pol,
                              std::vector<std::string>& violations) {
    const Matrix ut = u.transpose();
    const Eigen::Index n_next = u.cols();
    for (size_t i = 0; i < before.size(); ++i) {
        const std::string where =
            "iteration " + std::to_string(ell) + ", subsystem " + std::to_string(i + 1) + ": ";
        const SubspaceBasis after = assignable_subspace(a_next[i], b_next[i], pol);
        const SubspaceBasis projected = image_basis(ut * before[i].basis(), pol, 1.0);
        if (!contains_subspace(after, projected, pol)) {
            violations.push_back(where + "projected assignable subspace not contained in the next one");
        }
        const Eigen::Index rho = before[i].dim();
        if (v1_in_before[i] && after.dim() != rho - 1) {
            violations.push_back(where + "rho did not drop by one although v1 was assignable");
        }
        if (!v1_in_before[i] && after.dim() < rho) {
            violations.push_back(where + "rho decreased although v1 was not assignable");
        }
        SubspaceBasis reach = image_basis(b_next[i], pol, 1.0);
        for (Eigen::Index k = 0; k < n_next && reach.dim() < n_next; ++k) {
            reach = sum(reach, image_basis(a_next[i] * reach.basis(), pol, a_next[i].norm()), pol);
        }
        if (reach.dim() != n_next) {
            violations.push_back(where + "reduced pair lost controllability");
        }
    }
}

}  // namespace

DesignResult design(const SwitchedSystem& sys, const DesignConfig& cfg, const TolerancePolicy& pol) {
    pol.validate();
    const Eigen::Index n = sys.n();
    const int count = sys.count();
    cfg.schedule.validate(n, count);
    if (cfg.probe_budget < 1) throw ValidationError("probe budget must be at least 1");
    if (cfg.kernel_index < 0) throw ValidationError("kernel index must be non-negative");

    std::vector<Matrix> a_int;
    std::vector<Matrix> b_int;
    std::vector<Matrix> gains;
    std::vector<double> b_scales;
    for (const auto& s : sys.subsystems()) {
        a_int.push_back(s.a);
        b_int.push_back(s.b);
        gains.push_back(Matrix::Zero(s.b.cols(), n));
        b_scales.push_back(s.b.norm());
    }

    DesignResult result;
    Matrix u_product = Matrix::Identity(n, n);
    Matrix assigned(n, count);
    const CeaOptions opts{cfg.kernel_index};

    for (int ell = 1; ell <= n; ++ell) {
        const Eigen::Index n_ell = n - ell + 1;
        IterationRecord rec;
        rec.ell = ell;
        rec.n_ell = n_ell;

        CeaInput input{a_int, b_int, cfg.schedule.at(ell, count), b_scales};
        std::vector<InputFactor> factors;
        for (int i = 0; i < count; ++i) {
            factors.push_back(factor_input_matrix(b_int[static_cast<size_t>(i)], pol,
                                                  b_scales[static_cast<size_t>(i)]));
            rec.m_ranks.push_back(factors.back().rank);
        }
        rec.p_ell = compute_p(n_ell, rec.m_ranks, count);
        rec.lambda = input.lambda;

        std::vector<SubspaceBasis> assignable;
        if (cfg.diagnostic_subspaces) {
            for (int i = 0; i < count; ++i) {
                assignable.push_back(assignable_subspace(a_int[static_cast<size_t>(i)],
                                                         b_int[static_cast<size_t>(i)], pol));
                rec.rho.push_back(assignable.back().dim());
            }
        }

        CeaOutput out;
        try {
            if (rec.p_ell > 0) {
                out = cea(input, pol, opts);
            } else {
                out = cea_with_probe(input, pol, cfg.probe_budget,
                                     derive_seed(cfg.seed, static_cast<std::uint64_t>(ell)), opts);
            }
        } catch (const KernelEmptyAllProbes& e) {
            rec.probe_attempts = e.attempts() + 1;
            result.records.push_back(rec);
            throw DesignFailed(ell, "kernel empty at iteration " + std::to_string(ell) + " after " +
                                        std::to_string(e.attempts()) + " probes",
                               std::move(result.records));
        } catch (const KernelEmpty& e) {
            result.records.push_back(rec);
            throw DesignFailed(ell, "kernel empty at iteration " + std::to_string(ell) + " (p = " +
                                        std::to_string(rec.p_ell) + ")",
                               std::move(result.records));
        } catch (const NumericalResidual& e) {
            result.records.push_back(rec);
            throw DesignFailed(ell, e.what(), std::move(result.records));
        }

        rec.lambda = out.lambda;
        rec.v1 = out.v1;
        rec.f = out.f;
        rec.kernel_dim = out.kernel_dim;
        rec.residuals = out.residuals;
        rec.probed = out.probed;
        rec.probe_attempts = out.attempts;
        rec.v1_in_all_images = contains_vector(intersection_of_images(factors, n_ell, pol), out.v1, pol);
        for (const auto& f : factors) {
            rec.v1_in_image.push_back(contains_vector(SubspaceBasis(n_ell, f.b), out.v1, pol));
        }
        for (const auto& s : assignable) rec.v1_in_assignable.push_back(contains_vector(s, out.v1, pol));

        std::vector<Matrix> a_cl;
        for (int i = 0; i < count; ++i) {
            const auto k = static_cast<size_t>(i);
            a_cl.push_back(a_int[k] + b_int[k] * out.f[k]);
            gains[k] = accumulate_gain(gains[k], out.f[k], u_product);
        }
        assigned.row(ell - 1) = out.lambda.transpose();
        result.v1_list.push_back(out.v1);

        if (ell < n) {
            Reduction red = reduce_dimension(a_cl, b_int, out.v1, pol);
            if (cfg.diagnostic_subspaces) {
                check_subspace_evolution(ell, assignable, rec.v1_in_assignable, red.a_next,
                                         red.b_next, red.u, pol, result.diagnostic_violations);
            }
            u_product = u_product * red.u;
            a_int = std::move(red.a_next);
            b_int = std::move(red.b_next);
            result.u_list.push_back(std::move(red.u));
        }
        result.records.push_back(std::move(rec));
    }

    result.design.gains = std::move(gains);
    result.design.assigned_eigenvalues = std::move(assigned);
    result.design.transformation = assemble_transformation(result.v1_list, result.u_list, pol);
    return result;
}

}  // namespace slasf
