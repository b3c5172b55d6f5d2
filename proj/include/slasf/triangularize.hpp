#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slasf/cea.hpp"
#include "slasf/model.hpp"

namespace slasf {

// Closed-loop eigenvalues requested at each iteration.
class EigenvalueSchedule {
public:
    // Same eigenvalue for every iteration and subsystem.
    static EigenvalueSchedule constant(double lambda);
    // One eigenvalue per iteration, shared by all subsystems; needs one entry per state dimension.
    static EigenvalueSchedule per_iteration(std::vector<double> lambdas);
    // Full table: row l holds the eigenvalues of iteration l + 1 for each subsystem.
    static EigenvalueSchedule table(Matrix lambdas);

    // Eigenvalues of iteration `ell` (1-based) for `count` subsystems.
    Vector at(int ell, int count) const;
    // Throws ValidationError if the schedule does not cover n iterations of `count` subsystems or
    // contains a value outside (-1, 1).
    void validate(Eigen::Index n, int count) const;

private:
    Matrix values_ = Matrix::Constant(1, 1, 0.5);
    bool table_ = false;
};

struct DesignConfig {
    EigenvalueSchedule schedule = EigenvalueSchedule::constant(0.5);
    Eigen::Index kernel_index = 0;
    int probe_budget = 25;
    std::uint64_t seed = 0;
    // Recompute the assignable subspaces at every iteration and check how they evolve.
    bool diagnostic_subspaces = false;
};

struct DesignResult {
    FeedbackDesign design;
    std::vector<IterationRecord> records;
    std::vector<Vector> v1_list;  // v_1^l, length n - l + 1
    std::vector<Matrix> u_list;   // U_{l+1}, (n_l) x (n_l - 1), for l = 1..n-1
    // Filled with diagnostic_subspaces: each entry describes a failed subspace-evolution check.
    std::vector<std::string> diagnostic_violations;
};

// CEA failed at iteration `ell`. The records of the completed iterations and a partial record of
// the failing one are attached.
class DesignFailed : public Error {
public:
    DesignFailed(int ell, std::string cause, std::vector<IterationRecord> partial);

    int ell() const noexcept { return ell_; }
    const std::string& cause() const noexcept { return cause_; }
    const std::vector<IterationRecord>& partial_trace() const noexcept { return partial_; }

private:
    int ell_;
    std::string cause_;
    std::vector<IterationRecord> partial_;
};

struct Reduction {
    std::vector<Matrix> a_next;
    std::vector<Matrix> b_next;
    Matrix u;
};

// Deflates every closed-loop matrix along its common eigenvector v1:
// A_next = U' A_cl U, B_next = U' B with [v1 | U] orthogonal.
Reduction reduce_dimension(const std::vector<Matrix>& a_cl, const std::vector<Matrix>& b,
                           const Vector& v1, const TolerancePolicy& pol);

// K_prev + F * U_product'.
Matrix accumulate_gain(const Matrix& k_prev, const Matrix& f, const Matrix& u_product);

// Column l of T is U_1 ... U_l v_1^l with U_1 = I.
Matrix assemble_transformation(const std::vector<Vector>& v1_list, const std::vector<Matrix>& u_list,
                               const TolerancePolicy& pol);

// Iterative triangularisation. Throws DesignFailed.
DesignResult design(const SwitchedSystem& sys, const DesignConfig& cfg, const TolerancePolicy& pol);

}  // namespace slasf
