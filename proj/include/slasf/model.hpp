#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "slasf/linalg.hpp"

namespace slasf {

// One subsystem (A_i, B_i) of x_{k+1} = A_i x_k + B_i u_k.
struct Subsystem {
    Matrix a;
    Matrix b;
};

// Discrete-time switched linear system with N controllable subsystems sharing the state
// dimension n. Construction validates shapes, full column rank of every B_i and controllability
// of every pair; instances are immutable afterwards.
class SwitchedSystem {
public:
    SwitchedSystem(std::vector<Subsystem> subsystems, const TolerancePolicy& pol = {});

    Eigen::Index n() const noexcept { return n_; }
    int count() const noexcept { return static_cast<int>(subsystems_.size()); }
    const std::vector<Subsystem>& subsystems() const noexcept { return subsystems_; }
    const Subsystem& operator[](int i) const { return subsystems_.at(static_cast<size_t>(i)); }
    std::vector<Eigen::Index> input_dims() const;

private:
    Eigen::Index n_ = 0;
    std::vector<Subsystem> subsystems_;
};

// Controllability matrix [B, AB, ..., A^{n-1}B].
Matrix controllability_matrix(const Matrix& a, const Matrix& b);

// Stabilising switched feedback u_k = K_{i(k)} x_k together with its triangularisation witness.
struct FeedbackDesign {
    std::vector<Matrix> gains;     // K_i, m_i x n
    Matrix assigned_eigenvalues;   // n x N, entry (l, i) is the eigenvalue assigned at iteration l
    Matrix transformation;         // orthogonal T with T' A_i^cl T upper triangular
};

// Per-iteration trace of the triangularisation loop.
struct IterationRecord {
    int ell = 0;                       // 1-based iteration
    Eigen::Index n_ell = 0;            // internal dimension n - ell + 1
    Vector lambda;                     // eigenvalues assigned at this iteration, one per subsystem
    Vector v1;                         // unit common eigenvector
    std::vector<Matrix> f;             // F_i, m_i x n_ell
    std::vector<Eigen::Index> m_ranks; // rank of each internal B_i
    int p_ell = 0;
    Eigen::Index kernel_dim = 0;
    bool v1_in_all_images = false;     // v1 in the intersection of img B_i
    std::vector<bool> v1_in_image;     // v1 in img B_i, per subsystem
    std::vector<double> residuals;     // ||(A_i + B_i F_i) v1 - lambda_i v1||
    bool probed = false;               // eigenvalues came from the random kernel probe
    int probe_attempts = 0;

    // Filled only with diagnostic subspace checks enabled.
    std::vector<Eigen::Index> rho;     // dim S_i at this iteration
    std::vector<bool> v1_in_assignable;
};

// A_i + B_i K_i for every subsystem.
std::vector<Matrix> closed_loop(const SwitchedSystem& sys, const FeedbackDesign& design);

// JSON file formats. Loading validates the system; errors are ValidationError.
SwitchedSystem load_system(std::istream& in, const TolerancePolicy& pol = {});
SwitchedSystem load_system_file(const std::string& path, const TolerancePolicy& pol = {});
void save_system(std::ostream& out, const SwitchedSystem& sys);

FeedbackDesign load_design(std::istream& in);
FeedbackDesign load_design_file(const std::string& path);
void save_design(std::ostream& out, const FeedbackDesign& design);

}  // namespace slasf
