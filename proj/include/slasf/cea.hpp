#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slasf/linalg.hpp"

namespace slasf {

// Common eigenvector assignment: given internal matrices (A_i, B_i) of a common dimension and one
// real eigenvalue per subsystem, find a unit v1 and feedbacks F_i with (A_i + B_i F_i) v1 = lambda_i v1.

class KernelEmpty : public Error {
public:
    using Error::Error;
};

class NumericalResidual : public Error {
public:
    using Error::Error;
};

class KernelEmptyAllProbes : public Error {
public:
    KernelEmptyAllProbes(const std::string& what, int attempts) : Error(what), attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

struct CeaInput {
    std::vector<Matrix> a;  // n_l x n_l each
    std::vector<Matrix> b;  // n_l x m_i each
    Vector lambda;          // one eigenvalue per subsystem, |lambda_i| < 1
    // Optional per-subsystem scale for the rank decision on b (see rank_decision). Empty means
    // each b is judged relative to its own largest singular value.
    std::vector<double> b_scales;
};

// B = b r with b orthonormal (n x rank) and r full row rank (rank x m).
struct InputFactor {
    Matrix b;
    Matrix r;
    Eigen::Index rank = 0;
    RankDecision decision;
};

struct CeaOutput {
    Vector v1;                    // unit common eigenvector, first significant entry positive
    std::vector<Matrix> f;        // F_i, m_i x n_l
    Vector w;                     // kernel vector (v, u_1, ..., u_N) after sign normalisation
    std::vector<double> residuals;
    Eigen::Index kernel_dim = 0;
    Vector lambda;                // eigenvalues actually assigned
    std::vector<InputFactor> factors;
    int attempts = 1;             // Lambda choices tried (probe variant)
    bool probed = false;          // true when lambda came from a random draw
};

struct CeaOptions {
    // Which kernel direction to use: 0 is the right singular vector with the smallest singular
    // value, 1 the next smallest, and so on. Clamped to the kernel dimension.
    Eigen::Index kernel_index = 0;
};

InputFactor factor_input_matrix(const Matrix& b, const TolerancePolicy& pol,
                                double reference_scale = 0.0);

// Q(Lambda) = [R(Lambda), -blkdiag(b_1, ..., b_N)] with R stacking lambda_i I - A_i.
Matrix build_q(const CeaInput& input, const std::vector<InputFactor>& factors);

// n_l + sum m_i - N n_l; may be negative.
int compute_p(Eigen::Index n_ell, const std::vector<Eigen::Index>& m_ranks, int count);

// Feedbacks from a kernel vector w = (v, u_1, ..., u_N): F_i = r_i^+ u_i v^+.
std::vector<Matrix> feedbacks_from_kernel_vector(const Vector& w,
                                                 const std::vector<InputFactor>& factors,
                                                 const std::vector<Matrix>& b,
                                                 const TolerancePolicy& pol);

// Throws KernelEmpty if Q(Lambda) is injective, NumericalResidual if an eigen-equation residual
// exceeds pol.residual_tol.
CeaOutput cea(const CeaInput& input, const TolerancePolicy& pol, const CeaOptions& opts = {});

// Tries input.lambda first, then up to probe_budget eigenvalue vectors drawn uniformly from
// (-0.95, 0.95)^N. Throws KernelEmptyAllProbes when none gives a nontrivial kernel.
CeaOutput cea_with_probe(const CeaInput& input, const TolerancePolicy& pol, int probe_budget,
                         std::uint64_t seed, const CeaOptions& opts = {});

}  // namespace slasf
