#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slasf/model.hpp"

namespace slasf {

class CqlfNotFound : public Error {
public:
    CqlfNotFound(const std::string& what, double best_margin)
        : Error(what), best_margin_(best_margin) {}
    double best_margin() const noexcept { return best_margin_; }

private:
    double best_margin_;
};

struct Cqlf {
    Matrix p;            // T diag(weights) T', symmetric positive definite
    Matrix t;            // triangularising frame
    Vector weights;      // delta^(n-1), ..., delta, 1 unless adaptive
    double delta = 1.0;  // 0 when adaptive
    bool adaptive = false;
    // 1 - max_i ||S T' A_i T S^-1||_2^2 with S = diag(weights)^(1/2): the guaranteed relative
    // decrease of V per step.
    double contraction = 0.0;
    // Certified lower bound on min_i lambda_min(P - A_i' P A_i): contraction * min(weights).
    double margin = 0.0;

    // x' P x evaluated as ||S T' x||^2, which stays accurate when P is badly conditioned.
    double value(const Vector& x) const;
};

// Common quadratic Lyapunov function for matrices that the orthogonal T brings to upper
// triangular form: P = T D T' with D = diag(delta^(n-1), ..., delta, 1), delta the largest value
// in 1, 1e-1, ..., 1e-12 whose contraction exceeds 1e-10. If no delta qualifies, D is built
// row by row from the couplings of T' A_i T (adaptive). Since P - A' P A is congruent to
// S (I - C'C) S with C = S T' A T S^-1, the certificate is the singular value ||C||_2 < 1.
// Throws CqlfNotFound with the best margin seen.
Cqlf construct_cqlf(const std::vector<Matrix>& a_cl, const Matrix& t, const TolerancePolicy& pol);

struct VerificationReport {
    std::vector<double> spectral_radii;
    // Assigned eigenvalues against the diagonal of T' A_i^cl T, matched as sorted multisets.
    double eigenvalue_match_error = 0.0;
    // Same comparison against a general eigenvalue solver; informational, since repeated
    // eigenvalues with nontrivial Jordan structure are ill-conditioned there.
    double eigensolver_match_error = 0.0;
    double triangularity_residual = 0.0;
    double orthogonality_defect = 0.0;
    std::optional<Matrix> cqlf;
    double cqlf_delta = 0.0;
    bool cqlf_adaptive = false;
    double cqlf_margin = 0.0;
    double cqlf_contraction = 0.0;
    bool pass = false;
    std::vector<std::string> failures;
};

// Thresholds gating VerificationReport::pass.
struct VerifyThresholds {
    double triangularity = 1e-8;
    double eigenvalue_match = 1e-6;
};

// Strictly-lower-triangular Frobenius mass of T' A T divided by (1 + ||A||).
double triangularity_residual(const Matrix& a, const Matrix& t);

VerificationReport verify_design(const SwitchedSystem& sys, const FeedbackDesign& design,
                                 const TolerancePolicy& pol, const VerifyThresholds& thr = {});

// Switching sequence i(0), i(1), ... with 1-based subsystem indices.
struct SwitchingSignal {
    enum class Mode { fixed, uniform_random, round_robin, custom };

    std::vector<int> sequence;
    Mode mode = Mode::custom;
    std::uint64_t seed = 0;

    static SwitchingSignal fixed(int index, int steps);
    static SwitchingSignal uniform_random(int count, int steps, std::uint64_t seed);
    static SwitchingSignal round_robin(int count, int steps);
    static SwitchingSignal custom(std::vector<int> sequence);
};

std::string mode_name(SwitchingSignal::Mode mode);

struct Trajectory {
    std::vector<Vector> states;     // x_0 .. x_steps
    std::vector<Vector> controls;   // u_0 .. u_{steps-1}
    std::vector<int> switching;     // i(0) .. i(steps-1)
    std::vector<double> lyapunov;   // V_k = x_k' P x_k, empty when no CQLF was found
    std::optional<Cqlf> cqlf;
};

// x_{k+1} = (A_i + B_i K_i) x_k with i = i(k). Runs whether or not the design verifies; V_k is
// recorded when construct_cqlf succeeds on the design.
Trajectory simulate(const SwitchedSystem& sys, const FeedbackDesign& design,
                    const SwitchingSignal& signal, const Vector& x0, int steps,
                    const TolerancePolicy& pol);

// CSV with header k,i_k,x_1..x_n,V (i_k and V empty where undefined).
std::string trajectory_csv(const Trajectory& traj);

}  // namespace slasf
