#pragma once

#include <Eigen/Dense>

#include "slasf/errors.hpp"

namespace slasf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thresholds for every rank, residual and membership decision in the library.
// A single instance is passed explicitly through all calls.
struct TolerancePolicy {
    double rank_rel_tol = 1e-10;  // singular values <= rank_rel_tol * sigma_max count as zero
    double residual_tol = 1e-8;   // equation residuals
    double angle_tol = 1e-8;      // relative distance for subspace membership

    // Throws ValidationError unless all thresholds are strictly positive.
    void validate() const;
};

// Subspace of R^ambient_dim represented by an orthonormal basis (ambient_dim x d).
// d == 0 is an empty basis with ambient_dim rows.
class SubspaceBasis {
public:
    explicit SubspaceBasis(Eigen::Index ambient_dim = 0);
    // `basis` must already have orthonormal columns.
    SubspaceBasis(Eigen::Index ambient_dim, Matrix basis);

    static SubspaceBasis full(Eigen::Index ambient_dim);

    Eigen::Index ambient_dim() const noexcept { return ambient_dim_; }
    Eigen::Index dim() const noexcept { return basis_.cols(); }
    const Matrix& basis() const noexcept { return basis_; }

    // Orthogonal projector basis * basis'.
    Matrix projector() const;

private:
    Eigen::Index ambient_dim_;
    Matrix basis_;
};

// Singular-value view of one rank decision.
struct RankDecision {
    Eigen::Index rank = 0;
    // Ratio sigma_rank / sigma_max of the smallest retained singular value (1 if rank 0).
    double smallest_kept_ratio = 1.0;
    // Ratio of the largest discarded singular value to sigma_max (0 if none discarded).
    double largest_dropped_ratio = 0.0;
};

RankDecision rank_decision(const Matrix& m, const TolerancePolicy& pol);

// Same, with the threshold taken relative to max(sigma_max, reference_scale). Used when M is a
// projection of a larger matrix and may have collapsed to rounding noise.
RankDecision rank_decision(const Matrix& m, const TolerancePolicy& pol, double reference_scale);

Eigen::Index numeric_rank(const Matrix& m, const TolerancePolicy& pol);

// Orthonormal basis of ker M; dimension cols(M) - numeric_rank(M).
SubspaceBasis null_space(const Matrix& m, const TolerancePolicy& pol);

// Columns completing the unit vector v to an orthogonal matrix [v | U].
Matrix unitary_complement(const Vector& v, const TolerancePolicy& pol);

SubspaceBasis image_basis(const Matrix& m, const TolerancePolicy& pol);
SubspaceBasis image_basis(const Matrix& m, const TolerancePolicy& pol, double reference_scale);

SubspaceBasis orthogonal_complement(const SubspaceBasis& s, const TolerancePolicy& pol);

SubspaceBasis intersect(const SubspaceBasis& s1, const SubspaceBasis& s2,
                        const TolerancePolicy& pol);

SubspaceBasis sum(const SubspaceBasis& s1, const SubspaceBasis& s2, const TolerancePolicy& pol);

// {x : A x in S}.
SubspaceBasis preimage(const Matrix& a, const SubspaceBasis& s, const TolerancePolicy& pol);

bool contains_vector(const SubspaceBasis& s, const Vector& v, const TolerancePolicy& pol);

// s1 is a subspace of s2 (every basis vector of s1 lies in s2).
bool contains_subspace(const SubspaceBasis& s2, const SubspaceBasis& s1,
                       const TolerancePolicy& pol);

// Mutual containment.
bool same_subspace(const SubspaceBasis& s1, const SubspaceBasis& s2, const TolerancePolicy& pol);

// Moore-Penrose pseudo-inverse with the policy's rank threshold.
Matrix pseudo_inverse(const Matrix& m, const TolerancePolicy& pol);

}  // namespace slasf
