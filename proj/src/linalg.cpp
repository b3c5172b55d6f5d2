#include "slasf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace slasf {

void TolerancePolicy::validate() const {
    if (!(rank_rel_tol > 0.0) || !(residual_tol > 0.0) || !(angle_tol > 0.0)) {
        throw ValidationError("tolerance policy thresholds must be strictly positive");
    }
}

SubspaceBasis::SubspaceBasis(Eigen::Index ambient_dim)
    : ambient_dim_(ambient_dim), basis_(ambient_dim, 0) {}

SubspaceBasis::SubspaceBasis(Eigen::Index ambient_dim, Matrix basis)
    : ambient_dim_(ambient_dim), basis_(std::move(basis)) {
    if (basis_.rows() != ambient_dim_) {
        throw DimensionError("subspace basis has " + std::to_string(basis_.rows()) +
                             " rows, ambient dimension is " + std::to_string(ambient_dim_));
    }
    if (basis_.cols() > ambient_dim_) {
        throw DimensionError("subspace basis has more columns than its ambient dimension");
    }
}

SubspaceBasis SubspaceBasis::full(Eigen::Index ambient_dim) {
    return SubspaceBasis(ambient_dim, Matrix::Identity(ambient_dim, ambient_dim));
}

Matrix SubspaceBasis::projector() const {
    return basis_ * basis_.transpose();
}

namespace {

struct Svd {
    Vector sigma;
    Matrix u;  // thin
    Matrix v;  // full
};

Svd full_svd(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeFullV);
    return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

RankDecision decide(const Vector& sigma, double threshold_scale, const TolerancePolicy& pol) {
    RankDecision d;
    if (sigma.size() == 0) return d;
    const double smax = sigma(0);
    const double scale = std::max(smax, threshold_scale);
    if (scale == 0.0) return d;
    const double threshold = pol.rank_rel_tol * scale;
    Eigen::Index r = 0;
    while (r < sigma.size() && sigma(r) > threshold) ++r;
    d.rank = r;
    d.smallest_kept_ratio = r > 0 ? sigma(r - 1) / scale : 1.0;
    d.largest_dropped_ratio = r < sigma.size() ? sigma(r) / scale : 0.0;
    return d;
}

}  // namespace

RankDecision rank_decision(const Matrix& m, const TolerancePolicy& pol) {
    return rank_decision(m, pol, 0.0);
}

RankDecision rank_decision(const Matrix& m, const TolerancePolicy& pol, double reference_scale) {
    if (m.size() == 0) return {};
    Eigen::JacobiSVD<Matrix> svd(m);
    return decide(svd.singularValues(), reference_scale, pol);
}

Eigen::Index numeric_rank(const Matrix& m, const TolerancePolicy& pol) {
    return rank_decision(m, pol).rank;
}

SubspaceBasis null_space(const Matrix& m, const TolerancePolicy& pol) {
    const Eigen::Index cols = m.cols();
    if (m.rows() == 0 || cols == 0) return SubspaceBasis::full(cols);
    const Svd svd = full_svd(m);
    const Eigen::Index r = decide(svd.sigma, 0.0, pol).rank;
    return SubspaceBasis(cols, svd.v.rightCols(cols - r));
}

Matrix unitary_complement(const Vector& v, const TolerancePolicy& pol) {
    const Eigen::Index n = v.size();
    if (n == 0) throw DimensionError("unitary_complement: empty vector");
    const double norm = v.norm();
    if (norm == 0.0 || std::abs(norm - 1.0) > pol.residual_tol) {
        throw Error("unitary_complement: vector is not of unit norm (norm " +
                    std::to_string(norm) + ")");
    }
    Eigen::HouseholderQR<Matrix> qr(v);
    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return q.rightCols(n - 1);
}

SubspaceBasis image_basis(const Matrix& m, const TolerancePolicy& pol) {
    return image_basis(m, pol, 0.0);
}

SubspaceBasis image_basis(const Matrix& m, const TolerancePolicy& pol, double reference_scale) {
    if (m.cols() == 0 || m.rows() == 0) return SubspaceBasis(m.rows());
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const Eigen::Index r = decide(svd.singularValues(), reference_scale, pol).rank;
    return SubspaceBasis(m.rows(), svd.matrixU().leftCols(r));
}

SubspaceBasis orthogonal_complement(const SubspaceBasis& s, const TolerancePolicy& pol) {
    if (s.dim() == 0) return SubspaceBasis::full(s.ambient_dim());
    return null_space(s.basis().transpose(), pol);
}

namespace {

void require_same_ambient(const SubspaceBasis& s1, const SubspaceBasis& s2, const char* op) {
    if (s1.ambient_dim() != s2.ambient_dim()) {
        throw DimensionError(std::string(op) + ": ambient dimensions differ (" +
                             std::to_string(s1.ambient_dim()) + " vs " +
                             std::to_string(s2.ambient_dim()) + ")");
    }
}

}  // namespace

SubspaceBasis intersect(const SubspaceBasis& s1, const SubspaceBasis& s2,
                        const TolerancePolicy& pol) {
    require_same_ambient(s1, s2, "intersect");
    const Eigen::Index n = s1.ambient_dim();
    if (s1.dim() == 0 || s2.dim() == 0) return SubspaceBasis(n);
    // Coefficient pairs (c1, c2) with basis1 c1 = basis2 c2.
    Matrix stacked(n, s1.dim() + s2.dim());
    stacked << s1.basis(), -s2.basis();
    const SubspaceBasis kernel = null_space(stacked, pol);
    if (kernel.dim() == 0) return SubspaceBasis(n);
    const Matrix vectors = s1.basis() * kernel.basis().topRows(s1.dim());
    return image_basis(vectors, pol);
}

SubspaceBasis sum(const SubspaceBasis& s1, const SubspaceBasis& s2, const TolerancePolicy& pol) {
    require_same_ambient(s1, s2, "sum");
    Matrix joined(s1.ambient_dim(), s1.dim() + s2.dim());
    joined << s1.basis(), s2.basis();
    return image_basis(joined, pol);
}

SubspaceBasis preimage(const Matrix& a, const SubspaceBasis& s, const TolerancePolicy& pol) {
    if (a.rows() != s.ambient_dim()) {
        throw DimensionError("preimage: map codomain does not match subspace ambient dimension");
    }
    const Eigen::Index n = a.cols();
    if (s.dim() == s.ambient_dim()) return SubspaceBasis::full(n);
    // x in preimage  <=>  (I - P_S) A x = 0. The threshold is scaled by ||A|| so that a map
    // sending everything into S (up to rounding) has the full preimage.
    const Matrix residual_map = a - s.basis() * (s.basis().transpose() * a);
    if (residual_map.size() == 0) return SubspaceBasis::full(n);
    const Svd svd = full_svd(residual_map);
    const double scale = a.size() == 0 ? 0.0 : a.norm();
    const Eigen::Index r = decide(svd.sigma, scale, pol).rank;
    return SubspaceBasis(n, svd.v.rightCols(n - r));
}

bool contains_vector(const SubspaceBasis& s, const Vector& v, const TolerancePolicy& pol) {
    if (v.size() != s.ambient_dim()) {
        throw DimensionError("contains_vector: vector length does not match ambient dimension");
    }
    const double norm = v.norm();
    if (norm == 0.0) throw Error("contains_vector: zero vector");
    if (s.dim() == 0) return false;
    const Vector residual = v - s.basis() * (s.basis().transpose() * v);
    return residual.norm() <= pol.angle_tol * norm;
}

bool contains_subspace(const SubspaceBasis& s2, const SubspaceBasis& s1,
                       const TolerancePolicy& pol) {
    require_same_ambient(s1, s2, "contains_subspace");
    for (Eigen::Index k = 0; k < s1.dim(); ++k) {
        if (!contains_vector(s2, s1.basis().col(k), pol)) return false;
    }
    return true;
}

bool same_subspace(const SubspaceBasis& s1, const SubspaceBasis& s2, const TolerancePolicy& pol) {
    return s1.dim() == s2.dim() && contains_subspace(s1, s2, pol) && contains_subspace(s2, s1, pol);
}

Matrix pseudo_inverse(const Matrix& m, const TolerancePolicy& pol) {
    if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index r = decide(svd.singularValues(), 0.0, pol).rank;
    const Vector inv = svd.singularValues().head(r).cwiseInverse();
    return svd.matrixV().leftCols(r) * inv.asDiagonal() * svd.matrixU().leftCols(r).transpose();
}

}  // namespace slasf
