#include "subriem/linalg.hpp"

#include "subriem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace subriem {

Subspace orthonormalize(const std::vector<Vec>& vectors, int ambient_dim, double tol) {
  double scale = 0.0;
  for (const auto& v : vectors) scale = std::max(scale, v.norm());
  if (scale == 0.0) scale = 1.0;
  const double cutoff = tol * scale;

  std::vector<Vec> kept;
  for (const auto& v : vectors) {
    Vec w = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : kept) w -= q.dot(w) * q;
    }
    const double r = w.norm();
    if (r > cutoff) kept.push_back(w / r);
  }

  Subspace out;
  out.tol = tol;
  out.basis.resize(ambient_dim, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) out.basis.col(static_cast<Eigen::Index>(i)) = kept[i];
  return out;
}

Subspace orthonormalize(const Mat& columns, double tol) {
  std::vector<Vec> vs;
  vs.reserve(static_cast<std::size_t>(columns.cols()));
  for (Eigen::Index j = 0; j < columns.cols(); ++j) vs.emplace_back(columns.col(j));
  return orthonormalize(vs, static_cast<int>(columns.rows()), tol);
}

RankInfo rank_info(const Mat& a, double tol) {
  RankInfo info;
  const auto cols = a.cols();
  if (a.rows() == 0 || cols == 0) {
    info.kernel = Mat::Identity(cols, cols);
    return info;
  }
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  info.sigma_max = s(0);
  info.sigma_min = s(s.size() - 1);
  const double cutoff = tol * info.sigma_max;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) ++info.rank;
  }
  info.kernel = svd.matrixV().rightCols(cols - info.rank);
  return info;
}

double max_principal_angle(const Mat& a, const Mat& b, double tol) {
  const Mat qa = orthonormalize(a, tol).basis;
  const Mat qb = orthonormalize(b, tol).basis;
  if (qa.cols() != qb.cols()) return std::numbers::pi / 2;
  if (qa.cols() == 0) return 0.0;
  // sin of the largest angle is the largest singular value of (I - Pa) Qb;
  // unlike acos of the cosines this stays accurate for tiny angles.
  const Mat residual = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Mat> rs(residual);
  return std::asin(std::clamp(rs.singularValues().maxCoeff(), 0.0, 1.0));
}

HMatrix HMatrix::transpose() const {
  HMatrix t(cols_, rows_, dim_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t.entry(j, i) = entry(i, j);
  return t;
}

Vec HMatrix::trace() const {
  if (rows_ != cols_) throw Error(ErrorKind::ShapeMismatch, "trace of a non-square H-valued matrix");
  Vec t = Vec::Zero(dim_);
  for (int i = 0; i < rows_; ++i) t += entry(i, i);
  return t;
}

HMatrix& HMatrix::operator+=(const HMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_ || dim_ != other.dim_)
    throw Error(ErrorKind::ShapeMismatch, "adding H-valued matrices of different shapes");
  data_ += other.data_;
  return *this;
}

HMatrix HMatrix::congruence(const Mat& f, const Mat& g) const {
  if (f.cols() != rows_ || g.cols() != cols_) throw Error(ErrorKind::ShapeMismatch, "congruence factor shape");
  const int p = static_cast<int>(f.rows());
  const int q = static_cast<int>(g.rows());
  HMatrix out(p, q, dim_);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) {
      auto e = out.entry(i, j);
      for (int k = 0; k < rows_; ++k)
        for (int l = 0; l < cols_; ++l) e += f(i, k) * g(j, l) * entry(k, l);
    }
  return out;
}

double hmat_inner(const HMatrix& a, const HMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.dim() != b.dim())
    throw Error(ErrorKind::ShapeMismatch, "inner product of H-valued matrices of different shapes");
  return a.flat().dot(b.flat());
}

HMatrix AffineHMap::operator()(const Vec& z) const {
  HMatrix out = offset;
  out.flat() += linear * z;
  return out;
}

AffineMinimum min_norm_affine(const Vec& b, const Mat& a, const std::optional<LinearConstraints>& constraints, double tol) {
  const auto p = a.cols();
  if (b.size() != a.rows()) throw Error(ErrorKind::ShapeMismatch, "offset and linear map disagree on codomain size");

  Vec z0 = Vec::Zero(p);
  Mat basis = Mat::Identity(p, p);
  if (constraints) {
    const auto& c = *constraints;
    if (c.lhs.cols() != p || c.lhs.rows() != c.rhs.size())
      throw Error(ErrorKind::ShapeMismatch, "constraint shape does not match parameter count");
    if (c.lhs.rows() > 0) {
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(c.lhs);
      cod.setThreshold(tol);
      z0 = cod.solve(c.rhs);
      const double scale = std::max({1.0, c.rhs.norm(), c.lhs.norm()});
      if ((c.lhs * z0 - c.rhs).norm() > std::sqrt(tol) * scale)
        throw Error(ErrorKind::Infeasible, "linear constraints are inconsistent");
      basis = rank_info(c.lhs, tol).kernel;
    }
  }

  const Mat reduced = a * basis;
  const Vec shifted = b + a * z0;
  AffineMinimum out;
  out.feasible_dim = static_cast<int>(basis.cols());
  Vec w = Vec::Zero(basis.cols());
  if (basis.cols() > 0) {
    const RankInfo ri = rank_info(reduced, tol);
    out.sigma_min = ri.sigma_min;
    if (ri.rank < basis.cols())
      throw Error(ErrorKind::NotInjective,
                  "linear part has a " + std::to_string(basis.cols() - ri.rank) + "-dimensional kernel on the feasible set");
    w = reduced.colPivHouseholderQr().solve(-shifted);
  }
  out.params = z0 + basis * w;
  out.value = (b + a * out.params).norm();
  return out;
}

AffineMinimum min_norm_affine(const AffineHMap& map, const std::optional<LinearConstraints>& constraints, double tol) {
  return min_norm_affine(map.offset.flat(), map.linear, constraints, tol);
}

}  // namespace subriem
