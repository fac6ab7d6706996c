#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace subriem {

using Vec = Eigen::VectorXd;
using Covec = Eigen::RowVectorXd;
using Mat = Eigen::MatrixXd;

/// Relative rank tolerance used throughout: singular values at or below
/// `tol * sigma_max` count as zero.
inline constexpr double kDefaultTol = 1e-9;

/// Orthonormal basis (columns) of a subspace of R^n.
struct Subspace {
  Mat basis;
  double tol = kDefaultTol;

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int rank() const { return static_cast<int>(basis.cols()); }
  Vec project(const Vec& v) const { return basis * (basis.transpose() * v); }
  /// Euclidean distance from `v` to the subspace.
  double residual(const Vec& v) const { return (v - project(v)).norm(); }
};

/// Modified Gram-Schmidt with one re-orthogonalization pass. Vectors whose
/// residual falls to `tol * max input norm` (or `tol` if all inputs vanish)
/// are dropped, so the input order decides which vectors survive.
Subspace orthonormalize(const std::vector<Vec>& vectors, int ambient_dim, double tol = kDefaultTol);
Subspace orthonormalize(const Mat& columns, double tol = kDefaultTol);

struct RankInfo {
  int rank = 0;
  double sigma_max = 0.0;
  /// Smallest singular value over min(rows, cols); 0 for empty matrices.
  double sigma_min = 0.0;
  /// Orthonormal basis of the kernel (columns).
  Mat kernel;
};

RankInfo rank_info(const Mat& a, double tol = kDefaultTol);
inline int numerical_rank(const Mat& a, double tol = kDefaultTol) { return rank_info(a, tol).rank; }

/// Largest principal angle (radians) between the column spans of `a` and `b`.
/// Spans of different dimension are pi/2 apart.
double max_principal_angle(const Mat& a, const Mat& b, double tol = kDefaultTol);

/// A rows x cols matrix whose entries are vectors of a fixed inner-product
/// space of dimension `dim` with orthonormal coordinates (horizontal vectors
/// in this library). Entry (i, j) occupies data[((i * cols) + j) * dim, +dim).
class HMatrix {
 public:
  HMatrix() = default;
  HMatrix(int rows, int cols, int dim) : rows_(rows), cols_(cols), dim_(dim), data_(Vec::Zero(rows * cols * dim)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int dim() const { return dim_; }

  auto entry(int i, int j) { return data_.segment(offset(i, j), dim_); }
  auto entry(int i, int j) const { return data_.segment(offset(i, j), dim_); }

  const Vec& flat() const { return data_; }
  Vec& flat() { return data_; }

  HMatrix transpose() const;
  /// Sum of the diagonal entries (square matrices only).
  Vec trace() const;
  double squared_norm() const { return data_.squaredNorm(); }
  double norm() const { return data_.norm(); }

  HMatrix& operator+=(const HMatrix& other);
  friend HMatrix operator+(HMatrix a, const HMatrix& b) { return a += b; }

  /// (f * A * g^T) with scalar matrices f (p x rows), g (q x cols).
  HMatrix congruence(const Mat& f, const Mat& g) const;

 private:
  int offset(int i, int j) const { return ((i * cols_) + j) * dim_; }

  int rows_ = 0;
  int cols_ = 0;
  int dim_ = 0;
  Vec data_;
};

/// Trace inner product sum_{l,m} <A_l^m, B_l^m>. Throws ShapeMismatch.
double hmat_inner(const HMatrix& a, const HMatrix& b);

/// z -> offset + linear * z, with the columns of `linear` being flattened
/// HMatrix images of the parameter basis vectors.
struct AffineHMap {
  HMatrix offset;
  Mat linear;

  HMatrix operator()(const Vec& z) const;
  int params() const { return static_cast<int>(linear.cols()); }
};

/// lhs * z = rhs.
struct LinearConstraints {
  Mat lhs;
  Vec rhs;
};

struct AffineMinimum {
  Vec params;
  /// Minimal norm ||offset + linear * params||.
  double value = 0.0;
  /// Dimension of the feasible set the minimum was taken over.
  int feasible_dim = 0;
  /// Smallest singular value of the linear part restricted to the feasible set.
  double sigma_min = 0.0;
};

/// Unique minimizer of ||b + A z|| (optionally subject to C z = d). The
/// feasible set is parametrized as z0 + N w with N an orthonormal kernel basis
/// of C, and the reduced problem is solved by an orthogonal decomposition.
/// Throws Infeasible when C z = d has no solution and NotInjective when A
/// has a kernel on the feasible set.
AffineMinimum min_norm_affine(const Vec& b, const Mat& a, const std::optional<LinearConstraints>& constraints = std::nullopt,
                              double tol = kDefaultTol);

AffineMinimum min_norm_affine(const AffineHMap& map, const std::optional<LinearConstraints>& constraints = std::nullopt,
                              double tol = kDefaultTol);

}  // namespace subriem
