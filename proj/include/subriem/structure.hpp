#pragma once

#include "subriem/linalg.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace subriem {

/// A frame e_0..e_{n-1} with constant structure constants
/// [e_i, e_j] = sum_k c_{ij}^k e_k. The first `d1` vectors span the
/// horizontal bundle and are orthonormal for its metric.
class StructureSpec {
 public:
  StructureSpec() = default;
  StructureSpec(int n, int d1, std::vector<std::string> names);

  int n() const { return n_; }
  int d1() const { return d1_; }
  const std::vector<std::string>& names() const { return names_; }

  double coeff(int i, int j, int k) const { return c_[index(i, j, k)]; }
  /// Sets c_{ij}^k and c_{ji}^k = -value.
  void set_bracket(int i, int j, int k, double value);

  /// [e_i, e_j] in frame coordinates.
  Vec bracket(int i, int j) const;
  /// [u, v] for constant-coefficient vectors u, v.
  Vec bracket(const Vec& u, const Vec& v) const;

  /// Index of a frame label, or -1.
  int find(std::string_view name) const;
  double max_abs_coeff() const;

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }

  int n_ = 0;
  int d1_ = 0;
  std::vector<std::string> names_;
  std::vector<double> c_;
};

struct JacobiCheck {
  double residual = 0.0;
  int i = -1, j = -1, k = -1;
};

/// Largest |sum_cyclic [e_i,[e_j,e_k]]| component over all triples.
JacobiCheck jacobi_residual(const StructureSpec& spec);

/// Throws JacobiViolation when the residual exceeds tol * max(1, max|c|^2).
void validate(const StructureSpec& spec, double tol = kDefaultTol);

/// One `complement <m>` block of a check document.
struct ComplementBlock {
  int level = 0;
  std::vector<Vec> vectors;
};

struct StructureDocument {
  StructureSpec spec;
  std::vector<ComplementBlock> complement;
};

/// Parses the line-oriented structure format. Throws ParseError (with the
/// line number) on malformed input and JacobiViolation on invalid brackets.
StructureDocument parse_document(std::string_view text, double tol = kDefaultTol);
/// As parse_document, but rejects complement blocks.
StructureSpec parse_structure(std::string_view text, double tol = kDefaultTol);
/// Canonical text for a spec; parse_structure(format_structure(s)) == s.
std::string format_structure(const StructureSpec& spec);

/// Re-expresses the structure in the frame whose vectors are the columns of
/// `frame` (old coordinates). The first d1 columns become the new
/// orthonormal horizontal frame, so only frames mapping H to H describe the
/// same sub-Riemannian structure.
StructureSpec reframe(const StructureSpec& spec, const Mat& frame);

struct Filtration {
  /// H_1 ⊂ H_2 ⊂ ... ⊂ H_r, orthonormal in frame coordinates.
  std::vector<Subspace> spaces;
  std::vector<int> growth;
  int step = 0;
};

/// H_1 = span(e_0..e_{d1-1}), H_{i+1} = H_i + [H_i, H_1].
/// Throws NotBracketGenerating if the ranks stall below n.
Filtration compute_filtration(const StructureSpec& spec, double tol = kDefaultTol);

/// Data for one quotient Ĥ_m = H_m / H_{m-1} and its dual V̂^m.
struct QuotientLevel {
  int level = 0;
  int dim = 0;
  /// n x d_m. Representatives: orthonormal basis of the Euclidean complement
  /// of H_{m-1} inside H_m. Only their classes carry meaning.
  Mat reps;
  /// Intrinsic inner product of the classes of `reps`.
  Mat gram;
  /// reps * orthonormal is a representative of an orthonormal basis of Ĥ_m.
  Mat orthonormal;
  /// Inner product on V̂^m in the basis given by the rows of reps^T, which
  /// pair with `reps` to the identity.
  Mat dual_gram;

  Mat unit_vectors() const { return reps * orthonormal; }
  /// Rows: the m-coframe dual to unit_vectors(). Lies in H_{m-1}^o.
  Mat unit_coframe() const { return orthonormal.transpose() * gram * reps.transpose(); }
};

class QuotientTower {
 public:
  QuotientTower() = default;
  QuotientTower(int n, int d1, std::vector<QuotientLevel> levels, Filtration filtration);

  int n() const { return n_; }
  int d1() const { return d1_; }
  int step() const { return static_cast<int>(levels_.size()); }
  std::vector<int> growth() const;
  const Filtration& filtration() const { return filtration_; }

  /// Level m in 1..step().
  const QuotientLevel& level(int m) const { return levels_.at(static_cast<std::size_t>(m - 1)); }
  int dim(int m) const { return level(m).dim; }

  /// Orthonormal basis (Euclidean) of H_m; H_0 = {0}.
  Mat span(int m) const;
  /// Euclidean distance of v from H_m.
  double membership_residual(int m, const Vec& v) const;
  /// Largest |phi(h)| over an orthonormal basis of H_m (0 means phi ∈ H_m^o).
  double annihilation_residual(int m, const Covec& phi) const;
  /// Rows: a basis of the annihilator H_m^o.
  Mat annihilator(int m) const;

  /// Coordinates of [v]_m in the `reps` basis. v must lie in H_m.
  Vec class_coords(int m, const Vec& v) const { return level(m).reps.transpose() * v; }
  /// Coordinates of [v]_m in the orthonormal basis unit_vectors().
  Vec unit_coords(int m, const Vec& v) const;
  /// <[u]_m, [v]_m> in the intrinsic quotient inner product.
  double inner(int m, const Vec& u, const Vec& v) const;
  /// Inner product of the classes of phi, psi ∈ H_{m-1}^o in V̂^m.
  double dual_inner(int m, const Covec& phi, const Covec& psi) const;

  /// Smallest m with e_i ∈ H_m.
  int coordinate_level(int i) const;

 private:
  int n_ = 0;
  int d1_ = 0;
  std::vector<QuotientLevel> levels_;
  Filtration filtration_;
};

/// Builds the quotient tower with the intrinsic inner products: Ĥ_1 = H
/// with g_H, Ĥ_2 from Λ²H via π_1(X∧Y) = B^{1,1}(X,Y), and Ĥ_{j+1} from
/// H ⊗ Ĥ_j via B^{1,j}, each time declaring (ker π)^⊥ → Ĥ isometric.
QuotientTower quotient_tower(const StructureSpec& spec, const Filtration& filtration, double tol = kDefaultTol);
inline QuotientTower quotient_tower(const StructureSpec& spec, double tol = kDefaultTol) {
  return quotient_tower(spec, compute_filtration(spec, tol), tol);
}

}  // namespace subriem
