#pragma once

#include "subriem/complement.hpp"
#include "subriem/linalg.hpp"
#include "subriem/structure.hpp"

#include <string>
#include <vector>

namespace subriem {

/// Orthonormal frame F_0..F_{n-1} adapted to H ⊕ V_2 ⊕ ... ⊕ V_r.
struct AdaptedFrame {
  Mat frame;    // columns
  Mat coframe;  // rows, inverse of frame
  std::vector<int> levels;
};

AdaptedFrame adapted_frame(const StructureSpec& spec, const GradedComplement& complement);

/// |Ψ_1 ∧ ... ∧ Ψ_r| evaluated on the input frame, with Ψ_m the stacked
/// orthonormal coframes of V̂^m.
double popp_volume(const QuotientTower& tower);

/// Connection and torsion coefficients over an adapted frame:
/// ∇_{F_a} F_b = Σ_c gamma(a, b, c) F_c and T(F_a, F_b) = Σ_c torsion(a, b, c) F_c.
class ConnectionTable {
 public:
  ConnectionTable() = default;
  explicit ConnectionTable(AdaptedFrame frame);

  int n() const { return n_; }
  const AdaptedFrame& frame() const { return frame_; }
  int level(int a) const { return frame_.levels[static_cast<std::size_t>(a)]; }

  double bracket(int a, int b, int c) const { return c_[idx(a, b, c)]; }
  double gamma(int a, int b, int c) const { return g_[idx(a, b, c)]; }
  double torsion(int a, int b, int c) const { return t_[idx(a, b, c)]; }

  double& bracket_ref(int a, int b, int c) { return c_[idx(a, b, c)]; }
  double& gamma_ref(int a, int b, int c) { return g_[idx(a, b, c)]; }
  double& torsion_ref(int a, int b, int c) { return t_[idx(a, b, c)]; }

 private:
  std::size_t idx(int a, int b, int c) const { return (static_cast<std::size_t>(a) * n_ + b) * n_ + c; }

  int n_ = 0;
  AdaptedFrame frame_;
  std::vector<double> c_, g_, t_;
};

struct ConnectionProperties {
  /// max |<T(A,B), C>| over A, B, C in one level.
  double same_level_residual = 0.0;
  /// max |<T(B,U), U'> - <T(B,U'), U>| over U, U' in one level, B in another.
  double cross_level_residual = 0.0;
  /// max |Γ_ab^c + Γ_ac^b|.
  double metric_residual = 0.0;
  bool same_level_orthogonal = false;
  bool cross_level_symmetric = false;
  bool metric_compatible = false;
};

/// Same-level coefficients from the Koszul formula projected to the level,
/// cross-level ones from ½(<[A,U],U'> - <[A,U'],U>); the horizontal level is
/// treated as V_1 = H with the same two rules.
ConnectionTable connection_and_torsion(const StructureSpec& spec, const GradedComplement& complement);
ConnectionProperties connection_properties(const ConnectionTable& table, double tol = kDefaultTol);

struct TorsionFlags {
  bool v_normal = false;
  bool v_rigid = false;
  /// max |<T(X,U),U'>| over horizontal X and U, U' in one V_m.
  double normal_residual = 0.0;
  /// max |Σ_i <T(X,U_i),U_i>| over horizontal X.
  double rigid_residual = 0.0;
};

TorsionFlags vnormal_vrigid_flags(const ConnectionTable& table, double tol = kDefaultTol);

struct LaplacianCoeffs {
  /// Σ_i ∇_{E_i} E_i over the horizontal frame, in adapted-frame coordinates.
  Vec drift;
  /// -∇*_H ∇_H agrees with the sum of squares minus the drift when V-rigid.
  bool self_adjoint_applicable = false;
  std::string second_order_symbol;
};

LaplacianCoeffs horizontal_laplacian_coeffs(const ConnectionTable& table, const TorsionFlags& flags);

/// d1 (d1 - 3) / 2 + n. Throws NotSemiJNondegenerate when the structure
/// fails the hypothesis.
int isometry_dim_bound(const StructureSpec& spec, const QuotientTower& tower, double tol = kDefaultTol);

}  // namespace subriem
