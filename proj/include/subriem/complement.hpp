#pragma once

#include "subriem/brackets.hpp"
#include "subriem/linalg.hpp"
#include "subriem/structure.hpp"

#include <string>
#include <vector>

namespace subriem {

/// An (m, k)-frame: d_m representatives in H_m together with a dual
/// m-coframe in H_{m-1}^o. Only the vectors modulo H_k carry meaning.
struct FrameSection {
  int level = 0;
  int modulus = 0;
  Mat vectors;  // n x d_m
  Mat coframe;  // d_m x n
};

enum class Variant { MinimalRigid, Alternate, UserSupplied };
const char* to_string(Variant v);

struct ComplementLevel {
  int level = 0;
  /// n x d_m, canonical basis orthonormal in the metric extension.
  Mat basis;
};

/// V_2 ⊕ ... ⊕ V_r with H_m = H_{m-1} ⊕ V_m. The metric extension declares
/// each V_m → Ĥ_m isometric and the summands (with H) mutually orthogonal.
struct GradedComplement {
  Variant variant = Variant::MinimalRigid;
  std::vector<ComplementLevel> levels;  // m = 2..r

  /// Level m in 2..r.
  const ComplementLevel& level(int m) const { return levels.at(static_cast<std::size_t>(m - 2)); }
  /// Columns: e_0..e_{d1-1} followed by the level bases in order.
  Mat adapted_frame(int d1) const;
};

/// 𝒮(φ, E)_{ij} = dφ^i(E_j, ·) + dφ^j(E_i, ·) on H, for a coframe (d x n)
/// and a dual frame (n x d). Throws DualityViolation unless φ(E) = I.
HMatrix s_map(const StructureSpec& spec, const Mat& coframe, const Mat& frame, double tol = kDefaultTol);

/// 𝒜(φ, E)_{ij} = dφ^i(E_j, ·) on H for a coframe (d_m x n) and frame
/// (n x d_k). Throws AnnihilationViolation unless φ(E) = 0.
HMatrix a_map(const StructureSpec& spec, const Mat& coframe, const Mat& frame, double tol = kDefaultTol);

struct Minimizer {
  /// Minimizing frame, n x d.
  Mat frame;
  /// Z in orthonormal Ĥ_{m-1} coordinates, index j * d_{m-1} + s.
  Vec params;
  double value = 0.0;
  double sigma_min = 0.0;
  int feasible_dim = 0;
};

/// argmin ‖𝒮(φ, E + Z)‖ over Z ∈ (Ĥ_{m-1})^{d_m}, with φ an m-coframe dual
/// to the (m, m-1)-frame E. The linear part is Ĵ^m, assembled from the
/// quotient brackets. Throws NotInjective when Ĵ^m has a kernel.
Minimizer min_s(const StructureSpec& spec, const QuotientTower& tower, int m, const Mat& coframe, const Mat& frame,
                double tol = kDefaultTol);

/// argmin ‖𝒜(φ, E + Z)‖ over Z ∈ (Ĥ_{m-1})^{d_k}, for an m-coframe φ
/// annihilating the (k, m-1)-frame E (k > m).
Minimizer min_a(const StructureSpec& spec, const QuotientTower& tower, int m, const Mat& coframe, const Mat& frame,
                double tol = kDefaultTol);

/// Affine map Z ↦ 𝒮(φ², E + Z) together with the trace constraint
/// tr 𝒮 = -R, minimized over the feasible set W. Throws InfeasibleW.
Minimizer min_w(const StructureSpec& spec, const QuotientTower& tower, const Mat& coframe, const Mat& frame, const Vec& r,
                double tol = kDefaultTol);

/// The m-coframe in H_{m-1}^o dual to `frame` (level m) that annihilates
/// every vector of the higher `sections`.
Mat dual_coframe(const QuotientTower& tower, int m, const Mat& frame, const std::vector<FrameSection>& sections,
                 double tol = kDefaultTol);

struct TraceStage {
  std::string kind;  // "init", "min_s", "min_a", "emit", "w", "w_unconstrained"
  /// Level of the section the stage acts on.
  int level = 0;
  /// Iteration index m of the driver (r for "init", 1 for the final step).
  int step = 0;
  Vec params;
  double value = 0.0;
  double sigma_min = 0.0;
  Mat frame;
  Mat coframe;
};

/// Sections [e]^r_m, ..., [e]^{m+1}_m, highest level first.
using SectionStack = std::vector<FrameSection>;

/// One iteration m of the descent: refines the sections with the coframe of
/// level m+1 (min_a on levels ≥ m+2, min_s on level m+1), then appends the
/// new level-m section. `trace` may be null.
SectionStack inductive_step(const StructureSpec& spec, const QuotientTower& tower, int m, SectionStack sections,
                            std::vector<TraceStage>* trace = nullptr, double tol = kDefaultTol);

struct ComplementResult {
  GradedComplement complement;
  /// Final sections of levels r..2 (highest first), dual to the adapted frame.
  SectionStack sections;
  std::vector<TraceStage> trace;
  /// R = Σ_{m≥3} tr 𝒮(φ^m, E^m_0), horizontal coordinates.
  Vec r_vector;
  /// Dimension of the affine set W (0 when the trace fixes F).
  int w_rank = 0;
};

/// Runs the descent m = r-1 .. 2 and the final trace-constrained step.
/// Throws NotSemiJNondegenerate (with the first failing level) up front.
ComplementResult minimal_rigid_complement(const StructureSpec& spec, const QuotientTower& tower,
                                          Variant variant = Variant::MinimalRigid, double tol = kDefaultTol);

/// Canonical basis of span(vectors) ⊂ H_m: reduced row echelon form in the
/// coordinate order (highest filtration level first), orthonormalized in the
/// Ĥ_m metric, signed so the first nonzero coordinate is positive, and with
/// coordinates within 1e-10 of an integer snapped.
Mat canonical_basis(const QuotientTower& tower, int m, const Mat& vectors, double tol = kDefaultTol);
/// Coordinate indices sorted by (filtration level desc, index asc).
std::vector<int> coordinate_order(const QuotientTower& tower);

/// Validates user blocks (one per level 2..r, vectors in H_m projecting
/// isomorphically to Ĥ_m) and canonicalizes them. Throws InvalidComplement.
GradedComplement make_complement(const QuotientTower& tower, const std::vector<ComplementBlock>& blocks, double tol = kDefaultTol);

/// max over horizontal e_a of |Σ_i dψ^i(U_i, e_a)| for an orthonormal frame
/// U of V with dual coframe ψ.
double verify_v_rigid(const StructureSpec& spec, const GradedComplement& complement);

struct VNormalResult {
  bool exists = false;
  /// First level whose system 𝒮 = 0 has no solution, or -1.
  int failing_level = -1;
  double residual = 0.0;
  GradedComplement complement;
};

/// Solves 𝒮(φ^m, E^m) = 0 level by level, top down. The equations only fix
/// E^m modulo H_{m-2}; the remaining components are gauged by min_a.
VNormalResult solve_v_normal(const StructureSpec& spec, const QuotientTower& tower, double tol = kDefaultTol);

}  // namespace subriem
