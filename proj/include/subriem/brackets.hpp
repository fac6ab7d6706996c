#pragma once

#include "subriem/linalg.hpp"
#include "subriem/structure.hpp"

#include <cstdint>
#include <vector>

namespace subriem {

/// A class in Ĥ_level, in the `reps` coordinates of that level. Levels
/// above the step carry the zero class (H_{k+m} = TM there).
struct QuotientClass {
  int level = 0;
  Vec coords;
  bool beyond_step = false;
};

/// B^{k,m}(a, b) = [-[A, B]]_{k+m} for representatives A ∈ H_k, B ∈ H_m.
QuotientClass bracket_quotient(const StructureSpec& spec, const QuotientTower& tower, int k, int m, const Vec& a, const Vec& b);

/// Matrix of 𝒥^{m,k}([φ]) : Ĥ_m → Ĥ_k in the orthonormal bases
/// unit_vectors() of both levels, defined by <𝒥 a, b> = [φ](B^{m,k}(a, b)).
struct JOperator {
  int m = 0;
  int k = 0;
  Mat matrix;  // d_k x d_m
};

/// `phi` is a covector in H_{m+k-1}^o; its class in V̂^{m+k} is used.
/// Throws AnnihilationViolation when phi does not vanish on H_{m+k-1}.
JOperator jmap(const StructureSpec& spec, const QuotientTower& tower, int m, int k, const Covec& phi, double tol = kDefaultTol);

/// 𝒥^{m,1}([φ])(z) as a horizontal vector, for a representative z ∈ H_m.
Vec jmap_horizontal(const StructureSpec& spec, const QuotientTower& tower, int m, const Covec& phi, const Vec& z,
                    double tol = kDefaultTol);

/// Ĵ^k_φ(Z) = 𝒥^{k-1,1}[φ](Z) + (𝒥^{k-1,1}[φ](Z))^T for a k-coframe
/// (d_k x n, rows) and a row Z of d_k representatives in H_{k-1} (n x d_k).
HMatrix jhat(const StructureSpec& spec, const QuotientTower& tower, int k, const Mat& coframe, const Mat& z,
             double tol = kDefaultTol);

/// Matrix of Z ↦ Ĵ^k_φ(Z) with Z parametrized by orthonormal coordinates of
/// Ĥ_{k-1}: parameter (j * d_{k-1} + s) sets Z_j to the s-th unit vector.
Mat jhat_linear(const StructureSpec& spec, const QuotientTower& tower, int k, const Mat& coframe, double tol = kDefaultTol);

struct LevelVerdict {
  int level = 0;
  bool injective = false;
  int domain_dim = 0;
  int kernel_dim = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

struct NondegeneracyReport {
  std::vector<LevelVerdict> levels;  // k = 2..r
  bool semi_j_nondegenerate = true;
  /// trace ∘ Ĵ^2 : H^{d_2} → H surjective (vacuous for step 1).
  bool trace_surjective = true;

  /// First level whose Ĵ map has a kernel, or -1.
  int first_degenerate_level() const;
};

NondegeneracyReport check_semi_j_nondegenerate(const StructureSpec& spec, const QuotientTower& tower, double tol = kDefaultTol);

struct Step2Report {
  /// 𝒥(φ) invertible for every sampled unit φ ∈ V̂^2 (none vanished).
  bool j_nondegenerate = false;
  /// Some sampled φ has 𝒥(φ) invertible.
  bool exists_isomorphism = false;
  /// Some sampled orthonormal coframe has Σ𝒥(φ^i) injective on Σ ker 𝒥(φ^i).
  bool kernel_sum_condition = false;
  /// det 𝒥(φ) vanished on every sample (always so for odd d1).
  bool determinant_identically_zero = false;
  int samples = 0;
  std::uint64_t seed = 0;
};

/// Sufficient conditions for step-2 structures, evaluated on a deterministic
/// set of unit covectors (coframe directions and their pairwise (±) sums)
/// plus 64 seeded random ones. Throws WrongStep when the step is not 2.
Step2Report check_step2_conditions(const StructureSpec& spec, const QuotientTower& tower, std::uint64_t seed = 0,
                                   double tol = kDefaultTol);

}  // namespace subriem
