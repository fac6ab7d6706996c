#pragma once

#include "subriem/complement.hpp"
#include "subriem/linalg.hpp"
#include "subriem/structure.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace subriem::testing {

std::string data_path(const std::string& name);
std::string read_text(const std::string& path);
StructureSpec load(const std::string& name);
StructureDocument load_document(const std::string& name);

/// Free nilpotent Lie algebra on d generators truncated at `step`, built
/// inside the tensor algebra, with the top layer projected onto a random
/// subspace of dimension `top_dim` (0 keeps it whole). Graded frame.
StructureSpec free_nilpotent_quotient(int d, int step, int top_dim, std::mt19937_64& rng);

/// Re-expresses `spec` in the frame M = [[A_H, B], [W, A_V]] with random
/// blocks; W != 0 tilts the horizontal space out of the first grading layer.
StructureSpec random_frame(const StructureSpec& spec, std::mt19937_64& rng, double tilt = 0.3);

struct CatalogueEntry {
  int d, step, top_dim;
};
const std::vector<CatalogueEntry>& catalogue();

struct RandomPick {
  StructureSpec spec;
  CatalogueEntry source;
};

/// Seeded random structures with steps in [min_step, max_step], dim ≤
/// max_n, that pass (or, with want_degenerate, fail) semi-𝒥-nondegeneracy.
std::vector<RandomPick> random_structures(int count, std::uint64_t seed, int min_step, int max_step, int max_n,
                                          bool want_degenerate = false);

/// Adds a horizontal generator that brackets with nothing: always degenerate
/// at level 2.
StructureSpec add_idle_generator(const StructureSpec& spec);

Mat random_orthogonal(int d, std::mt19937_64& rng);
/// blockdiag(O, I): an orthogonal change of the horizontal frame.
Mat horizontal_rotation(const StructureSpec& spec, const Mat& o);
/// Fixtures used by the property suites.
std::vector<std::string> fixture_names();

/// ‖b + A z‖² assembled by evaluating 𝒮 or 𝒜 at z = 0 and at each unit
/// parameter (the maps are affine, so this is exact).
struct AffineProbe {
  Vec b;
  Mat a;
  double operator()(const Vec& z) const { return (b + a * z).squaredNorm(); }
};
AffineProbe probe_s(const StructureSpec& spec, const QuotientTower& tower, int m, const Mat& coframe, const Mat& frame);
AffineProbe probe_a(const StructureSpec& spec, const QuotientTower& tower, int m, const Mat& coframe, const Mat& frame);
/// Trace rows of an 𝒮 probe: tr(b + A z) = t0 + T z.
void probe_trace(const AffineProbe& p, int d, int d1, Vec& t0, Mat& t);

struct GridResult {
  Vec z;
  double value = 0.0;  // squared norm at z
  long evaluations = 0;
};

/// Derivative-free search: a coarse pattern descent on a 0.1 lattice from
/// the origin, then three refinement rounds at cells 1e-2, 1e-3, 1e-4. Each
/// round moves along the full {-1,0,1}^p stencil (compass directions when
/// p > 6) with accelerating pattern moves until no neighbour improves.
GridResult grid_minimize(const std::function<double(const Vec&)>& f, int p, const Vec& start);

/// Brute force over W = {z : C z = c}: the feasible set is parametrized by
/// an LU particular solution plus an orthonormalized LU kernel basis.
GridResult grid_minimize_constrained(const AffineProbe& p, const Mat& c, const Vec& rhs);

/// dim ker Ĵ^k from the raw bracket formula with Euclidean bases of
/// H_{k-1}^o and Ĥ_{k-1} (independent of the quotient machinery).
int kernel_dim_oracle(const StructureSpec& spec, const QuotientTower& tower, int k, double tol = 1e-9);

/// Stage callback for replay_driver: kind, driver step, coframe, input frame,
/// implementation result, R (final step only).
using StageHook = std::function<void(const std::string&, int, const Mat&, const Mat&, const Minimizer&, const Vec&)>;
/// Re-runs the complement descent through the public minimizers, calling
/// `hook` on each stage; returns the final sections' spans by level.
std::vector<Mat> replay_driver(const StructureSpec& spec, const QuotientTower& tower, const StageHook& hook);

}  // namespace subriem::testing
