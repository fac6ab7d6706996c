#include "subriem/brackets.hpp"

#include "subriem/errors.hpp"

#include <cmath>
#include <random>

namespace subriem {

namespace {

// Membership and annihilation checks compare against round-off accumulated
// over a few products, so they get more room than the rank tolerance.
constexpr double kSlack = 1e3;

void require_member(const QuotientTower& tower, int m, const Vec& v, double tol, const char* what) {
  if (tower.membership_residual(m, v) > kSlack * tol * std::max(1.0, v.norm()))
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + " does not lie in H_" + std::to_string(m), m);
}

void require_annihilates(const QuotientTower& tower, int m, const Covec& phi, double tol) {
  if (tower.annihilation_residual(m, phi) > kSlack * tol * std::max(1.0, phi.norm()))
    throw Error(ErrorKind::AnnihilationViolation, "covector does not vanish on H_" + std::to_string(m), m);
}

}  // namespace

QuotientClass bracket_quotient(const StructureSpec& spec, const QuotientTower& tower, int k, int m, const Vec& a, const Vec& b) {
  require_member(tower, k, a, kDefaultTol, "first argument");
  require_member(tower, m, b, kDefaultTol, "second argument");
  QuotientClass out;
  out.level = k + m;
  if (k + m > tower.step()) {
    out.beyond_step = true;
    return out;
  }
  out.coords = tower.class_coords(k + m, -spec.bracket(a, b));
  return out;
}

JOperator jmap(const StructureSpec& spec, const QuotientTower& tower, int m, int k, const Covec& phi, double tol) {
  if (phi.size() != tower.n()) throw Error(ErrorKind::ShapeMismatch, "covector length differs from dim");
  JOperator op{m, k, Mat::Zero(tower.dim(k), tower.dim(m))};
  if (m + k > tower.step()) return op;
  require_annihilates(tower, m + k - 1, phi, tol);
  const Mat wm = tower.level(m).unit_vectors();
  const Mat wk = tower.level(k).unit_vectors();
  const Covec pairing = phi * tower.level(m + k).reps;
  for (Eigen::Index s = 0; s < wm.cols(); ++s)
    for (Eigen::Index t = 0; t < wk.cols(); ++t) {
      const QuotientClass bc = bracket_quotient(spec, tower, m, k, wm.col(s), wk.col(t));
      op.matrix(t, s) = pairing.dot(bc.coords);
    }
  return op;
}

Vec jmap_horizontal(const StructureSpec& spec, const QuotientTower& tower, int m, const Covec& phi, const Vec& z, double tol) {
  const JOperator op = jmap(spec, tower, m, 1, phi, tol);
  return op.matrix * tower.unit_coords(m, z);
}

HMatrix jhat(const StructureSpec& spec, const QuotientTower& tower, int k, const Mat& coframe, const Mat& z, double tol) {
  const int d = static_cast<int>(coframe.rows());
  if (z.cols() != d) throw Error(ErrorKind::ShapeMismatch, "Z needs one entry per coframe row");
  // jz(i, j) = 𝒥^{k-1,1}[φ^i](Z_j)
  std::vector<Vec> jz(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      jz[static_cast<std::size_t>(i * d + j)] = jmap_horizontal(spec, tower, k - 1, coframe.row(i), z.col(j), tol);
  HMatrix out(d, d, tower.d1());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.entry(i, j) = jz[static_cast<std::size_t>(i * d + j)] + jz[static_cast<std::size_t>(j * d + i)];
  return out;
}

Mat jhat_linear(const StructureSpec& spec, const QuotientTower& tower, int k, const Mat& coframe, double tol) {
  const int d = static_cast<int>(coframe.rows());
  const Mat w = tower.level(k - 1).unit_vectors();
  const int dl = static_cast<int>(w.cols());
  Mat out(d * d * tower.d1(), d * dl);
  // Ĵ is linear, so column (j, s) is the image of the Z with only Z_j = w_s.
  for (int j = 0; j < d; ++j)
    for (int s = 0; s < dl; ++s) {
      Mat z = Mat::Zero(tower.n(), d);
      z.col(j) = w.col(s);
      out.col(j * dl + s) = jhat(spec, tower, k, coframe, z, tol).flat();
    }
  return out;
}

int NondegeneracyReport::first_degenerate_level() const {
  for (const auto& l : levels)
    if (!l.injective) return l.level;
  return -1;
}

NondegeneracyReport check_semi_j_nondegenerate(const StructureSpec& spec, const QuotientTower& tower, double tol) {
  NondegeneracyReport rep;
  for (int k = 2; k <= tower.step(); ++k) {
    const Mat coframe = tower.level(k).unit_coframe();
    const Mat lin = jhat_linear(spec, tower, k, coframe, tol);
    const RankInfo ri = rank_info(lin, tol);
    LevelVerdict v;
    v.level = k;
    v.domain_dim = static_cast<int>(lin.cols());
    v.kernel_dim = v.domain_dim - ri.rank;
    v.injective = v.kernel_dim == 0;
    v.sigma_min = ri.sigma_min;
    v.sigma_max = ri.sigma_max;
    rep.levels.push_back(v);
    rep.semi_j_nondegenerate = rep.semi_j_nondegenerate && v.injective;

    if (k == 2) {
      const int d = tower.dim(2);
      const int d1 = tower.d1();
      Mat tr = Mat::Zero(d1, lin.cols());
      for (int i = 0; i < d; ++i) tr += lin.middleRows((i * d + i) * d1, d1);
      rep.trace_surjective = numerical_rank(tr, tol) == d1;
    }
  }
  return rep;
}

Step2Report check_step2_conditions(const StructureSpec& spec, const QuotientTower& tower, std::uint64_t seed, double tol) {
  if (tower.step() != 2)
    throw Error(ErrorKind::WrongStep, "step-2 conditions need step 2, structure has step " + std::to_string(tower.step()));
  const int d1 = tower.d1();
  const int d2 = tower.dim(2);
  const Mat coframe = tower.level(2).unit_coframe();
  std::vector<Mat> js;
  for (int i = 0; i < d2; ++i) js.push_back(jmap(spec, tower, 1, 1, coframe.row(i), tol).matrix);

  auto combine = [&](const Vec& c) {
    Mat j = Mat::Zero(d1, d1);
    for (int i = 0; i < d2; ++i) j += c(i) * js[static_cast<std::size_t>(i)];
    return j;
  };
  auto invertible = [&](const Mat& j) {
    const RankInfo ri = rank_info(j, tol);
    return ri.sigma_max > 0.0 && ri.rank == d1;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Vec> samples;
  for (int i = 0; i < d2; ++i) samples.push_back(Vec::Unit(d2, i));
  for (int i = 0; i < d2; ++i)
    for (int j = i + 1; j < d2; ++j) {
      samples.push_back((Vec::Unit(d2, i) + Vec::Unit(d2, j)) / std::sqrt(2.0));
      samples.push_back((Vec::Unit(d2, i) - Vec::Unit(d2, j)) / std::sqrt(2.0));
    }
  for (int s = 0; s < 64; ++s) {
    Vec c(d2);
    for (int i = 0; i < d2; ++i) c(i) = gauss(rng);
    samples.push_back(c.normalized());
  }

  Step2Report rep;
  rep.seed = seed;
  rep.samples = static_cast<int>(samples.size());
  int isos = 0;
  for (const auto& c : samples)
    if (invertible(combine(c))) ++isos;
  rep.j_nondegenerate = isos == rep.samples;
  rep.exists_isomorphism = isos > 0;
  rep.determinant_identically_zero = isos == 0;

  auto kernel_sum_holds = [&](const Mat& f) {
    std::vector<Mat> rotated;
    for (int i = 0; i < d2; ++i) {
      Mat j = Mat::Zero(d1, d1);
      for (int l = 0; l < d2; ++l) j += f(i, l) * js[static_cast<std::size_t>(l)];
      rotated.push_back(j);
    }
    std::vector<Vec> kernels;
    Mat sum = Mat::Zero(d1, d1);
    for (const auto& j : rotated) {
      sum += j;
      const Mat k = rank_info(j, tol).kernel;
      for (Eigen::Index c = 0; c < k.cols(); ++c) kernels.emplace_back(k.col(c));
    }
    const Subspace n = orthonormalize(kernels, d1, tol);
    if (n.rank() == 0) return true;
    return numerical_rank(sum * n.basis, tol) == n.rank();
  };
  rep.kernel_sum_condition = kernel_sum_holds(Mat::Identity(d2, d2));
  for (int s = 0; s < 64 && !rep.kernel_sum_condition; ++s) {
    Mat g(d2, d2);
    for (int i = 0; i < d2; ++i)
      for (int j = 0; j < d2; ++j) g(i, j) = gauss(rng);
    const Mat f = Eigen::HouseholderQR<Mat>(g).householderQ();
    rep.kernel_sum_condition = kernel_sum_holds(f);
  }
  return rep;
}

}  // namespace subriem
