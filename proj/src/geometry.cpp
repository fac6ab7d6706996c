#include "subriem/geometry.hpp"

#include "subriem/brackets.hpp"
#include "subriem/errors.hpp"

#include <cmath>

namespace subriem {

AdaptedFrame adapted_frame(const StructureSpec& spec, const GradedComplement& complement) {
  AdaptedFrame f;
  f.frame = complement.adapted_frame(spec.d1());
  if (f.frame.rows() != spec.n()) throw Error(ErrorKind::InvalidComplement, "complement does not live in this structure");
  Eigen::FullPivLU<Mat> lu(f.frame);
  if (!lu.isInvertible()) throw Error(ErrorKind::InvalidComplement, "H and V_m do not span TM");
  f.coframe = lu.inverse();
  f.levels.assign(static_cast<std::size_t>(spec.d1()), 1);
  for (const auto& l : complement.levels) f.levels.insert(f.levels.end(), static_cast<std::size_t>(l.basis.cols()), l.level);
  return f;
}

double popp_volume(const QuotientTower& tower) {
  Mat psi(tower.n(), tower.n());
  Eigen::Index row = 0;
  for (int m = 1; m <= tower.step(); ++m) {
    psi.middleRows(row, tower.dim(m)) = tower.level(m).unit_coframe();
    row += tower.dim(m);
  }
  return std::abs(psi.determinant());
}

ConnectionTable::ConnectionTable(AdaptedFrame frame) : n_(static_cast<int>(frame.frame.cols())), frame_(std::move(frame)) {
  const std::size_t sz = static_cast<std::size_t>(n_) * n_ * n_;
  c_.assign(sz, 0.0);
  g_.assign(sz, 0.0);
  t_.assign(sz, 0.0);
}

ConnectionTable connection_and_torsion(const StructureSpec& spec, const GradedComplement& complement) {
  ConnectionTable t(adapted_frame(spec, complement));
  const int n = t.n();
  const Mat& f = t.frame().frame;
  const Mat& psi = t.frame().coframe;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Vec br = psi * spec.bracket(Vec(f.col(a)), Vec(f.col(b)));
      for (int c = 0; c < n; ++c) t.bracket_ref(a, b, c) = br(c);
    }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        if (t.level(b) != t.level(c)) continue;
        if (t.level(a) == t.level(b))
          t.gamma_ref(a, b, c) = 0.5 * (t.bracket(a, b, c) - t.bracket(b, c, a) + t.bracket(c, a, b));
        else
          t.gamma_ref(a, b, c) = 0.5 * (t.bracket(a, b, c) - t.bracket(a, c, b));
      }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) t.torsion_ref(a, b, c) = t.gamma(a, b, c) - t.gamma(b, a, c) - t.bracket(a, b, c);
  return t;
}

ConnectionProperties connection_properties(const ConnectionTable& t, double tol) {
  ConnectionProperties p;
  const int n = t.n();
  double scale = 1.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) scale = std::max(scale, std::abs(t.bracket(a, b, c)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        p.metric_residual = std::max(p.metric_residual, std::abs(t.gamma(a, b, c) + t.gamma(a, c, b)));
        if (t.level(a) == t.level(b) && t.level(b) == t.level(c))
          p.same_level_residual = std::max(p.same_level_residual, std::abs(t.torsion(a, b, c)));
        if (t.level(b) == t.level(c) && t.level(a) != t.level(b))
          p.cross_level_residual = std::max(p.cross_level_residual, std::abs(t.torsion(a, b, c) - t.torsion(a, c, b)));
      }
  const double bound = 1e3 * tol * scale;
  p.same_level_orthogonal = p.same_level_residual <= bound;
  p.cross_level_symmetric = p.cross_level_residual <= bound;
  p.metric_compatible = p.metric_residual <= bound;
  return p;
}

TorsionFlags vnormal_vrigid_flags(const ConnectionTable& t, double tol) {
  TorsionFlags fl;
  const int n = t.n();
  double scale = 1.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) scale = std::max(scale, std::abs(t.bracket(a, b, c)));
  for (int x = 0; x < n; ++x) {
    if (t.level(x) != 1) continue;
    double trace = 0.0;
    for (int u = 0; u < n; ++u) {
      if (t.level(u) == 1) continue;
      trace += t.torsion(x, u, u);
      for (int v = 0; v < n; ++v)
        if (t.level(v) == t.level(u)) fl.normal_residual = std::max(fl.normal_residual, std::abs(t.torsion(x, u, v)));
    }
    fl.rigid_residual = std::max(fl.rigid_residual, std::abs(trace));
  }
  const double bound = 1e3 * tol * scale;
  fl.v_normal = fl.normal_residual <= bound;
  fl.v_rigid = fl.rigid_residual <= bound;
  return fl;
}

LaplacianCoeffs horizontal_laplacian_coeffs(const ConnectionTable& t, const TorsionFlags& flags) {
  LaplacianCoeffs out;
  out.drift = Vec::Zero(t.n());
  for (int i = 0; i < t.n(); ++i) {
    if (t.level(i) != 1) continue;
    for (int c = 0; c < t.n(); ++c) out.drift(c) += t.gamma(i, i, c);
  }
  out.self_adjoint_applicable = flags.v_rigid;
  out.second_order_symbol = "sum_i E_i E_i over a horizontal orthonormal frame";
  return out;
}

int isometry_dim_bound(const StructureSpec& spec, const QuotientTower& tower, double tol) {
  const NondegeneracyReport nd = check_semi_j_nondegenerate(spec, tower, tol);
  if (const int k = nd.first_degenerate_level(); k > 0)
    throw Error(ErrorKind::NotSemiJNondegenerate, "isometry bound needs semi-𝒥-nondegeneracy, level " + std::to_string(k) + " fails", k);
  const int d1 = spec.d1();
  return d1 * (d1 - 3) / 2 + spec.n();
}

}  // namespace subriem
