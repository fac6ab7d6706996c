#include "subriem/complement.hpp"

#include "subriem/errors.hpp"

#include <algorithm>
#include <cmath>

namespace subriem {

namespace {

constexpr double kSlack = 1e3;

double check_scale(const Mat& coframe, const Mat& frame) {
  return std::max(1.0, coframe.norm() * frame.norm());
}

// brackets[j * d1 + a] = [E_j, e_a]
std::vector<Vec> horizontal_brackets(const StructureSpec& spec, const Mat& frame) {
  const int d1 = spec.d1();
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(frame.cols() * d1));
  for (Eigen::Index j = 0; j < frame.cols(); ++j)
    for (int a = 0; a < d1; ++a) out.push_back(spec.bracket(Vec(frame.col(j)), Vec(Vec::Unit(spec.n(), a))));
  return out;
}

Mat apply_params(const Mat& frame, const Mat& w, const Vec& params) {
  Mat out = frame;
  const auto dl = w.cols();
  for (Eigen::Index j = 0; j < frame.cols(); ++j)
    for (Eigen::Index s = 0; s < dl; ++s) out.col(j) += params(j * dl + s) * w.col(s);
  return out;
}

Minimizer finish(const AffineMinimum& am, const Mat& frame, const Mat& w) {
  Minimizer out;
  out.params = am.params;
  out.value = am.value;
  out.sigma_min = am.sigma_min;
  out.feasible_dim = am.feasible_dim;
  out.frame = apply_params(frame, w, am.params);
  return out;
}

Mat rref(Mat a, double tol) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < a.cols() && row < a.rows(); ++col) {
    Eigen::Index piv = row;
    a.col(col).segment(row, a.rows() - row).cwiseAbs().maxCoeff(&piv);
    piv += row;
    if (std::abs(a(piv, col)) <= tol * scale) {
      a.col(col).segment(row, a.rows() - row).setZero();
      continue;
    }
    a.row(row).swap(a.row(piv));
    a.row(row) /= a(row, col);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      if (r != row) a.row(r) -= a(r, col) * a.row(row);
    ++row;
  }
  return a;
}

double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < 1e-10 ? r : x;
}

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::MinimalRigid: return "minimal-rigid";
    case Variant::Alternate: return "alternate";
    case Variant::UserSupplied: return "user-supplied";
  }
  return "unknown";
}

Mat GradedComplement::adapted_frame(int d1) const {
  if (levels.empty()) return Mat::Identity(d1, d1);
  const auto n = levels.front().basis.rows();
  Mat f = Mat::Zero(n, n);
  f.leftCols(d1) = Mat::Identity(n, d1);
  Eigen::Index c = d1;
  for (const auto& l : levels) {
    f.middleCols(c, l.basis.cols()) = l.basis;
    c += l.basis.cols();
  }
  if (c != n) throw Error(ErrorKind::InvalidComplement, "level dimensions do not add up to dim");
  return f;
}

HMatrix s_map(const StructureSpec& spec, const Mat& coframe, const Mat& frame, double tol) {
  const int d = static_cast<int>(frame.cols());
  if (coframe.rows() != d || coframe.cols() != spec.n() || frame.rows() != spec.n())
    throw Error(ErrorKind::ShapeMismatch, "coframe and frame shapes");
  if ((coframe * frame - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > kSlack * tol * check_scale(coframe, frame))
    throw Error(ErrorKind::DualityViolation, "coframe does not pair with frame to the identity");
  const int d1 = spec.d1();
  const auto br = horizontal_brackets(spec, frame);
  HMatrix out(d, d, d1);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a = 0; a < d1; ++a)
        out.entry(i, j)(a) = -coframe.row(i).dot(br[static_cast<std::size_t>(j * d1 + a)]) -
                             coframe.row(j).dot(br[static_cast<std::size_t>(i * d1 + a)]);
  return out;
}

HMatrix a_map(const StructureSpec& spec, const Mat& coframe, const Mat& frame, double tol) {
  if (coframe.cols() != spec.n() || frame.rows() != spec.n()) throw Error(ErrorKind::ShapeMismatch, "coframe and frame shapes");
  if (coframe.rows() > 0 && frame.cols() > 0 &&
      (coframe * frame).cwiseAbs().maxCoeff() > kSlack * tol * check_scale(coframe, frame))
    throw Error(ErrorKind::AnnihilationViolation, "coframe does not annihilate the frame");
  const int d1 = spec.d1();
  const auto br = horizontal_brackets(spec, frame);
  HMatrix out(static_cast<int>(coframe.rows()), static_cast<int>(frame.cols()), d1);
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j)
      for (int a = 0; a < d1; ++a) out.entry(i, j)(a) = -coframe.row(i).dot(br[static_cast<std::size_t>(j * d1 + a)]);
  return out;
}

Minimizer min_s(const StructureSpec& spec, const QuotientTower& tower, int m, const Mat& coframe, const Mat& frame, double tol) {
  const HMatrix offset = s_map(spec, coframe, frame, tol);
  const Mat lin = jhat_linear(spec, tower, m, coframe, tol);
  return finish(min_norm_affine(offset.flat(), lin, std::nullopt, tol), frame, tower.level(m - 1).unit_vectors());
}

Minimizer min_a(const StructureSpec& spec, const QuotientTower& tower, int m, const Mat& coframe, const Mat& frame, double tol) {
  const HMatrix offset = a_map(spec, coframe, frame, tol);
  const Mat w = tower.level(m - 1).unit_vectors();
  const int dm = static_cast<int>(coframe.rows());
  const int dk = static_cast<int>(frame.cols());
  const auto dl = w.cols();
  Mat lin(offset.flat().size(), dk * dl);
  for (int j = 0; j < dk; ++j)
    for (Eigen::Index s = 0; s < dl; ++s) {
      HMatrix col(dm, dk, tower.d1());
      for (int i = 0; i < dm; ++i) col.entry(i, j) = jmap_horizontal(spec, tower, m - 1, coframe.row(i), w.col(s), tol);
      lin.col(j * dl + s) = col.flat();
    }
  return finish(min_norm_affine(offset.flat(), lin, std::nullopt, tol), frame, w);
}

Minimizer min_w(const StructureSpec& spec, const QuotientTower& tower, const Mat& coframe, const Mat& frame, const Vec& r,
                double tol) {
  const HMatrix offset = s_map(spec, coframe, frame, tol);
  const Mat lin = jhat_linear(spec, tower, 2, coframe, tol);
  const int d = static_cast<int>(coframe.rows());
  const int d1 = tower.d1();
  LinearConstraints c{Mat::Zero(d1, lin.cols()), -r - offset.trace()};
  for (int i = 0; i < d; ++i) c.lhs += lin.middleRows((i * d + i) * d1, d1);
  try {
    return finish(min_norm_affine(offset.flat(), lin, c, tol), frame, tower.level(1).unit_vectors());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Infeasible)
      throw Error(ErrorKind::InfeasibleW, "tr 𝒮(φ², F) = -R has no solution; the trace map should be surjective", 2);
    throw;
  }
}

Mat dual_coframe(const QuotientTower& tower, int m, const Mat& frame, const std::vector<FrameSection>& sections, double tol) {
  const Mat ann = tower.annihilator(m - 1);
  Eigen::Index cols = frame.cols();
  for (const auto& s : sections)
    if (s.level > m) cols += s.vectors.cols();
  if (cols != ann.rows()) throw Error(ErrorKind::ShapeMismatch, "sections do not complete H_" + std::to_string(m - 1), m);
  Mat all(tower.n(), cols);
  all.leftCols(frame.cols()) = frame;
  Eigen::Index c = frame.cols();
  for (const auto& s : sections)
    if (s.level > m) {
      all.middleCols(c, s.vectors.cols()) = s.vectors;
      c += s.vectors.cols();
    }
  const Mat pairing = ann * all;
  Eigen::FullPivLU<Mat> lu(pairing.transpose());
  lu.setThreshold(tol);
  if (!lu.isInvertible()) throw Error(ErrorKind::DualityViolation, "sections are not independent modulo H_" + std::to_string(m - 1), m);
  // Rows y with y * pairing = [I 0], i.e. pairing^T y^T = [I 0]^T.
  const Mat target = Mat::Identity(frame.cols(), cols);
  const Mat y = lu.solve(target.transpose()).transpose();
  return y * ann;
}

SectionStack inductive_step(const StructureSpec& spec, const QuotientTower& tower, int m, SectionStack sections,
                            std::vector<TraceStage>* trace, double tol) {
  if (sections.empty() || sections.back().level != m + 1)
    throw Error(ErrorKind::ShapeMismatch, "inductive step " + std::to_string(m) + " needs a level-" + std::to_string(m + 1) + " section", m);
  const Mat phi = sections.back().coframe;
  for (auto& s : sections) {
    const bool top = s.level == m + 1;
    const Minimizer mz = top ? min_s(spec, tower, m + 1, phi, s.vectors, tol) : min_a(spec, tower, m + 1, phi, s.vectors, tol);
    s.vectors = mz.frame;
    s.modulus = m - 1;
    if (trace) trace->push_back({top ? "min_s" : "min_a", s.level, m, mz.params, mz.value, mz.sigma_min, s.vectors, phi});
  }
  FrameSection fresh;
  fresh.level = m;
  fresh.modulus = m - 1;
  fresh.vectors = tower.level(m).unit_vectors();
  fresh.coframe = dual_coframe(tower, m, fresh.vectors, sections, tol);
  if (trace) trace->push_back({"emit", m, m, Vec(), 0.0, 0.0, fresh.vectors, fresh.coframe});
  sections.push_back(std::move(fresh));
  return sections;
}

ComplementResult minimal_rigid_complement(const StructureSpec& spec, const QuotientTower& tower, Variant variant, double tol) {
  const NondegeneracyReport nd = check_semi_j_nondegenerate(spec, tower, tol);
  if (const int k = nd.first_degenerate_level(); k > 0) {
    const auto& lv = nd.levels[static_cast<std::size_t>(k - 2)];
    throw Error(ErrorKind::NotSemiJNondegenerate,
                "Ĵ at level " + std::to_string(k) + " has a " + std::to_string(lv.kernel_dim) + "-dimensional kernel", k);
  }

  ComplementResult res;
  res.complement.variant = variant;
  res.r_vector = Vec::Zero(tower.d1());
  const int r = tower.step();
  if (r == 1) return res;

  FrameSection top;
  top.level = r;
  top.modulus = r - 1;
  top.vectors = tower.level(r).unit_vectors();
  top.coframe = tower.level(r).unit_coframe();
  res.trace.push_back({"init", r, r, Vec(), 0.0, 0.0, top.vectors, top.coframe});
  SectionStack sections{top};
  for (int m = r - 1; m >= 2; --m) sections = inductive_step(spec, tower, m, std::move(sections), &res.trace, tol);

  // Final step: the level-2 coframe fixes the horizontal components of the
  // higher sections, and the level-2 frame itself is chosen in W.
  FrameSection& s2 = sections.back();
  for (auto& s : sections) {
    if (s.level == 2) continue;
    const Minimizer mz = min_a(spec, tower, 2, s2.coframe, s.vectors, tol);
    s.vectors = mz.frame;
    s.modulus = 0;
    res.trace.push_back({"min_a", s.level, 1, mz.params, mz.value, mz.sigma_min, s.vectors, s2.coframe});
  }
  for (const auto& s : sections)
    if (s.level >= 3) res.r_vector += s_map(spec, s.coframe, s.vectors, tol).trace();

  const bool alt = variant == Variant::Alternate;
  const Minimizer mw = alt ? min_s(spec, tower, 2, s2.coframe, s2.vectors, tol)
                           : min_w(spec, tower, s2.coframe, s2.vectors, res.r_vector, tol);
  s2.vectors = mw.frame;
  s2.modulus = 0;
  res.w_rank = alt ? static_cast<int>(mw.params.size()) : mw.feasible_dim;
  res.trace.push_back({alt ? "w_unconstrained" : "w", 2, 1, mw.params, mw.value, mw.sigma_min, s2.vectors, s2.coframe});

  for (int m = 2; m <= r; ++m) {
    const FrameSection& s = sections[static_cast<std::size_t>(r - m)];
    res.complement.levels.push_back({m, canonical_basis(tower, m, s.vectors, tol)});
  }
  res.sections = std::move(sections);
  return res;
}

std::vector<int> coordinate_order(const QuotientTower& tower) {
  std::vector<int> order(static_cast<std::size_t>(tower.n()));
  std::vector<int> lv(order.size());
  for (int i = 0; i < tower.n(); ++i) {
    order[static_cast<std::size_t>(i)] = i;
    lv[static_cast<std::size_t>(i)] = tower.coordinate_level(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lv[static_cast<std::size_t>(a)] > lv[static_cast<std::size_t>(b)]; });
  return order;
}

Mat canonical_basis(const QuotientTower& tower, int m, const Mat& vectors, double tol) {
  const auto order = coordinate_order(tower);
  const int n = tower.n();
  const auto d = vectors.cols();
  Mat rows(d, n);
  for (int k = 0; k < n; ++k) rows.col(k) = vectors.row(order[static_cast<std::size_t>(k)]).transpose();
  rows = rref(rows, tol);

  std::vector<Vec> basis;
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec v(n);
    for (int k = 0; k < n; ++k) v(order[static_cast<std::size_t>(k)]) = rows(i, k);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) v -= tower.inner(m, q, v) * q;
    const double nrm2 = tower.inner(m, v, v);
    if (!(nrm2 > tol * tol))
      throw Error(ErrorKind::InvalidComplement, "V_" + std::to_string(m) + " does not project isomorphically onto Ĥ_" + std::to_string(m), m);
    v /= std::sqrt(nrm2);
    for (int k : order)
      if (std::abs(v(k)) > 1e-12) {
        if (v(k) < 0) v = -v;
        break;
      }
    basis.push_back(v);
  }
  Mat out(n, d);
  for (Eigen::Index i = 0; i < d; ++i) out.col(i) = basis[static_cast<std::size_t>(i)].unaryExpr(&snap);
  return out;
}

GradedComplement make_complement(const QuotientTower& tower, const std::vector<ComplementBlock>& blocks, double tol) {
  GradedComplement out;
  out.variant = Variant::UserSupplied;
  for (int m = 2; m <= tower.step(); ++m) {
    const ComplementBlock* blk = nullptr;
    for (const auto& b : blocks) {
      if (b.level != m) continue;
      if (blk) throw Error(ErrorKind::InvalidComplement, "duplicate block for level " + std::to_string(m), m);
      blk = &b;
    }
    if (!blk) throw Error(ErrorKind::InvalidComplement, "missing block for level " + std::to_string(m), m);
    if (static_cast<int>(blk->vectors.size()) != tower.dim(m))
      throw Error(ErrorKind::InvalidComplement,
                  "level " + std::to_string(m) + " needs " + std::to_string(tower.dim(m)) + " vectors, got " + std::to_string(blk->vectors.size()), m);
    Mat v(tower.n(), tower.dim(m));
    for (int j = 0; j < tower.dim(m); ++j) {
      const Vec& x = blk->vectors[static_cast<std::size_t>(j)];
      if (x.size() != tower.n()) throw Error(ErrorKind::InvalidComplement, "vector length differs from dim", m);
      if (tower.membership_residual(m, x) > kSlack * tol * std::max(1.0, x.norm()))
        throw Error(ErrorKind::InvalidComplement, "vector " + std::to_string(j) + " of level " + std::to_string(m) + " is not in H_" + std::to_string(m), m);
      v.col(j) = x;
    }
    Mat classes(tower.dim(m), tower.dim(m));
    for (int j = 0; j < tower.dim(m); ++j) classes.col(j) = tower.class_coords(m, v.col(j));
    if (numerical_rank(classes, tol) < tower.dim(m))
      throw Error(ErrorKind::InvalidComplement, "V_" + std::to_string(m) + " meets H_" + std::to_string(m - 1), m);
    out.levels.push_back({m, canonical_basis(tower, m, v, tol)});
  }
  for (const auto& b : blocks)
    if (b.level < 2 || b.level > tower.step())
      throw Error(ErrorKind::InvalidComplement, "no level " + std::to_string(b.level) + " in a step-" + std::to_string(tower.step()) + " structure", b.level);
  return out;
}

double verify_v_rigid(const StructureSpec& spec, const GradedComplement& complement) {
  const int d1 = spec.d1();
  const Mat f = complement.adapted_frame(d1);
  const Mat psi = f.fullPivLu().inverse();
  double worst = 0.0;
  for (int a = 0; a < d1; ++a) {
    const Vec x = Vec::Unit(spec.n(), a);
    double sum = 0.0;
    for (Eigen::Index i = d1; i < f.cols(); ++i) sum -= psi.row(i).dot(spec.bracket(Vec(f.col(i)), x));
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

VNormalResult solve_v_normal(const StructureSpec& spec, const QuotientTower& tower, double tol) {
  VNormalResult out;
  out.complement.variant = Variant::MinimalRigid;
  const int r = tower.step();
  if (r == 1) {
    out.exists = true;
    return out;
  }

  // 𝒮(φ, E + Z) = 0 for Z ∈ (Ĥ_{m-1})^{d_m}, assembled by probing 𝒮 along
  // each parameter direction. Returns false when the system is inconsistent.
  auto solve_level = [&](int m, FrameSection& s) {
    const Mat w = tower.level(m - 1).unit_vectors();
    const HMatrix base = s_map(spec, s.coframe, s.vectors, tol);
    Mat lin(base.flat().size(), s.vectors.cols() * w.cols());
    for (Eigen::Index j = 0; j < s.vectors.cols(); ++j)
      for (Eigen::Index t = 0; t < w.cols(); ++t) {
        Mat probe = s.vectors;
        probe.col(j) += w.col(t);
        lin.col(j * w.cols() + t) = s_map(spec, s.coframe, probe, tol).flat() - base.flat();
      }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(lin);
    cod.setThreshold(tol);
    const Vec z = cod.solve(-base.flat());
    const double res = (base.flat() + lin * z).norm();
    out.residual = std::max(out.residual, res);
    s.vectors = apply_params(s.vectors, w, z);
    return res <= kSlack * tol * std::max(1.0, base.norm());
  };

  FrameSection top{r, r - 1, tower.level(r).unit_vectors(), tower.level(r).unit_coframe()};
  SectionStack sections{top};
  for (int m = r - 1; m >= 1; --m) {
    const Mat phi = sections.back().coframe;
    for (auto& s : sections) {
      if (s.level == m + 1) {
        if (!solve_level(m + 1, s)) {
          out.failing_level = m + 1;
          return out;
        }
      } else {
        s.vectors = min_a(spec, tower, m + 1, phi, s.vectors, tol).frame;
      }
      s.modulus = m - 1;
    }
    if (m == 1) break;
    FrameSection fresh{m, m - 1, tower.level(m).unit_vectors(), Mat()};
    fresh.coframe = dual_coframe(tower, m, fresh.vectors, sections, tol);
    sections.push_back(std::move(fresh));
  }
  out.exists = true;
  for (int m = 2; m <= r; ++m)
    out.complement.levels.push_back({m, canonical_basis(tower, m, sections[static_cast<std::size_t>(r - m)].vectors, tol)});
  return out;
}

}  // namespace subriem
