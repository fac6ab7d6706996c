#include "support.hpp"

#include "subriem/brackets.hpp"
#include "subriem/errors.hpp"

#include <Eigen/LU>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef SUBRIEM_DATA_DIR
#error "SUBRIEM_DATA_DIR must point at the data/ directory"
#endif

namespace subriem::testing {

std::string data_path(const std::string& name) { return std::string(SUBRIEM_DATA_DIR) + "/" + name; }

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

StructureSpec load(const std::string& name) { return parse_structure(read_text(data_path(name))); }
StructureDocument load_document(const std::string& name) { return parse_document(read_text(data_path(name))); }

namespace {

Vec kron(const Vec& u, const Vec& v) {
  Vec out(u.size() * v.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out.segment(i * v.size(), v.size()) = u(i) * v;
  return out;
}

Vec tensor_bracket(const Vec& u, const Vec& v) { return kron(u, v) - kron(v, u); }

Mat gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

Mat uniform(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

std::vector<std::string> frame_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("F" + std::to_string(i));
  return names;
}

}  // namespace

StructureSpec free_nilpotent_quotient(int d, int step, int top_dim, std::mt19937_64& rng) {
  // layers[k] has orthonormal columns spanning the degree-(k+1) Lie elements
  // inside (R^d)^{⊗(k+1)}.
  std::vector<Mat> layers{Mat::Identity(d, d)};
  for (int k = 1; k < step; ++k) {
    std::vector<Vec> gens;
    for (int a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < layers[static_cast<std::size_t>(k - 1)].cols(); ++b)
        gens.push_back(tensor_bracket(Vec::Unit(d, a), layers[static_cast<std::size_t>(k - 1)].col(b)));
    layers.push_back(orthonormalize(gens, static_cast<int>(gens.front().size())).basis);
  }
  Mat keep = Mat::Identity(layers.back().cols(), layers.back().cols());
  if (top_dim > 0 && top_dim < layers.back().cols())
    keep = orthonormalize(gaussian(layers.back().cols(), top_dim, rng)).basis;

  std::vector<int> offset{0};
  for (int k = 0; k < step; ++k)
    offset.push_back(offset.back() + static_cast<int>(k + 1 == step ? keep.cols() : layers[static_cast<std::size_t>(k)].cols()));
  const int n = offset.back();
  StructureSpec spec(n, d, frame_names(n));

  auto coords = [&](int k, const Vec& x) -> Vec {
    const Mat& l = layers[static_cast<std::size_t>(k)];
    Vec c = l.transpose() * x;
    return k + 1 == step ? Vec(keep.transpose() * c) : c;
  };
  auto element = [&](int k, int idx) -> Vec {
    const Mat& l = layers[static_cast<std::size_t>(k)];
    return k + 1 == step ? Vec(l * keep.col(idx)) : Vec(l.col(idx));
  };
  for (int p = 0; p < step; ++p)
    for (int q = 0; p + q + 1 < step; ++q)
      for (int i = 0; i < offset[static_cast<std::size_t>(p + 1)] - offset[static_cast<std::size_t>(p)]; ++i)
        for (int j = 0; j < offset[static_cast<std::size_t>(q + 1)] - offset[static_cast<std::size_t>(q)]; ++j) {
          const int gi = offset[static_cast<std::size_t>(p)] + i;
          const int gj = offset[static_cast<std::size_t>(q)] + j;
          if (gi >= gj) continue;
          const Vec c = coords(p + q + 1, tensor_bracket(element(p, i), element(q, j)));
          for (Eigen::Index t = 0; t < c.size(); ++t)
            if (std::abs(c(t)) > 1e-14) spec.set_bracket(gi, gj, offset[static_cast<std::size_t>(p + q + 1)] + static_cast<int>(t), c(t));
        }
  validate(spec);
  return spec;
}

StructureSpec random_frame(const StructureSpec& spec, std::mt19937_64& rng, double tilt) {
  const int n = spec.n();
  const int d1 = spec.d1();
  Mat m = Mat::Identity(n, n) + uniform(n, n, rng, 0.5);
  m.bottomLeftCorner(n - d1, d1) = uniform(n - d1, d1, rng, tilt);
  if (std::abs(m.determinant()) < 0.1) m += Mat::Identity(n, n);
  return reframe(spec, m);
}

const std::vector<CatalogueEntry>& catalogue() {
  static const std::vector<CatalogueEntry> c{{2, 2, 0}, {3, 2, 0}, {3, 2, 2}, {4, 2, 1}, {4, 2, 2}, {5, 2, 1},
                                              {5, 2, 2}, {2, 3, 0}, {2, 3, 1}, {2, 4, 2}, {2, 4, 1}, {3, 3, 1}};
  return c;
}

std::vector<RandomPick> random_structures(int count, std::uint64_t seed, int min_step, int max_step, int max_n,
                                          bool want_degenerate) {
  std::mt19937_64 rng(seed);
  std::vector<RandomPick> out;
  const auto& cat = catalogue();
  std::size_t next = 0;
  for (int attempt = 0; attempt < 200 * count && static_cast<int>(out.size()) < count; ++attempt) {
    const CatalogueEntry e = cat[next++ % cat.size()];
    if (e.step < min_step || e.step > max_step) continue;
    try {
      StructureSpec s = free_nilpotent_quotient(e.d, e.step, e.top_dim, rng);
      if (s.n() > max_n) continue;
      if (attempt % 3 != 0) s = random_frame(s, rng);
      const QuotientTower t = quotient_tower(s);
      if (t.step() < min_step || t.step() > max_step) continue;
      const bool nondeg = check_semi_j_nondegenerate(s, t).semi_j_nondegenerate;
      if (nondeg == want_degenerate) continue;
      out.push_back({std::move(s), e});
    } catch (const Error&) {
      continue;
    }
  }
  if (static_cast<int>(out.size()) < count) throw std::runtime_error("random structure generator ran dry");
  return out;
}

StructureSpec add_idle_generator(const StructureSpec& spec) {
  const int n = spec.n() + 1;
  const int d1 = spec.d1() + 1;
  // New generator goes last among the horizontal vectors.
  auto map = [&](int i) { return i < spec.d1() ? i : i + 1; };
  StructureSpec out(n, d1, frame_names(n));
  for (int i = 0; i < spec.n(); ++i)
    for (int j = i + 1; j < spec.n(); ++j)
      for (int k = 0; k < spec.n(); ++k)
        if (spec.coeff(i, j, k) != 0.0) out.set_bracket(map(i), map(j), map(k), spec.coeff(i, j, k));
  return out;
}

Mat random_orthogonal(int d, std::mt19937_64& rng) {
  const Eigen::HouseholderQR<Mat> qr(gaussian(d, d, rng));
  return qr.householderQ();
}

Mat horizontal_rotation(const StructureSpec& spec, const Mat& o) {
  Mat m = Mat::Identity(spec.n(), spec.n());
  m.topLeftCorner(spec.d1(), spec.d1()) = o;
  return m;
}

std::vector<std::string> fixture_names() {
  return {"heisenberg.sr", "heisenberg_scaled.sr", "example.sr", "engel.sr", "htype.sr", "quaternionic.sr"};
}

namespace {

template <class Eval>
AffineProbe probe(const Mat& frame, const Mat& w, Eval eval) {
  AffineProbe p;
  p.b = eval(frame);
  p.a.resize(p.b.size(), frame.cols() * w.cols());
  for (Eigen::Index j = 0; j < frame.cols(); ++j)
    for (Eigen::Index s = 0; s < w.cols(); ++s) {
      Mat f = frame;
      f.col(j) += w.col(s);
      p.a.col(j * w.cols() + s) = eval(f) - p.b;
    }
  return p;
}

}  // namespace

AffineProbe probe_s(const StructureSpec& spec, const QuotientTower& tower, int m, const Mat& coframe, const Mat& frame) {
  return probe(frame, tower.level(m - 1).unit_vectors(), [&](const Mat& f) { return s_map(spec, coframe, f).flat(); });
}

AffineProbe probe_a(const StructureSpec& spec, const QuotientTower& tower, int m, const Mat& coframe, const Mat& frame) {
  return probe(frame, tower.level(m - 1).unit_vectors(), [&](const Mat& f) { return a_map(spec, coframe, f).flat(); });
}

void probe_trace(const AffineProbe& p, int d, int d1, Vec& t0, Mat& t) {
  t0 = Vec::Zero(d1);
  t = Mat::Zero(d1, p.a.cols());
  for (int i = 0; i < d; ++i) {
    t0 += p.b.segment((i * d + i) * d1, d1);
    t += p.a.middleRows((i * d + i) * d1, d1);
  }
}

GridResult grid_minimize(const std::function<double(const Vec&)>& f, int p, const Vec& start) {
  GridResult r;
  r.z = start;
  r.value = f(r.z);
  ++r.evaluations;
  if (p == 0) return r;

  std::vector<Vec> stencil;
  if (p <= 6) {
    Eigen::VectorXi digit = Eigen::VectorXi::Constant(p, -1);
    while (true) {
      if (digit.cwiseAbs().sum() > 0) stencil.push_back(digit.cast<double>());
      int i = 0;
      while (i < p && digit(i) == 1) digit(i++) = -1;
      if (i == p) break;
      ++digit(i);
    }
  } else {
    for (int i = 0; i < p; ++i) {
      stencil.push_back(Vec::Unit(p, i));
      stencil.push_back(-Vec::Unit(p, i));
    }
  }

  for (double h : {1e-1, 1e-2, 1e-3, 1e-4}) {
    for (int iter = 0; iter < 200000; ++iter) {
      const Vec* best = nullptr;
      double best_val = r.value;
      for (const auto& s : stencil) {
        const double v = f(r.z + h * s);
        ++r.evaluations;
        if (v < best_val) {
          best_val = v;
          best = &s;
        }
      }
      if (!best) break;
      Vec step = h * *best;
      r.z += step;
      r.value = best_val;
      // Pattern move: keep going (doubling) while the objective drops.
      while (true) {
        step *= 2.0;
        const double v = f(r.z + step);
        ++r.evaluations;
        if (!(v < r.value)) break;
        r.z += step;
        r.value = v;
      }
    }
  }
  return r;
}

GridResult grid_minimize_constrained(const AffineProbe& p, const Mat& c, const Vec& rhs) {
  Eigen::FullPivLU<Mat> lu(c);
  lu.setThreshold(1e-10);
  const Vec z0 = lu.solve(rhs);
  Mat kernel = lu.kernel();
  if (lu.dimensionOfKernel() == 0) kernel = Mat(c.cols(), 0);
  const Mat basis = orthonormalize(kernel).basis;
  auto f = [&](const Vec& w) { return p(z0 + basis * w); };
  GridResult r = grid_minimize(f, static_cast<int>(basis.cols()), Vec::Zero(basis.cols()));
  r.z = z0 + basis * r.z;
  return r;
}

int kernel_dim_oracle(const StructureSpec& spec, const QuotientTower& tower, int k, double tol) {
  const Mat phi = tower.level(k).reps.transpose();  // rows: basis of H_{k-1}^o modulo H_k^o
  const Mat w = tower.level(k - 1).reps;
  const int d = static_cast<int>(phi.rows());
  const int d1 = spec.d1();
  const auto dl = w.cols();
  Mat big(d * d * d1, d * dl);
  for (int j = 0; j < d; ++j)
    for (Eigen::Index s = 0; s < dl; ++s) {
      // Z_l = δ_{lj} w_s; entry (i, l) = -φ^i([Z_l, e_a]) - φ^l([Z_i, e_a]).
      Vec col = Vec::Zero(d * d * d1);
      for (int a = 0; a < d1; ++a) {
        const Vec br = spec.bracket(Vec(w.col(s)), Vec(Vec::Unit(spec.n(), a)));
        for (int i = 0; i < d; ++i) {
          col((i * d + j) * d1 + a) -= phi.row(i).dot(br);
          col((j * d + i) * d1 + a) -= phi.row(i).dot(br);
        }
      }
      big.col(j * dl + s) = col;
    }
  Eigen::FullPivLU<Mat> lu(big);
  lu.setThreshold(tol);
  return static_cast<int>(lu.dimensionOfKernel());
}

std::vector<Mat> replay_driver(const StructureSpec& spec, const QuotientTower& tower, const StageHook& hook) {
  const int r = tower.step();
  std::vector<Mat> spans;
  if (r == 1) return spans;
  SectionStack sections{{r, r - 1, tower.level(r).unit_vectors(), tower.level(r).unit_coframe()}};
  for (int m = r - 1; m >= 2; --m) {
    const Mat phi = sections.back().coframe;
    for (auto& s : sections) {
      const bool top = s.level == m + 1;
      const Minimizer mz = top ? min_s(spec, tower, m + 1, phi, s.vectors) : min_a(spec, tower, m + 1, phi, s.vectors);
      hook(top ? "min_s" : "min_a", m, phi, s.vectors, mz, Vec());
      s.vectors = mz.frame;
    }
    FrameSection fresh{m, m - 1, tower.level(m).unit_vectors(), Mat()};
    fresh.coframe = dual_coframe(tower, m, fresh.vectors, sections);
    sections.push_back(fresh);
  }
  FrameSection& s2 = sections.back();
  for (auto& s : sections) {
    if (s.level == 2) continue;
    const Minimizer mz = min_a(spec, tower, 2, s2.coframe, s.vectors);
    hook("min_a", 1, s2.coframe, s.vectors, mz, Vec());
    s.vectors = mz.frame;
  }
  Vec rv = Vec::Zero(tower.d1());
  for (const auto& s : sections)
    if (s.level >= 3) rv += s_map(spec, s.coframe, s.vectors).trace();
  const Minimizer mw = min_w(spec, tower, s2.coframe, s2.vectors, rv);
  hook("w", 1, s2.coframe, s2.vectors, mw, rv);
  s2.vectors = mw.frame;
  spans.resize(static_cast<std::size_t>(r - 1));
  for (const auto& s : sections) spans[static_cast<std::size_t>(s.level - 2)] = s.vectors;
  return spans;
}

}  // namespace subriem::testing
