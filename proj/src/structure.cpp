#include "subriem/structure.hpp"

#include "subriem/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <utility>

namespace subriem {

StructureSpec::StructureSpec(int n, int d1, std::vector<std::string> names)
    : n_(n), d1_(d1), names_(std::move(names)), c_(static_cast<std::size_t>(n) * n * n, 0.0) {
  if (n < 1 || d1 < 1 || d1 > n) throw Error(ErrorKind::ParseError, "need 1 <= horizontal <= dim");
  if (static_cast<int>(names_.size()) != n) throw Error(ErrorKind::ParseError, "basis must list exactly dim labels");
}

void StructureSpec::set_bracket(int i, int j, int k, double value) {
  c_[index(i, j, k)] = value;
  c_[index(j, i, k)] = -value;
}

Vec StructureSpec::bracket(int i, int j) const {
  Vec out(n_);
  for (int k = 0; k < n_; ++k) out(k) = coeff(i, j, k);
  return out;
}

Vec StructureSpec::bracket(const Vec& u, const Vec& v) const {
  Vec out = Vec::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    if (u(i) == 0.0) continue;
    for (int j = 0; j < n_; ++j) {
      const double w = u(i) * v(j);
      if (w == 0.0) continue;
      const double* row = &c_[index(i, j, 0)];
      for (int k = 0; k < n_; ++k) out(k) += w * row[k];
    }
  }
  return out;
}

int StructureSpec::find(std::string_view name) const {
  for (int i = 0; i < n_; ++i)
    if (names_[static_cast<std::size_t>(i)] == name) return i;
  return -1;
}

double StructureSpec::max_abs_coeff() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

JacobiCheck jacobi_residual(const StructureSpec& spec) {
  const int n = spec.n();
  JacobiCheck worst;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int m = 0; m < n; ++m) {
            s += spec.coeff(i, j, m) * spec.coeff(m, k, l) + spec.coeff(j, k, m) * spec.coeff(m, i, l) +
                 spec.coeff(k, i, m) * spec.coeff(m, j, l);
          }
          if (std::abs(s) > worst.residual) worst = {std::abs(s), i, j, k};
        }
      }
  return worst;
}

void validate(const StructureSpec& spec, double tol) {
  const JacobiCheck jc = jacobi_residual(spec);
  const double scale = std::max(1.0, spec.max_abs_coeff() * spec.max_abs_coeff());
  if (jc.residual > tol * scale) {
    const auto& nm = spec.names();
    throw Error(ErrorKind::JacobiViolation, "Jacobi identity fails for (" + nm[jc.i] + ", " + nm[jc.j] + ", " + nm[jc.k] +
                                                ") with residual " + std::to_string(jc.residual));
  }
}

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + msg);
}

double parse_real(const std::string& tok, int line) {
  std::string_view s = tok;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) fail(line, "expected a real number, got '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok, int line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(line, "expected an integer, got '" + tok + "'");
  return v;
}

}  // namespace

StructureDocument parse_document(std::string_view text, double tol) {
  int dim = -1;
  int horizontal = -1;
  std::vector<std::string> names;
  struct Pending {
    int line;
    std::string a, b;
    std::vector<std::pair<double, std::string>> terms;
  };
  std::vector<Pending> brackets;
  std::vector<std::pair<int, std::vector<std::pair<int, std::vector<double>>>>> blocks;  // level, (line, coords)

  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto tok = tokenize(raw);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    if (kw == "dim") {
      if (tok.size() != 2) fail(lineno, "usage: dim <n>");
      if (dim != -1) fail(lineno, "dim given twice");
      dim = parse_int(tok[1], lineno);
      if (dim < 1) fail(lineno, "dim must be positive");
    } else if (kw == "horizontal") {
      if (tok.size() != 2) fail(lineno, "usage: horizontal <d1>");
      if (horizontal != -1) fail(lineno, "horizontal given twice");
      horizontal = parse_int(tok[1], lineno);
    } else if (kw == "basis") {
      if (!names.empty()) fail(lineno, "basis given twice");
      names.assign(tok.begin() + 1, tok.end());
      std::set<std::string> uniq(names.begin(), names.end());
      if (uniq.size() != names.size()) fail(lineno, "duplicate basis label");
      if (names.empty()) fail(lineno, "basis needs labels");
    } else if (kw == "bracket") {
      if (tok.size() < 6 || tok[3] != "=" || (tok.size() - 4) % 2 != 0)
        fail(lineno, "usage: bracket <a> <b> = <c> <name> [<c> <name> ...]");
      Pending p{lineno, tok[1], tok[2], {}};
      for (std::size_t t = 4; t < tok.size(); t += 2) p.terms.emplace_back(parse_real(tok[t], lineno), tok[t + 1]);
      brackets.push_back(std::move(p));
    } else if (kw == "complement") {
      if (tok.size() != 2) fail(lineno, "usage: complement <level>");
      blocks.push_back({parse_int(tok[1], lineno), {}});
    } else if (kw == "vec") {
      if (blocks.empty()) fail(lineno, "vec outside a complement block");
      std::vector<double> coords;
      for (std::size_t t = 1; t < tok.size(); ++t) coords.push_back(parse_real(tok[t], lineno));
      blocks.back().second.emplace_back(lineno, std::move(coords));
    } else {
      fail(lineno, "unknown keyword '" + kw + "'");
    }
  }
  if (dim == -1) throw Error(ErrorKind::ParseError, "missing 'dim'");
  if (horizontal == -1) throw Error(ErrorKind::ParseError, "missing 'horizontal'");
  if (names.empty()) throw Error(ErrorKind::ParseError, "missing 'basis'");
  if (static_cast<int>(names.size()) != dim) throw Error(ErrorKind::ParseError, "basis lists " + std::to_string(names.size()) +
                                                                                    " labels but dim is " + std::to_string(dim));
  if (horizontal < 1 || horizontal > dim) throw Error(ErrorKind::ParseError, "horizontal must lie in [1, dim]");

  StructureDocument doc{StructureSpec(dim, horizontal, names), {}};
  StructureSpec& spec = doc.spec;
  std::set<std::pair<int, int>> seen;
  for (const auto& p : brackets) {
    const int a = spec.find(p.a);
    const int b = spec.find(p.b);
    if (a < 0) fail(p.line, "unknown label '" + p.a + "'");
    if (b < 0) fail(p.line, "unknown label '" + p.b + "'");
    if (a == b) fail(p.line, "bracket of a label with itself");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) fail(p.line, "bracket [" + p.a + ", " + p.b + "] listed twice");
    Vec v = Vec::Zero(dim);
    for (const auto& [coef, name] : p.terms) {
      const int k = spec.find(name);
      if (k < 0) fail(p.line, "unknown label '" + name + "'");
      v(k) += coef;
    }
    for (int k = 0; k < dim; ++k) spec.set_bracket(a, b, k, v(k));
  }
  validate(spec, tol);

  for (const auto& [level, rows] : blocks) {
    ComplementBlock blk;
    blk.level = level;
    for (const auto& [line, coords] : rows) {
      if (static_cast<int>(coords.size()) != dim) fail(line, "vec needs exactly dim coordinates");
      blk.vectors.emplace_back(Eigen::Map<const Vec>(coords.data(), dim));
    }
    doc.complement.push_back(std::move(blk));
  }
  return doc;
}

StructureSpec parse_structure(std::string_view text, double tol) {
  StructureDocument doc = parse_document(text, tol);
  if (!doc.complement.empty()) throw Error(ErrorKind::ParseError, "complement blocks are only accepted by 'check'");
  return std::move(doc.spec);
}

std::string format_structure(const StructureSpec& spec) {
  std::ostringstream out;
  out << "dim " << spec.n() << "\nhorizontal " << spec.d1() << "\nbasis";
  for (const auto& nm : spec.names()) out << ' ' << nm;
  out << '\n';
  char buf[64];
  for (int i = 0; i < spec.n(); ++i)
    for (int j = i + 1; j < spec.n(); ++j) {
      std::string terms;
      for (int k = 0; k < spec.n(); ++k) {
        const double c = spec.coeff(i, j, k);
        if (c == 0.0) continue;
        std::snprintf(buf, sizeof buf, " %.17g ", c);
        terms += buf + spec.names()[static_cast<std::size_t>(k)];
      }
      if (!terms.empty()) out << "bracket " << spec.names()[i] << ' ' << spec.names()[j] << " =" << terms << '\n';
    }
  return out.str();
}

StructureSpec reframe(const StructureSpec& spec, const Mat& frame) {
  const int n = spec.n();
  if (frame.rows() != n || frame.cols() != n) throw Error(ErrorKind::ShapeMismatch, "reframe needs an n x n frame");
  const Eigen::FullPivLU<Mat> lu(frame);
  if (!lu.isInvertible()) throw Error(ErrorKind::ShapeMismatch, "reframe needs an invertible frame");
  StructureSpec out(n, spec.d1(), spec.names());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const Vec coords = lu.solve(spec.bracket(Vec(frame.col(a)), Vec(frame.col(b))));
      for (int k = 0; k < n; ++k) out.set_bracket(a, b, k, coords(k));
    }
  return out;
}

Filtration compute_filtration(const StructureSpec& spec, double tol) {
  const int n = spec.n();
  const int d1 = spec.d1();
  Filtration f;
  f.spaces.push_back(orthonormalize(Mat::Identity(n, d1), tol));
  while (f.spaces.back().rank() < n) {
    const Mat& cur = f.spaces.back().basis;
    std::vector<Vec> gens;
    for (Eigen::Index c = 0; c < cur.cols(); ++c) gens.emplace_back(cur.col(c));
    for (Eigen::Index c = 0; c < cur.cols(); ++c)
      for (int a = 0; a < d1; ++a) gens.push_back(spec.bracket(Vec(cur.col(c)), Vec(Vec::Unit(n, a))));
    Subspace next = orthonormalize(gens, n, tol);
    if (next.rank() == f.spaces.back().rank())
      throw Error(ErrorKind::NotBracketGenerating,
                  "filtration stabilizes at rank " + std::to_string(next.rank()) + " < " + std::to_string(n),
                  static_cast<int>(f.spaces.size()) + 1);
    f.spaces.push_back(std::move(next));
  }
  int prev = 0;
  for (const auto& s : f.spaces) {
    f.growth.push_back(s.rank() - prev);
    prev = s.rank();
  }
  f.step = static_cast<int>(f.spaces.size());
  return f;
}

QuotientTower::QuotientTower(int n, int d1, std::vector<QuotientLevel> levels, Filtration filtration)
    : n_(n), d1_(d1), levels_(std::move(levels)), filtration_(std::move(filtration)) {}

std::vector<int> QuotientTower::growth() const {
  std::vector<int> g;
  for (const auto& l : levels_) g.push_back(l.dim);
  return g;
}

Mat QuotientTower::span(int m) const {
  if (m <= 0) return Mat(n_, 0);
  return filtration_.spaces.at(static_cast<std::size_t>(std::min(m, step()) - 1)).basis;
}

double QuotientTower::membership_residual(int m, const Vec& v) const {
  const Mat b = span(m);
  return (v - b * (b.transpose() * v)).norm();
}

double QuotientTower::annihilation_residual(int m, const Covec& phi) const {
  const Mat b = span(m);
  return b.cols() == 0 ? 0.0 : (phi * b).cwiseAbs().maxCoeff();
}

Mat QuotientTower::annihilator(int m) const {
  // The reps of levels > m together with H_m form an orthonormal basis of R^n.
  int rows = 0;
  for (int l = m + 1; l <= step(); ++l) rows += dim(l);
  Mat out(rows, n_);
  int r = 0;
  for (int l = m + 1; l <= step(); ++l) {
    out.middleRows(r, dim(l)) = level(l).reps.transpose();
    r += dim(l);
  }
  return out;
}

Vec QuotientTower::unit_coords(int m, const Vec& v) const {
  const auto& q = level(m);
  return q.orthonormal.transpose() * q.gram * class_coords(m, v);
}

double QuotientTower::inner(int m, const Vec& u, const Vec& v) const {
  return class_coords(m, u).dot(level(m).gram * class_coords(m, v));
}

double QuotientTower::dual_inner(int m, const Covec& phi, const Covec& psi) const {
  const auto& q = level(m);
  return (phi * q.reps).dot((psi * q.reps) * q.dual_gram);
}

int QuotientTower::coordinate_level(int i) const {
  const Vec e = Vec::Unit(n_, i);
  for (int m = 1; m <= step(); ++m)
    if (membership_residual(m, e) <= filtration_.spaces.front().tol * 1e3) return m;
  return step();
}

QuotientTower quotient_tower(const StructureSpec& spec, const Filtration& filtration, double tol) {
  const int n = spec.n();
  const int d1 = spec.d1();
  std::vector<QuotientLevel> levels;
  for (int m = 1; m <= filtration.step; ++m) {
    QuotientLevel q;
    q.level = m;
    q.dim = filtration.growth[static_cast<std::size_t>(m - 1)];
    if (m == 1) {
      q.reps = filtration.spaces[0].basis;
    } else {
      const Mat& lower = filtration.spaces[static_cast<std::size_t>(m - 2)].basis;
      const Mat& upper = filtration.spaces[static_cast<std::size_t>(m - 1)].basis;
      Mat both(n, lower.cols() + upper.cols());
      both << lower, upper;
      const Subspace s = orthonormalize(both, tol);
      q.reps = s.basis.rightCols(s.rank() - lower.cols());
    }
    levels.push_back(std::move(q));
  }

  levels[0].gram = Mat::Identity(d1, d1);
  levels[0].dual_gram = Mat::Identity(d1, d1);
  levels[0].orthonormal = Mat::Identity(d1, d1);
  for (int m = 2; m <= filtration.step; ++m) {
    const QuotientLevel& prev = levels[static_cast<std::size_t>(m - 2)];
    QuotientLevel& q = levels[static_cast<std::size_t>(m - 1)];
    // Columns: images of an orthonormal basis of the source (Λ²H for m = 2,
    // H ⊗ Ĥ_{m-1} otherwise) under the bracket map, in `reps` coordinates.
    std::vector<Vec> images;
    if (m == 2) {
      for (int a = 0; a < d1; ++a)
        for (int b = a + 1; b < d1; ++b) images.push_back(q.reps.transpose() * (-spec.bracket(a, b)));
    } else {
      const Mat w = prev.unit_vectors();
      for (int a = 0; a < d1; ++a)
        for (Eigen::Index s = 0; s < w.cols(); ++s)
          images.push_back(q.reps.transpose() * (-spec.bracket(Vec(Vec::Unit(n, a)), Vec(w.col(s)))));
    }
    Mat p(q.dim, static_cast<Eigen::Index>(images.size()));
    for (std::size_t c = 0; c < images.size(); ++c) p.col(static_cast<Eigen::Index>(c)) = images[c];
    if (numerical_rank(p, tol) < q.dim)
      throw Error(ErrorKind::NotBracketGenerating, "bracket map onto level " + std::to_string(m) + " is not surjective", m);
    // The pushforward of an orthonormal source metric through a surjection P
    // has Gram (P P^T)^{-1}; the dual Gram is P P^T itself.
    q.dual_gram = p * p.transpose();
    q.gram = q.dual_gram.inverse();
    q.gram = 0.5 * (q.gram + q.gram.transpose());
    // G = L L^T  =>  C = L^{-T} satisfies C^T G C = I.
    const Eigen::LLT<Mat> llt(q.gram);
    q.orthonormal = llt.matrixU().solve(Mat::Identity(q.dim, q.dim));
  }
  return QuotientTower(n, d1, std::move(levels), filtration);
}

}  // namespace subriem
