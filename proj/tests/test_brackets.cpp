#include "subriem/brackets.hpp"
#include "subriem/errors.hpp"
#include "support/support.hpp"

#include <doctest.h>

#include <random>

using namespace subriem;
using subriem::testing::load;

namespace {

Mat covectors(int n, std::initializer_list<int> idx) {
  Mat m = Mat::Zero(static_cast<Eigen::Index>(idx.size()), n);
  int r = 0;
  for (int i : idx) m(r++, i) = 1.0;
  return m;
}

Vec horiz(double x1, double x2) {
  Vec v(2);
  v << x1, x2;
  return v;
}

}  // namespace

TEST_CASE("bracket_quotient on the example") {
  const StructureSpec s = load("example.sr");
  const QuotientTower t = quotient_tower(s);
  // B^{1,1}(X1, X2) = -[T].
  const QuotientClass c = bracket_quotient(s, t, 1, 1, Vec::Unit(5, 0), Vec::Unit(5, 1));
  CHECK(c.level == 2);
  CHECK(t.level(2).reps.col(0).dot(Vec::Unit(5, 2)) * c.coords(0) == doctest::Approx(-1.0));
  // Sums above the step carry the zero class.
  CHECK(bracket_quotient(s, t, 2, 2, Vec::Unit(5, 2), Vec::Unit(5, 2)).beyond_step);
}

TEST_CASE("Ĵ on the example: level 2") {
  const StructureSpec s = load("example.sr");
  const QuotientTower t = quotient_tower(s);
  const Mat tau = covectors(5, {2});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = u(rng), b = u(rng);
    Mat z(5, 1);
    z << a, b, 0, 0, 0;
    const HMatrix j = jhat(s, t, 2, tau, z);
    CHECK((j.entry(0, 0) - horiz(2 * b, -2 * a)).norm() < 1e-12);
  }
}

TEST_CASE("Ĵ on the example: level 3") {
  const StructureSpec s = load("example.sr");
  const QuotientTower t = quotient_tower(s);
  const Mat sigma = covectors(5, {3, 4});
  for (auto [a, b] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{0.7, -1.3}}) {
    Mat z = Mat::Zero(5, 2);
    z(2, 0) = a;
    z(2, 1) = b;
    const HMatrix j = jhat(s, t, 3, sigma, z);
    CHECK((j.entry(0, 0) - horiz(2 * a, 0)).norm() < 1e-12);
    CHECK((j.entry(0, 1) - horiz(b, a)).norm() < 1e-12);
    CHECK((j.entry(1, 0) - horiz(b, a)).norm() < 1e-12);
    CHECK((j.entry(1, 1) - horiz(0, 2 * b)).norm() < 1e-12);
  }
}

TEST_CASE("jmap rejects covectors that do not annihilate the lower level") {
  const StructureSpec s = load("example.sr");
  const QuotientTower t = quotient_tower(s);
  try {
    jmap(s, t, 1, 1, Covec(Vec::Unit(5, 0).transpose()));
    FAIL("expected AnnihilationViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AnnihilationViolation);
  }
}

TEST_CASE("jmap defines the pairing with the quotient bracket") {
  for (const auto& pick : subriem::testing::random_structures(8, 3, 2, 4, 7)) {
    const QuotientTower t = quotient_tower(pick.spec);
    for (int m = 2; m <= t.step(); ++m) {
      const Mat w = t.level(m - 1).unit_vectors();
      const Mat cof = t.level(m).unit_coframe();
      for (int i = 0; i < cof.rows(); ++i) {
        const JOperator j = jmap(pick.spec, t, m - 1, 1, cof.row(i));
        for (Eigen::Index s = 0; s < w.cols(); ++s)
          for (int a = 0; a < pick.spec.d1(); ++a) {
            // <𝒥 w_s, e_a> = φ(B(w_s, e_a)) = -φ([w_s, e_a]).
            const double want = -cof.row(i).dot(pick.spec.bracket(Vec(w.col(s)), Vec(Vec::Unit(pick.spec.n(), a))));
            CHECK(j.matrix(a, s) == doctest::Approx(want).epsilon(1e-9));
          }
      }
    }
  }
}

TEST_CASE("jhat_linear agrees with jhat on random rows") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (const auto& pick : subriem::testing::random_structures(8, 11, 2, 4, 7)) {
    const QuotientTower t = quotient_tower(pick.spec);
    for (int k = 2; k <= t.step(); ++k) {
      const Mat cof = t.level(k).unit_coframe();
      const Mat w = t.level(k - 1).unit_vectors();
      const Mat lin = jhat_linear(pick.spec, t, k, cof);
      const int dk = t.dim(k);
      const auto dl = w.cols();
      Vec params(dk * dl);
      for (Eigen::Index i = 0; i < params.size(); ++i) params(i) = g(rng);
      Mat z(pick.spec.n(), dk);
      for (int j = 0; j < dk; ++j) z.col(j) = w * params.segment(j * dl, dl);
      CHECK((lin * params - jhat(pick.spec, t, k, cof, z).flat()).norm() < 1e-10);
    }
  }
}

TEST_CASE("Ĵ is equivariant under orthogonal horizontal reframing") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (const auto& pick : subriem::testing::random_structures(5, 23, 2, 4, 7)) {
    const StructureSpec& s = pick.spec;
    const QuotientTower t = quotient_tower(s);
    const Mat o = subriem::testing::random_orthogonal(s.d1(), rng);
    const Mat m = subriem::testing::horizontal_rotation(s, o);
    const StructureSpec r = reframe(s, m);
    const QuotientTower tr = quotient_tower(r);
    for (int k = 2; k <= t.step(); ++k) {
      const Mat cof = t.level(k).unit_coframe();
      Mat z = t.level(k - 1).unit_vectors() * Mat::NullaryExpr(t.dim(k - 1), t.dim(k), [&] { return g(rng); });
      const HMatrix a = jhat(s, t, k, cof, z);
      const HMatrix b = jhat(r, tr, k, cof * m, m.inverse() * z);
      for (int i = 0; i < t.dim(k); ++i)
        for (int j = 0; j < t.dim(k); ++j) CHECK((o.transpose() * a.entry(i, j) - b.entry(i, j)).norm() < 1e-9);
    }
  }
}

TEST_CASE("kernel dimensions match the independent oracle") {
  auto compare = [](const StructureSpec& s) {
    const QuotientTower t = quotient_tower(s);
    const NondegeneracyReport rep = check_semi_j_nondegenerate(s, t);
    for (const LevelVerdict& v : rep.levels) {
      CHECK(v.kernel_dim == subriem::testing::kernel_dim_oracle(s, t, v.level));
      CHECK(v.injective == (v.kernel_dim == 0));
    }
    return rep;
  };
  for (const auto& pick : subriem::testing::random_structures(10, 31, 2, 4, 7)) CHECK(compare(pick.spec).semi_j_nondegenerate);
  for (const auto& pick : subriem::testing::random_structures(4, 32, 2, 4, 8, true)) CHECK_FALSE(compare(pick.spec).semi_j_nondegenerate);

  const NondegeneracyReport l3 = compare(load("degenerate_level3.sr"));
  CHECK(l3.first_degenerate_level() == 3);
  CHECK(l3.levels[1].kernel_dim == 1);
  const NondegeneracyReport l2 = compare(load("heis_plus_line.sr"));
  CHECK(l2.first_degenerate_level() == 2);
  const NondegeneracyReport idle = compare(subriem::testing::add_idle_generator(load("example.sr")));
  CHECK(idle.first_degenerate_level() == 2);
  CHECK(compare(load("example.sr")).first_degenerate_level() == -1);
}

TEST_CASE("step-2 sampled conditions") {
  {
    const StructureSpec s = load("heisenberg.sr");
    const Step2Report r = check_step2_conditions(s, quotient_tower(s));
    CHECK(r.j_nondegenerate);
    CHECK(r.exists_isomorphism);
    CHECK(r.kernel_sum_condition);
    CHECK_FALSE(r.determinant_identically_zero);
  }
  {
    const StructureSpec s = load("quaternionic.sr");
    const Step2Report r = check_step2_conditions(s, quotient_tower(s), 9);
    CHECK(r.j_nondegenerate);
    CHECK(r.seed == 9);
    CHECK(r.samples > 64);
  }
  {
    // Free step-2 on three generators: odd rank, so det 𝒥(φ) ≡ 0.
    std::mt19937_64 rng(0);
    const StructureSpec s = subriem::testing::free_nilpotent_quotient(3, 2, 0, rng);
    const Step2Report r = check_step2_conditions(s, quotient_tower(s));
    CHECK(r.determinant_identically_zero);
    CHECK_FALSE(r.exists_isomorphism);
    // The kernels span H and any sum of 3x3 skew maps is singular.
    CHECK_FALSE(r.kernel_sum_condition);
  }
  {
    const StructureSpec s = load("example.sr");
    CHECK_THROWS_AS(check_step2_conditions(s, quotient_tower(s)), Error);
  }
  {
    const StructureSpec s = load("heisenberg.sr");
    const QuotientTower t = quotient_tower(s);
    const Step2Report a = check_step2_conditions(s, t, 5);
    const Step2Report b = check_step2_conditions(s, t, 5);
    CHECK(a.samples == b.samples);
  }
}
