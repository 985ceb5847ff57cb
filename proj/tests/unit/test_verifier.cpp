#include "clab/verifier.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace clab;

namespace {

CylinderGeometry slab(int n) {
  CylinderGeometry g;
  g.nx_prime = n;
  g.nx_n = 2 * n - 1;
  g.nt = 5;
  g.extended = true;
  return g;
}

WeightPlan worked_plan(double lambda = 1.0, int n = 17) {
  CylinderGeometry g;
  g.nx_prime = g.nx_n = g.nt = n;
  PlanRequest r;
  r.D0 = {0.5, 1.0};
  r.delta0 = 0.7;
  r.lambda = lambda;
  return plan_parameters(build_d(g), g, r);
}

CylinderGeometry extended_of(const WeightPlan& p) {
  CylinderGeometry g = p.geometry;
  g.extended = true;
  g.nx_n = 2 * g.nx_n - 1;
  return g;
}

template <typename Fn>
ScalarField space_field(const CylinderGeometry& g, Fn&& fn) {
  return ScalarField::sample(g, FieldKind::SpaceOnly, [&](double x, double z, double) { return fn(x, z); });
}

double sinsin_residual(int n) {
  const double pi = std::numbers::pi;
  return lemma1_residual(space_field(slab(n), [&](double x, double z) {
           return std::sin(pi * x) * std::sin(pi * z);
         })).residual;
}

}  // namespace

TEST(Lemma1, AffineFieldHasZeroTerms) {
  const Lemma1Result r = lemma1_residual(space_field(slab(9), [](double x, double z) { return 2 * x - z + 1; }));
  EXPECT_TRUE(r.absolute);
  EXPECT_NEAR(r.hessian, 0.0, 1e-20);
  EXPECT_NEAR(r.laplacian, 0.0, 1e-20);
  EXPECT_NEAR(r.residual, 0.0, 1e-20);
}

TEST(Lemma1, HarmonicFieldUsesAbsoluteResidual) {
  for (int n : {9, 17}) {
    const Lemma1Result r = lemma1_residual(space_field(slab(n), [](double x, double z) { return x * x - z * z; }));
    EXPECT_TRUE(r.absolute);
    EXPECT_GT(r.hessian, 1.0);
    const double h = 1.0 / (n - 1);
    EXPECT_LT(r.residual, h * h);
  }
}

TEST(Lemma1, SmoothFieldConvergesAtSecondOrder) {
  const double ratio = sinsin_residual(33) / sinsin_residual(65);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(Lemma1, RejectsTimeDependentField) {
  const ScalarField u(slab(9), FieldKind::SpaceTime);
  EXPECT_ANY_THROW(lemma1_residual(u));
}

TEST(Corpus, DeterministicAndDistinct) {
  const CylinderGeometry g = slab(9);
  const auto a = make_corpus(g, 4, 5);
  const auto b = make_corpus(g, 4, 5);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].seed, 5 + i);
    EXPECT_EQ(a[i].eval(0.3, -0.2, 0.1), b[i].eval(0.3, -0.2, 0.1));
  }
  EXPECT_NE(a[0].eval(0.3, -0.2, 0.1), a[1].eval(0.3, -0.2, 0.1));
  for (const auto& m : make_corpus(g, 4, 5, false)) EXPECT_EQ(m.eval(0.3, 0.2, -1.0), m.eval(0.3, 0.2, 1.0));
}

TEST(Lemma1, StudyOnCorpus) {
  const CylinderGeometry g = slab(33);
  const Lemma1Study st = lemma1_study(g, make_corpus(g, 6, 1, false));
  ASSERT_EQ(st.rows.size(), 6u);
  EXPECT_EQ(st.geometry_hash, g.hash());
  for (const Lemma1Row& r : st.rows) {
    EXPECT_GT(r.residual, r.residual_refined);
    EXPECT_DOUBLE_EQ(r.ratio, r.residual / r.residual_refined);
  }
  EXPECT_GE(st.fraction_in_band, 0.0);
  EXPECT_LE(st.fraction_in_band, 1.0);
}

class CarlemanSides : public ::testing::Test {
 protected:
  WeightPlan plan = worked_plan(1.0, 9);
  CylinderGeometry ext = extended_of(plan);
  ScalarField p0 = ScalarField(ext, FieldKind::CrossSectionTime);
  ScalarField u = ScalarField::sample(ext, FieldKind::SpaceTime, [](double x, double z, double t) {
    return std::cos(x + 0.5 * z) * (1.0 + 0.3 * t) + z * z;
  });
};

TEST_F(CarlemanSides, ZeroFieldGivesZeroSides) {
  const ScalarField zero(ext, FieldKind::SpaceTime);
  for (double s : {2.0, 20.0}) {
    const InequalitySides c = carleman_sides(zero, plan, s, p0);
    EXPECT_EQ(c.lhs, 0.0);
    EXPECT_EQ(c.rhs, 0.0);
    const InequalitySides d = standard_estimate_sides(zero, plan, s, p0);
    EXPECT_EQ(d.lhs, 0.0);
    EXPECT_EQ(d.rhs, 0.0);
  }
}

TEST_F(CarlemanSides, BothSidesScaleQuadratically) {
  for (double c : {-3.0, 0.5, 1e3}) {
    for (double s : {2.0, 10.0, 50.0}) {
      const InequalitySides a = carleman_sides(u, plan, s, p0);
      const InequalitySides b = carleman_sides(c * u, plan, s, p0);
      EXPECT_NEAR(b.lhs, c * c * a.lhs, 1e-12 * c * c * a.lhs);
      EXPECT_NEAR(b.rhs, c * c * a.rhs, 1e-12 * c * c * a.rhs);
      for (std::size_t k = 0; k < a.rhs_terms.size(); ++k) {
        EXPECT_NEAR(b.rhs_terms[k], c * c * a.rhs_terms[k], 1e-12 * c * c * a.rhs_terms[k] + 1e-300);
      }
      const InequalitySides sa = standard_estimate_sides(u, plan, s, p0);
      const InequalitySides sb = standard_estimate_sides(c * u, plan, s, p0);
      EXPECT_NEAR(sb.lhs, c * c * sa.lhs, 1e-12 * c * c * sa.lhs);
      EXPECT_NEAR(sb.rhs, c * c * sa.rhs, 1e-12 * c * c * sa.rhs);
    }
  }
}

TEST_F(CarlemanSides, ShiftedFormNeverOverflows) {
  for (double s : {1.0, 50.0, 1e3, 1e5}) {
    const InequalitySides c = carleman_sides(u, plan, s, p0);
    EXPECT_TRUE(std::isfinite(c.lhs)) << s;
    EXPECT_TRUE(std::isfinite(c.rhs)) << s;
    EXPECT_TRUE(std::isfinite(c.lhs_log())) << s;
    EXPECT_TRUE(std::isfinite(c.rhs_log())) << s;
    EXPECT_GT(c.lhs, 0.0);
    EXPECT_NEAR(c.lhs_log(), std::log(c.lhs) + 2.0 * s * c.phi_max, 1e-12 * std::abs(c.lhs_log()));
  }
}

TEST_F(CarlemanSides, RhsIsSumOfTerms) {
  const InequalitySides c = carleman_sides(u, plan, 5.0, p0);
  double sum = 0.0;
  for (double t : c.rhs_terms) {
    EXPECT_GE(t, 0.0);
    sum += t;
  }
  EXPECT_NEAR(c.rhs, sum, 1e-14 * sum);
  const InequalitySides d = standard_estimate_sides(u, plan, 5.0, p0);
  EXPECT_EQ(d.rhs_terms[3], 0.0);
}

TEST_F(CarlemanSides, EvaluatorMatchesDirectCall) {
  const WeightedEvaluator ev(u, plan, p0);
  const InequalitySides a = ev.carleman(7.0);
  const InequalitySides b = carleman_sides(u, plan, 7.0, p0);
  EXPECT_EQ(a.lhs, b.lhs);
  EXPECT_EQ(a.rhs, b.rhs);
}

TEST(CarlemanCertificate, RatioSettlesBeyondSMin) {
  const WeightPlan plan = worked_plan();
  const CylinderGeometry ext = extended_of(plan);
  const auto corpus = make_corpus(ext, 20, 1);
  const std::vector<double> s_grid{2.0, 5.0, 10.0, 20.0, 50.0};
  const CarlemanReport rep =
      certify_carleman(ext, plan, corpus, s_grid, 1.0, [](double, double) { return 0.0; });
  ASSERT_EQ(rep.rows.size(), corpus.size() * s_grid.size());
  ASSERT_TRUE(std::isfinite(rep.C_emp));
  ASSERT_TRUE(std::isfinite(rep.s_min_emp));
  double cmax = 0.0;
  for (const CarlemanRow& r : rep.rows) {
    EXPECT_GE(r.ratio, 0.0);
    cmax = std::max(cmax, r.ratio);
  }
  EXPECT_EQ(cmax, rep.C_emp);

  // per member: ratio non-increasing on [s_min, 5 s_min], else still bounded by C_emp
  int settled = 0;
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    bool monotone = true;
    double last = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
      const CarlemanRow& r = rep.rows[m * s_grid.size() + k];
      if (r.s < rep.s_min_emp || r.s > 5.0 * rep.s_min_emp) continue;
      EXPECT_LE(r.ratio, rep.C_emp);
      monotone = monotone && r.ratio <= last;
      last = r.ratio;
    }
    settled += monotone ? 1 : 0;
  }
  EXPECT_GE(settled, static_cast<int>(std::ceil(0.8 * static_cast<double>(corpus.size()))));
}

TEST(SigmaGap, WorkedPlanRatios) {
  const SigmaGapReport r1 = sigma_gap_check(worked_plan(1.0));
  EXPECT_NEAR(r1.gap_ratio, std::exp(0.0098), 1e-4);
  EXPECT_TRUE(r1.strict);
  const SigmaGapReport r4 = sigma_gap_check(worked_plan(4.0));
  EXPECT_NEAR(r4.gap_ratio, std::exp(0.0392), 1e-3);
  EXPECT_GT(r4.gap_ratio, r1.gap_ratio);
  EXPECT_NEAR(r1.gap_ratio_2lambda, sigma_gap_check(worked_plan(2.0)).gap_ratio, 1e-12);
}
