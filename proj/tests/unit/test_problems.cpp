#include "clab/config.hpp"
#include "clab/problems.hpp"
#include "clab/reconstruction.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace clab;

namespace {

CylinderGeometry cube(int n = 17) {
  CylinderGeometry g;
  g.nx_prime = g.nx_n = g.nt = n;
  return g;
}

// tests/oracles/data_functional_oracle.py
constexpr double kDataFunctional9 = 4.8801443917873177;
constexpr double kDataFunctional17 = 4.8332274619635811;

struct RPoint {
  int i, j, k;
  double worked, quartic;
};

// tests/oracles/instance_oracle.py at 17^3 nodes (0.25, 0.5, -0.5), (1, 0, 0.75), (0.5, 1, 1)
constexpr RPoint kRPoints[] = {
    {4, 8, 4, -3.1949330382398253292, -7.9873325955995637671},
    {16, 0, 14, -0.51044147532190897731, -0.51044147532190897731},
    {8, 16, 16, -0.64568916490006611486, -4.5198241543004629150},
};

double trace_identity_error(int n) {
  const ProblemInstance p = make_instance(cube(n), named_recipe("quartic"));
  const ScalarField f = oracle_trace_reconstruct(p.u, p.R);
  return discrete_norm(f - p.f, Region::all(), NormKind::L2);
}

}  // namespace

TEST(Recipes, QuadraticHasConstantR) {
  const ProblemInstance p = make_instance(cube(9), named_recipe("quadratic"));
  for (double r : p.R.values()) EXPECT_NEAR(r, -2.0, 1e-14);
  EXPECT_NEAR(p.u(3, 4, 2), 0.25, 1e-15);
  const ScalarField f = oracle_trace_reconstruct(p.u, p.R);
  for (double v : f.values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Recipes, WorkedAndQuarticMatchSymbolicR) {
  const ProblemInstance w = make_instance(cube(), named_recipe("worked"));
  const ProblemInstance q = make_instance(cube(), named_recipe("quartic"));
  for (const RPoint& pt : kRPoints) {
    EXPECT_NEAR(w.R(pt.i, pt.j, pt.k), pt.worked, 1e-13 * std::abs(pt.worked));
    EXPECT_NEAR(q.R(pt.i, pt.j, pt.k), pt.quartic, 1e-13 * std::abs(pt.quartic));
  }
}

TEST(Recipes, DegenerateAxialProfileRejected) {
  Recipe r = named_recipe("worked");
  r.a.coeffs = {0.0, 0.0, 0.0, 1.0};
  EXPECT_THROW(make_instance(cube(9), r), ProblemError);
  r.a.coeffs = {0.0, 1.0, 1.0};
  EXPECT_THROW(make_instance(cube(9), r), ProblemError);
  r.a.coeffs = {0.0, 0.0, 1.0};
  r.f_target = SeparableProfile{0.0, 1.0, 0.0, 3.0, 0.0};  // cos(3x') changes sign on (0, 1)
  EXPECT_THROW(make_instance(cube(9), r), ProblemError);
  r = named_recipe("worked");
  r.b = SeparableProfile{0.0};
  EXPECT_THROW(make_instance(cube(9), r), ProblemError);
}

TEST(Recipes, InstanceInvariantsHold) {
  for (const char* name : {"quadratic", "worked", "quartic"}) {
    const ProblemInstance p = make_instance(cube(), named_recipe(name));
    const InstanceChecks c = check_instance(p);
    EXPECT_TRUE(c.ok()) << name << ": residual " << c.residual << " bound " << c.residual_bound;
    EXPECT_EQ(c.trace_u, 0.0);
    EXPECT_EQ(c.trace_y, 0.0);
    EXPECT_GT(c.min_abs_R_face, 0.0);
  }
}

TEST(Recipes, TraceIdentityConvergesAtSecondOrder) {
  const double ratio = trace_identity_error(17) / trace_identity_error(33);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(DataFunctional, MatchesQuadratureOracle) {
  const ProblemInstance p9 = make_instance(cube(9), named_recipe("worked"));
  const ProblemInstance p17 = make_instance(cube(17), named_recipe("worked"));
  EXPECT_NEAR(p9.D_of_u, kDataFunctional9, 1e-10 * kDataFunctional9);
  EXPECT_NEAR(p17.D_of_u, kDataFunctional17, 1e-10 * kDataFunctional17);
}

TEST(DataFunctional, ZeroAndHomogeneous) {
  const ProblemInstance p = make_instance(cube(9), named_recipe("worked"));
  const ScalarField zero(p.y.geometry(), FieldKind::SpaceTime);
  EXPECT_EQ(compute_data_functional(make_bundle(zero)), 0.0);
  EXPECT_EQ(compute_apriori_bound(zero), 0.0);
  EXPECT_NEAR(compute_data_functional(make_bundle(2.0 * p.y)), 2.0 * p.D_of_u, 1e-13 * p.D_of_u);
  EXPECT_NEAR(compute_apriori_bound(-2.0 * p.y), 2.0 * p.M, 1e-13 * p.M);
}

TEST(DataFunctional, BoundedByAprioriBound) {
  // every term of the data functional reappears in M with the same discretization
  for (const char* name : {"quadratic", "worked", "quartic"}) {
    for (int n : {9, 17}) {
      const ProblemInstance p = make_instance(cube(n), named_recipe(name));
      EXPECT_GT(p.D_of_u, 0.0);
      EXPECT_LE(p.D_of_u, p.M) << name << " n=" << n;
    }
  }
}

TEST(Noise, LevelZeroIsBitIdentical) {
  const ProblemInstance p = make_instance(cube(9), named_recipe("worked"));
  const ProblemInstance q = add_noise(p, 0.0, 11);
  auto a = p.data.fields();
  auto b = q.data.fields();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto va = a[i].second->values();
    const auto vb = b[i].second->values();
    ASSERT_TRUE(std::equal(va.begin(), va.end(), vb.begin(), vb.end())) << a[i].first;
  }
  EXPECT_EQ(q.D_of_u, p.D_of_u);
}

TEST(Noise, SeedDeterminesOutput) {
  const ProblemInstance p = make_instance(cube(9), named_recipe("worked"));
  const ProblemInstance a = add_noise(p, 0.05, 3);
  const ProblemInstance b = add_noise(p, 0.05, 3);
  const ProblemInstance c = add_noise(p, 0.05, 4);
  EXPECT_EQ((a.data.y_nn - b.data.y_nn).max_abs(), 0.0);
  EXPECT_GT((a.data.y_nn - c.data.y_nn).max_abs(), 0.0);
  EXPECT_EQ(a.D_of_u, b.D_of_u);
  EXPECT_EQ(a.data.seed, 3u);
  EXPECT_EQ(a.data.noise_level, 0.05);
  EXPECT_EQ((a.u - p.u).max_abs(), 0.0);
  EXPECT_THROW(add_noise(p, -1.0, 1), ProblemError);
}

TEST(Noise, SmallLevelKeepsDataFunctionalScale) {
  const ProblemInstance p = make_instance(cube(), named_recipe("worked"));
  const double ratio = add_noise(p, 1e-2, 7).D_of_u / p.D_of_u;
  EXPECT_GE(ratio, 0.5);
  EXPECT_LE(ratio, 2.0);
}

TEST(CoefficientReduction, EqualCoefficientsGiveZeroInstance) {
  const CylinderGeometry g = cube(9);
  const ScalarField v = ScalarField::sample(g, FieldKind::SpaceTime,
                                            [](double x, double z, double t) { return 2.0 + z * z + x * t; });
  const ScalarField p = ScalarField::sample(g, FieldKind::CrossSectionTime,
                                            [](double x, double, double t) { return x - t; });
  const ProblemInstance r = coefficient_reduction(v, v, p, p, 0.1);
  EXPECT_EQ(r.u.max_abs(), 0.0);
  EXPECT_EQ(r.f.max_abs(), 0.0);
  EXPECT_EQ(r.D_of_u, 0.0);
}

TEST(CoefficientReduction, ManufacturedPairRecoversDifference) {
  // v(q) = 1 + x_n^2 and v(p) = v(q) - x_n^2 sin(x') / 2, so -d_n^2 u(x',0,t) / v(q)(x',0,t) = sin x'
  const CylinderGeometry g = cube(17);
  const ScalarField vq = ScalarField::sample(g, FieldKind::SpaceTime,
                                             [](double, double z, double) { return 1.0 + z * z; });
  const ScalarField vp = ScalarField::sample(g, FieldKind::SpaceTime, [](double x, double z, double) {
    return 1.0 + z * z - 0.5 * z * z * std::sin(x);
  });
  const ScalarField q(g, FieldKind::CrossSectionTime);
  const ScalarField p = ScalarField::sample(g, FieldKind::CrossSectionTime,
                                            [](double x, double, double) { return std::sin(x); });
  const ProblemInstance r = coefficient_reduction(vp, vq, p, q);
  const ScalarField f = oracle_trace_reconstruct(r.u, r.R);
  EXPECT_LT((f - r.f).max_abs(), 1e-12);
  EXPECT_EQ((r.p0 - p).max_abs(), 0.0);
}

TEST(CoefficientReduction, RejectsVanishingFaceValue) {
  const CylinderGeometry g = cube(9);
  const ScalarField v = ScalarField::sample(g, FieldKind::SpaceTime,
                                            [](double x, double z, double) { return x - 0.5 + z * z; });
  const ScalarField p(g, FieldKind::CrossSectionTime);
  try {
    coefficient_reduction(v, v, p, p);
    FAIL() << "expected ProblemError";
  } catch (const ProblemError& e) {
    EXPECT_NE(std::string(e.what()).find("min |v(q)|"), std::string::npos);
  }
}

TEST(CoefficientReduction, RejectsCauchyMismatch) {
  const CylinderGeometry g = cube(9);
  const ScalarField vq = ScalarField::sample(g, FieldKind::SpaceTime,
                                             [](double, double z, double) { return 1.0 + z * z; });
  const ScalarField vp = ScalarField::sample(g, FieldKind::SpaceTime,
                                             [](double, double z, double) { return 1.0 + z + z * z; });
  const ScalarField p(g, FieldKind::CrossSectionTime);
  EXPECT_THROW(coefficient_reduction(vp, vq, p, p), ProblemError);
}
