#include "support.hpp"

#include <gtest/gtest.h>

using namespace hvf;

TEST(Scalar, ParseRational) {
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(parse_rational("-1.25"), Rational(-5, 4));
  EXPECT_EQ(parse_rational("2e-1"), Rational(1, 5));
  EXPECT_EQ(parse_rational(" 7 "), Rational(7));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("010/08"), Rational(5, 4));
  EXPECT_EQ(parse_rational("1/-2"), Rational(-1, 2));
  EXPECT_THROW(parse_rational("1/x"), std::invalid_argument);
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational("abc"), std::invalid_argument);
}

TEST(Scalar, ExactSqrt) {
  EXPECT_EQ(kernel_traits<Rational>::sqrt(Rational(9, 4)), Rational(3, 2));
  EXPECT_THROW(kernel_traits<Rational>::sqrt(Rational(3)), InexactOperation);
}

TEST(Scalar, Formatting) {
  EXPECT_EQ(format_scalar(Rational(-3, 4)), "-3/4");
  EXPECT_EQ(format_scalar(0.1), "0.10000000000000001");
  EXPECT_EQ(format_scalar(-0.0), "0");
}

TEST(Tensor, Algebra) {
  auto a = vec3<Rational>(1, 2, 3), b = vec3<Rational>(-1, 0, 2);
  EXPECT_EQ(dot(a, b), Rational(5));
  auto c = cross(a, b);
  EXPECT_EQ(dot(c, a), Rational(0));
  EXPECT_EQ(dot(c, b), Rational(0));
  Mat3<Rational> m = diag3<Rational>(2, 3, 5);
  m(0, 1) = 1;
  EXPECT_EQ(det(m), Rational(30));
  EXPECT_EQ(matmul(m, inverse(m)), identity3<Rational>());
}

TEST(FrameGeometry, UnimodularConventions) {
  auto s = StructureConstants<Rational>::unimodular(1, 2, 3);
  // [e1,e2] = alpha e3, [e1,e3] = beta e2, [e2,e3] = gamma e1
  EXPECT_EQ(s.c(0, 1, 2), Rational(1));
  EXPECT_EQ(s.c(1, 0, 2), Rational(-1));
  EXPECT_EQ(s.c(0, 2, 1), Rational(2));
  EXPECT_EQ(s.c(1, 2, 0), Rational(3));
  EXPECT_EQ(s.antisymmetry_defect(), Rational(0));
  EXPECT_EQ(jacobi_residual(s), Rational(0));
}

TEST(FrameGeometry, ConnectionIsLeviCivita) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    auto s = fixtures::random_unimodular(rng);
    auto g = levi_civita(s);
    EXPECT_EQ(metric_compatibility_residual(g), Rational(0));
    EXPECT_EQ(torsion_residual(g, s), Rational(0));
  }
}

TEST(FrameGeometry, RicciClosedFormExact) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    auto [a, b, c] = fixtures::random_abc(rng);
    auto m = FrameModel<Rational>::build(StructureConstants<Rational>::unimodular(a, b, c));
    EXPECT_EQ((m.curv.ricci - detail::unimodular_ricci(a, b, c)).max_abs(), Rational(0));
    EXPECT_EQ(m.curv.scal, trace(m.curv.ricci));
  }
}

TEST(FrameGeometry, HopfRicciIsTwo) {
  auto m = FrameModel<Rational>::build(StructureConstants<Rational>::unimodular(2, -2, 2));
  EXPECT_EQ(m.curv.ricci, identity3<Rational>() * Rational(2));
  EXPECT_EQ(m.curv.scal, Rational(6));
}

TEST(FrameGeometry, CurvatureSymmetriesExact) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    auto m = FrameModel<Rational>::build(fixtures::random_unimodular(rng));
    EXPECT_EQ(riemann_symmetry_residual(m.curv.riemann), Rational(0));
    EXPECT_EQ(first_bianchi_residual(m.curv.riemann), Rational(0));
    auto dR = covariant_derivative(m.curv.riemann, m.connection);
    EXPECT_EQ(second_bianchi_residual(dR), Rational(0));
    auto dRic = covariant_derivative(m.curv.ricci, m.connection);
    EXPECT_EQ(contracted_bianchi_residual(dR, dRic, basis_vector<Rational>(2)), Rational(0));
  }
}

TEST(FrameGeometry, CurvatureSymmetriesFloatRotated) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 40; ++t) {
    auto m = FrameModel<double>::build(fixtures::random_algebra(rng, t));
    EXPECT_LE(riemann_symmetry_residual(m.curv.riemann), 1e-12);
    EXPECT_LE(first_bianchi_residual(m.curv.riemann), 1e-12);
    EXPECT_LE(second_bianchi_residual(covariant_derivative(m.curv.riemann, m.connection)), 1e-11);
  }
}

TEST(FrameGeometry, RotationCovariance) {
  std::mt19937_64 rng(15);
  auto s = StructureConstants<double>::unimodular(1.0, 2.0, 3.0);
  auto Q = fixtures::random_rotation(rng);
  auto m0 = FrameModel<double>::build(s);
  auto m1 = FrameModel<double>::build(s.rotated(Q));
  auto expect = matmul(transpose(Q), matmul(m0.curv.ricci, Q));
  EXPECT_LE((m1.curv.ricci - expect).max_abs(), 1e-12);
  EXPECT_NEAR(m1.curv.scal, m0.curv.scal, 1e-12);
}

TEST(FrameGeometry, KillingFormSu2) {
  auto k = killing_form(StructureConstants<Rational>::unimodular(1, -1, 1));
  EXPECT_EQ(k.b, identity3<Rational>() * Rational(-2));
}

TEST(FrameGeometry, RejectsInvalidBrackets) {
  StructureConstants<Rational> s;
  s.c(0, 1, 2) = 1;  // missing c(1,0,2) = -1
  EXPECT_THROW(FrameModel<Rational>::build(s), InvalidModel);
  StructureConstants<Rational> j;  // [e1,e2] = e3, [e1,e3] = e3, [e2,e3] = e1 violates Jacobi
  j.set_bracket(0, 1, 2, 1);
  j.set_bracket(0, 2, 2, 1);
  j.set_bracket(1, 2, 0, 1);
  EXPECT_NE(jacobi_residual(j), Rational(0));
  EXPECT_THROW(killing_form(j), InvalidModel);
}

TEST(FrameGeometry, HyperbolicSpaceRicci) {
  StructureConstants<Rational> s;
  s.set_bracket(0, 2, 0, 1);
  s.set_bracket(1, 2, 1, 1);
  auto m = FrameModel<Rational>::build(s);
  EXPECT_EQ(m.curv.ricci, identity3<Rational>() * Rational(-2));
}
