#include "support.hpp"

#include <gtest/gtest.h>

using namespace hvf;

namespace {

FrameModel<Rational> exact_model(Rational a, Rational b, Rational c) {
  return FrameModel<Rational>::build(StructureConstants<Rational>::unimodular(a, b, c));
}

FrameModel<double> hyperbolic_torus() {
  return catalog_get("hyperbolic-torus").float_model();
}

}  // namespace

TEST(FieldAnalysis, RejectsNonUnitField) {
  auto m = exact_model(1, 2, 3);
  EXPECT_THROW(make_field_context(m, vec3<Rational>(1, 1, 0)), NonUnitField);
  EXPECT_THROW(normalized(vec3<Rational>(0, 0, 0)), NonUnitField);
  EXPECT_THROW(normalized(vec3<Rational>(1, 1, 1)), InexactOperation);
  EXPECT_EQ(normalized(vec3<Rational>(3, 4, 0)), vec3<Rational>(Rational(3, 5), Rational(4, 5), 0));
}

TEST(FieldAnalysis, AdaptedFrame) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    auto z = fixtures::random_unit(rng);
    for (int o : {+1, -1}) {
      auto f = adapted_frame(z, o);
      EXPECT_NEAR(dot(f.u, z), 0.0, 1e-14);
      EXPECT_NEAR(dot(f.v, z), 0.0, 1e-14);
      EXPECT_NEAR(dot(f.u, f.v), 0.0, 1e-14);
      EXPECT_NEAR(dot(f.v, f.v), f.norm2, 1e-14);
      EXPECT_LE((cross(z, f.u) * double(o) - f.v).max_abs(), 1e-15);
    }
  }
  auto f = adapted_frame(basis_vector<Rational>(2));
  EXPECT_EQ(f.u, basis_vector<Rational>(0));
  EXPECT_EQ(f.v, basis_vector<Rational>(1));
}

TEST(FieldAnalysis, UnimodularE3Invariants) {
  auto m = exact_model(1, 2, 3);
  auto ctx = make_field_context(m, basis_vector<Rational>(2));
  EXPECT_EQ(ctx.inv.trace_phi, Rational(0));
  EXPECT_EQ(ctx.inv.norm2_phi, Rational(13));
  ASSERT_TRUE(ctx.inv.lambda1.has_value());
  EXPECT_EQ(*ctx.inv.lambda1, Rational(5));
  EXPECT_EQ(ctx.inv.det_h, Rational(-6));
  EXPECT_EQ(ctx.inv.trace_phiJ, Rational(-1));
  EXPECT_EQ(rough_laplacian_field(m.connection, basis_vector<Rational>(2)), basis_vector<Rational>(2) * Rational(13));
  EXPECT_TRUE(ctx.phi.totally_geodesic);
  EXPECT_EQ(ctx.phi.divergence, Rational(0));
}

TEST(FieldAnalysis, HopfIsKillingSasakian) {
  auto m = exact_model(2, -2, 2);
  auto ctx = make_field_context(m, basis_vector<Rational>(2));
  auto h = harmonic_residuals(ctx);
  auto k = killing_and_kostant(ctx);
  EXPECT_EQ(h.unit_harmonic, Rational(0));
  EXPECT_EQ(h.harmonic_map, Rational(0));
  EXPECT_TRUE(k.killing);
  EXPECT_EQ(k.kostant_residual, Rational(0));
  EXPECT_TRUE(k.killing_ricci_applicable);
  EXPECT_EQ(k.killing_ricci_residual, Rational(0));
  EXPECT_EQ(ctx.inv.norm2_phi, Rational(2));
  EXPECT_EQ(sasakian_residual(ctx), Rational(0));
  auto c = contact_check(ctx);
  EXPECT_TRUE(c.is_contact);
  EXPECT_EQ(abs_of(c.trace_phiJ), Rational(2));
  for (const auto& e : identity_suite(ctx).entries) EXPECT_EQ(e.value, Rational(0)) << e.name;
}

TEST(FieldAnalysis, IdentitySuiteExactOnAxes) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 30; ++t) {
    auto m = FrameModel<Rational>::build(fixtures::random_unimodular(rng));
    for (std::size_t k = 0; k < 3; ++k) {
      auto ctx = make_field_context(m, basis_vector<Rational>(k));
      EXPECT_EQ(harmonic_residuals(ctx).unit_harmonic, Rational(0));
      EXPECT_EQ(contact_check(ctx).agreement, Rational(0));
      auto suite = identity_suite(ctx);
      int asserted = 0;
      for (const auto& e : suite.entries)
        if (e.asserted) {
          ++asserted;
          EXPECT_EQ(e.value, Rational(0)) << e.name;
        }
      EXPECT_GE(asserted, 8);
      for (const auto& e : suite.entries) EXPECT_FALSE(e.anchor.empty()) << e.name;
    }
  }
}

TEST(FieldAnalysis, UnconditionalIdentitiesOffAxis) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 60; ++t) {
    auto m = FrameModel<double>::build(fixtures::random_algebra(rng, t));
    auto z = fixtures::random_unit(rng);
    auto ctx = make_field_context(m, z);
    for (const auto& e : identity_suite(ctx).entries)
      if (e.condition == "always") EXPECT_LE(e.value, 1e-9) << e.name;
    EXPECT_LE(contact_check(ctx).agreement, 1e-9);
  }
}

TEST(FieldAnalysis, OffAxisFieldIsNotHarmonic) {
  auto m = FrameModel<double>::build(StructureConstants<double>::unimodular(1, 2, 3));
  auto z = normalized(vec3(1.0, 1.0, 1.0));
  auto ctx = make_field_context(m, z);
  auto h = harmonic_residuals(ctx);
  EXPECT_GT(h.unit_harmonic, 1.0);
  EXPECT_FALSE(h.harmonic);
  for (const auto& e : identity_suite(ctx).entries)
    if (e.condition.find("harmonic") != std::string::npos) EXPECT_FALSE(e.asserted) << e.name;
}

TEST(FieldAnalysis, ContactOrientationFlip) {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 20; ++t) {
    auto m = FrameModel<double>::build(fixtures::random_algebra(rng, t));
    auto z = fixtures::random_unit(rng);
    auto p = contact_check(m, z, Tolerance{}, +1);
    auto n = contact_check(m, z, Tolerance{}, -1);
    EXPECT_EQ(p.is_contact, n.is_contact);
    EXPECT_NEAR(p.trace_phiJ, -n.trace_phiJ, 1e-12);
  }
}

TEST(FieldAnalysis, HyperbolicTorusFields) {
  auto m = hyperbolic_torus();
  auto e3 = make_field_context(m, basis_vector<double>(2));
  auto h3 = harmonic_residuals(e3);
  EXPECT_LE(h3.unit_harmonic, 1e-12);
  EXPECT_TRUE(h3.totally_geodesic);
  EXPECT_FALSE(killing_and_kostant(e3).killing);
  auto e1 = make_field_context(m, basis_vector<double>(0));
  auto h1 = harmonic_residuals(e1);
  EXPECT_LE(h1.unit_harmonic, 1e-12);
  EXPECT_FALSE(h1.totally_geodesic);
  double lb = std::log(anosov_beta({{{2, 1}, {1, 1}}}));
  EXPECT_NEAR(e1.phi.geodesic_curvature.max_abs(), lb, 1e-12);
}

TEST(FieldAnalysis, FlagsFollowHypotheses) {
  auto m = exact_model(1, 2, 3);
  auto suite = identity_suite(m, basis_vector<Rational>(2));
  EXPECT_TRUE(suite.flags.harmonic);
  EXPECT_TRUE(suite.flags.totally_geodesic);
  EXPECT_TRUE(suite.flags.divergence_free);
  EXPECT_TRUE(suite.flags.ricci_eigen);
  EXPECT_FALSE(suite.flags.killing);
  const auto* e = suite.find("trace_phi2");
  ASSERT_NE(e, nullptr);
  EXPECT_TRUE(e->asserted);
}
