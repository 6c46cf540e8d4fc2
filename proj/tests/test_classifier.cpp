#include "support.hpp"

#include <gtest/gtest.h>

using namespace hvf;

namespace {

FrameModel<Rational> exact_model(Rational a, Rational b, Rational c) {
  return FrameModel<Rational>::build(StructureConstants<Rational>::unimodular(a, b, c));
}

MilnorType milnor_of(Rational a, Rational b, Rational c) {
  return milnor_type(StructureConstants<Rational>::unimodular(a, b, c)).type;
}

}  // namespace

TEST(Classifier, MilnorLabels) {
  EXPECT_EQ(milnor_of(1, -1, 1), MilnorType::SU2);
  EXPECT_EQ(milnor_of(2, -2, 2), MilnorType::SU2);
  EXPECT_EQ(milnor_of(1, 2, 3), MilnorType::SL2R);
  EXPECT_EQ(milnor_of(1, -1, 0), MilnorType::E2);
  EXPECT_EQ(milnor_of(1, 1, 0), MilnorType::Sol);
  EXPECT_EQ(milnor_of(1, 0, 0), MilnorType::Nil);
  EXPECT_EQ(milnor_of(0, 0, 0), MilnorType::Abelian);
  auto m = milnor_type(StructureConstants<Rational>::unimodular(1, 2, 3));
  EXPECT_TRUE(m.killing_consistent);
}

TEST(Classifier, MilnorRejectsNonUnimodular) {
  StructureConstants<Rational> s;
  s.set_bracket(0, 2, 0, 1);
  s.set_bracket(1, 2, 1, 1);
  auto m = milnor_type(s);
  EXPECT_EQ(m.type, MilnorType::NotLie);
  EXPECT_EQ(m.note, "not unimodular");
}

TEST(Classifier, MilnorKillingConsistencyRandom) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    auto m = milnor_type(fixtures::random_unimodular(rng));
    EXPECT_NE(m.type, MilnorType::NotLie);
    EXPECT_TRUE(m.killing_consistent) << to_string(m.type);
  }
}

TEST(Classifier, RoundTrip123) {
  auto m = exact_model(1, 2, 3);
  auto r = classify(m, basis_vector<Rational>(2));
  EXPECT_EQ(r.kind, FieldCase::NonKilling_b_nonzero);
  EXPECT_EQ(r.lambda, Rational(-12));
  EXPECT_EQ(r.lambda1, Rational(5));
  EXPECT_EQ(r.b, Rational(1, 2));
  ASSERT_TRUE(r.emitted_brackets.has_value());
  EXPECT_EQ(*r.emitted_brackets, (std::array<Rational, 3>{2, 3, -1}));
  EXPECT_EQ(r.reconstructed_ricci, diag3<Rational>(-12, 0, 0));
  EXPECT_EQ(r.predicted_ricci, r.reconstructed_ricci);
  EXPECT_EQ(r.milnor_input, MilnorType::SL2R);
  EXPECT_EQ(r.milnor_emitted, MilnorType::SL2R);
  EXPECT_EQ(r.model_frame_residual, 0.0);
  EXPECT_TRUE(r.verified());
  for (const auto& c : r.checks) EXPECT_EQ(c.value, Rational(0)) << c.name;
}

TEST(Classifier, EmittedModelReproducesInvariants) {
  auto r = classify(exact_model(1, 2, 3), basis_vector<Rational>(2));
  const auto& e = *r.emitted_brackets;
  auto m2 = exact_model(e[0], e[1], e[2]);
  auto r2 = classify(m2, basis_vector<Rational>(0));
  EXPECT_EQ(r2.lambda, r.lambda);
  EXPECT_EQ(r2.lambda1, r.lambda1);
  EXPECT_EQ(abs_of(r2.b), abs_of(r.b));
}

TEST(Classifier, HopfKillingBranch) {
  auto r = classify(exact_model(2, -2, 2), basis_vector<Rational>(2));
  EXPECT_EQ(r.kind, FieldCase::KillingSasakianRescale);
  EXPECT_EQ(r.lambda, Rational(2));
  EXPECT_EQ(r.b, Rational(1));
  EXPECT_TRUE(r.verified());
}

TEST(Classifier, RescaleToSasakian) {
  auto m = exact_model(6, -6, 6);
  auto r = classify(m, basis_vector<Rational>(2));
  ASSERT_EQ(r.kind, FieldCase::KillingSasakianRescale);
  EXPECT_EQ(r.b, Rational(3));
  auto s = conformal_rescale(m, basis_vector<Rational>(2), r.b);
  EXPECT_EQ(s.model.brackets.c, StructureConstants<Rational>::unimodular(2, -2, 2).c);
  EXPECT_EQ(s.sasakian_residual, Rational(0));
  EXPECT_EQ(s.rotation_residual, Rational(0));
  EXPECT_THROW(conformal_rescale(m, basis_vector<Rational>(2), Rational(0)), std::invalid_argument);
}

TEST(Classifier, FlatNormalForm) {
  for (int a : {1, 3, -2}) {
    auto r = classify(exact_model(a, -a, 0), basis_vector<Rational>(2));
    ASSERT_NE(r.kind, FieldCase::HypothesisFailed) << r.reason;
    EXPECT_EQ(r.scal, Rational(0));
    EXPECT_EQ(r.b, -r.lambda1 / 2);
    ASSERT_TRUE(r.flat_normal_form.has_value());
    auto flat = FrameModel<Rational>::build(StructureConstants<Rational>::unimodular(
        (*r.flat_normal_form)[0], (*r.flat_normal_form)[1], (*r.flat_normal_form)[2]));
    EXPECT_EQ(flat.curv.ricci.max_abs(), Rational(0));
    EXPECT_TRUE(r.verified());
  }
}

TEST(Classifier, ParallelField) {
  auto r = classify(exact_model(0, 0, 0), basis_vector<Rational>(0));
  EXPECT_EQ(r.kind, FieldCase::Parallel);
  EXPECT_TRUE(r.verified());
}

TEST(Classifier, HyperbolicTorus) {
  auto m = catalog_get("hyperbolic-torus").float_model();
  Tolerance tol{1e-10, 1e-12};
  auto r = classify(m, basis_vector<double>(2), tol);
  EXPECT_EQ(r.kind, FieldCase::NonKilling_b_zero);
  EXPECT_NEAR(r.scal, r.lambda, 1e-12);
  EXPECT_EQ(r.milnor_input, MilnorType::Sol);
  EXPECT_TRUE(r.verified(tol));
  auto r1 = classify(m, basis_vector<double>(0), tol);
  EXPECT_EQ(r1.kind, FieldCase::HypothesisFailed);
}

TEST(Classifier, HyperbolicSpaceObstruction) {
  auto r = classify(*catalog_get("hyperbolic-space").exact_model(), basis_vector<Rational>(2));
  EXPECT_EQ(r.kind, FieldCase::HypothesisFailed);
  EXPECT_TRUE(r.compact_obstruction);
  EXPECT_EQ(r.trace_phi, Rational(-2));
  EXPECT_EQ(r.milnor_input, MilnorType::NotLie);
}

TEST(Classifier, NonEigenFieldFailsHypothesis) {
  auto m = FrameModel<double>::build(StructureConstants<double>::unimodular(1, 2, 3));
  auto r = classify(m, normalized(vec3(1.0, 1.0, 1.0)));
  EXPECT_EQ(r.kind, FieldCase::HypothesisFailed);
  EXPECT_FALSE(r.reason.empty());
}

TEST(Classifier, RandomAxesVerify) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 40; ++t) {
    auto m = FrameModel<Rational>::build(fixtures::random_unimodular(rng));
    for (std::size_t k = 0; k < 3; ++k) {
      auto r = classify(m, basis_vector<Rational>(k));
      ASSERT_NE(r.kind, FieldCase::HypothesisFailed) << r.reason;
      EXPECT_TRUE(r.verified());
      for (const auto& c : r.checks) EXPECT_EQ(c.value, Rational(0)) << c.name;
      if (r.emitted_brackets) {
        EXPECT_EQ(r.reconstructed_ricci, r.predicted_ricci);
        EXPECT_EQ(r.model_frame_residual, 0.0);
      }
    }
  }
}
