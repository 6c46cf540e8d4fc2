#include "support.hpp"

#include <gtest/gtest.h>

using namespace hvf;

namespace {

bool is_axis(const Vec3<double>& d, std::size_t k) { return std::abs(std::abs(d(k)) - 1.0) < 1e-8; }

}  // namespace

TEST(HarmonicFinder, ConfigValidation) {
  FinderConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_starts = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(HarmonicFinder, FibonacciSeedsAreUnit) {
  auto seeds = fibonacci_seeds(64);
  ASSERT_EQ(seeds.size(), 64u);
  for (const auto& s : seeds) EXPECT_NEAR(dot(s, s), 1.0, 1e-14);
}

TEST(HarmonicFinder, ObjectiveDualPath) {
  auto m = FrameModel<double>::build(StructureConstants<double>::unimodular(1, 2, 3));
  std::mt19937_64 rng(41);
  for (int t = 0; t < 10; ++t) {
    auto z = fixtures::random_unit(rng);
    double f = residual_objective(m, z);
    double g = residual_objective_dual(m, z);
    EXPECT_NEAR(f, g, 1e-5 * std::max(1.0, f));
  }
  EXPECT_NEAR(residual_objective(m, basis_vector<double>(2)), 0.0, 1e-20);
}

TEST(HarmonicFinder, RecoversAxesOfUnimodular) {
  auto m = FrameModel<double>::build(StructureConstants<double>::unimodular(1, 2, 3));
  auto r = find_all(m);
  ASSERT_EQ(r.directions.size(), 3u);
  std::array<bool, 3> seen{};
  for (const auto& d : r.directions) {
    EXPECT_LE(d.residual, 1e-8);
    EXPECT_TRUE(d.frame_axis);
    EXPECT_TRUE(d.flags.harmonic);
    for (std::size_t k = 0; k < 3; ++k) seen[k] = seen[k] || is_axis(d.direction, k);
  }
  EXPECT_TRUE(seen[0] && seen[1] && seen[2]);
  EXPECT_FALSE(r.all_directions);
}

TEST(HarmonicFinder, RandomModelsThreeClasses) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 10; ++t) {
    auto m = FrameModel<double>::build(fixtures::random_unimodular_real(rng));
    auto r = find_all(m);
    EXPECT_EQ(r.directions.size(), 3u);
    for (const auto& d : r.directions) {
      EXPECT_LE(d.residual, 1e-8);
      auto h = harmonic_residuals(m, d.direction, Tolerance{1e-8, 1e-12});
      EXPECT_TRUE(h.harmonic);
    }
  }
}

TEST(HarmonicFinder, HyperbolicTorusSeparatesGeodesic) {
  auto m = catalog_get("hyperbolic-torus").float_model();
  auto r = find_all(m);
  ASSERT_EQ(r.directions.size(), 1u);
  EXPECT_TRUE(is_axis(r.directions[0].direction, 2));
  EXPECT_TRUE(r.directions[0].flags.totally_geodesic);
  ASSERT_EQ(r.families.size(), 1u);
  EXPECT_EQ(r.families[0].dimension, 2);
  EXPECT_TRUE(r.continuous_family);
  bool e1 = false;
  for (const auto& d : r.families[0].axis_members)
    if (is_axis(d.direction, 0)) {
      e1 = true;
      EXPECT_TRUE(d.flags.harmonic);
      EXPECT_FALSE(d.flags.totally_geodesic);
    }
  EXPECT_TRUE(e1);
}

TEST(HarmonicFinder, EveryDirectionHarmonic) {
  for (auto s : {StructureConstants<double>::unimodular(0, 0, 0), StructureConstants<double>::unimodular(2, -2, 2)}) {
    auto r = find_all(FrameModel<double>::build(s));
    EXPECT_TRUE(r.all_directions);
  }
}

TEST(HarmonicFinder, WorkersDoNotChangeResult) {
  auto m = FrameModel<double>::build(StructureConstants<double>::unimodular(1.5, -0.5, 2.25));
  FinderConfig one, four;
  four.workers = 4;
  auto a = find_all(m, one), b = find_all(m, four);
  ASSERT_EQ(a.directions.size(), b.directions.size());
  for (std::size_t i = 0; i < a.directions.size(); ++i)
    EXPECT_EQ(a.directions[i].direction, b.directions[i].direction);
}

TEST(HarmonicFinder, ExactModelIsCast) {
  auto m = FrameModel<Rational>::build(StructureConstants<Rational>::unimodular(1, 2, 3));
  EXPECT_EQ(find_all(m).directions.size(), 3u);
}
