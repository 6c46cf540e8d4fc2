#include "support.hpp"

#include <gtest/gtest.h>

using namespace hvf;

namespace {

constexpr std::array<std::array<long, 2>, 2> kCat{{{2, 1}, {1, 1}}};

}  // namespace

TEST(ChartBackend, AnosovBeta) {
  EXPECT_NEAR(anosov_beta(kCat), (3.0 + std::sqrt(5.0)) / 2.0, 1e-15);
  EXPECT_THROW(anosov_beta({{{1, 1}, {0, 1}}}), std::invalid_argument);
  EXPECT_THROW(anosov_beta({{{2, 1}, {1, 2}}}), std::invalid_argument);
  EXPECT_THROW(hyperbolic_torus_chart(1.0), std::invalid_argument);
}

TEST(ChartBackend, ChristoffelHyperbolicTorus) {
  double beta = anosov_beta(kCat), lb = std::log(beta);
  auto chart = hyperbolic_torus_chart(beta);
  Point3 x = vec3(0.1, 0.2, 0.5);
  auto G = christoffel_fd(chart, x);
  // g_xx = beta^{-2t}: Gamma^t_xx = -1/2 d_t g_xx = ln(beta) beta^{-2t}
  EXPECT_NEAR(G(2, 0, 0), lb * std::pow(beta, -2 * x(2)), 1e-5);
  EXPECT_NEAR(G(2, 1, 1), -lb * std::pow(beta, 2 * x(2)), 1e-5);
  EXPECT_NEAR(G(0, 0, 2), -lb, 1e-5);
  EXPECT_NEAR(G(1, 1, 2), lb, 1e-5);
}

TEST(ChartBackend, RicciCrossValidation) {
  auto e = catalog_get("hyperbolic-torus");
  auto cv = cross_validate(*e.chart, e.float_model(), grid_points(vec3(0.3, 0.4, 0.2), 0.25),
                           basis_vector<double>(2), 1e-3);
  EXPECT_EQ(cv.points, 27);
  EXPECT_LE(cv.max_ricci_dev, 1e-5);
  EXPECT_LE(cv.max_structure_dev, 1e-8);
  EXPECT_LE(cv.max_phi_dev, 1e-8);
}

TEST(ChartBackend, SecondOrderConvergence) {
  auto e = catalog_get("hyperbolic-torus");
  auto m = e.float_model();
  Point3 x = vec3(0.3, 0.4, 0.2);
  double prev = 0.0;
  for (double h : {0.04, 0.02, 0.01}) {
    double dev = (*ricci_fd(*e.chart, x, h).frame - m.curv.ricci).max_abs();
    if (prev > 0) {
      double ratio = prev / dev;
      EXPECT_GE(ratio, 3.5);
      EXPECT_LE(ratio, 4.5);
    }
    prev = dev;
  }
}

TEST(ChartBackend, IntegralCurvesGeodesicResidual) {
  auto e = catalog_get("hyperbolic-torus");
  const auto& chart = *e.chart;
  double lb = std::log(anosov_beta(kCat));
  auto along = [&](std::size_t k) {
    return [&chart, k](const Point3& p) { return matvec(chart.frame(p), basis_vector<double>(k)); };
  };
  auto c3 = integral_curve(chart, along(2), vec3(0.1, 0.1, 0.0), 2.0, 0.01);
  EXPECT_LE(c3.geodesic_residual, 1e-6);
  EXPECT_LE(c3.speed_drift, 1e-9);
  auto c1 = integral_curve(chart, along(0), vec3(0.1, 0.1, 0.0), 2.0, 0.01);
  EXPECT_NEAR(c1.geodesic_residual, lb, 1e-6);
  EXPECT_THROW(integral_curve(chart, along(0), vec3(0.0, 0.0, 0.0), 1.0, 0.0), std::invalid_argument);
}

TEST(ChartBackend, FlatTorus) {
  auto e = catalog_get("flat-torus", {{"a", "2"}});
  auto cv = cross_validate(*e.chart, e.float_model(), grid_points(vec3(0.3, 0.2, 0.1), 0.25),
                           basis_vector<double>(2), 1e-3);
  EXPECT_LE(cv.max_ricci_dev, 1e-5);
  EXPECT_LE(cv.max_structure_dev, 1e-8);
}

TEST(ChartBackend, RoundSphere) {
  auto e = catalog_get("round-sphere");
  auto s = ricci_fd(*e.chart, vec3(0.3, -0.2, 0.1), 1e-3);
  EXPECT_LE((*s.frame - identity3<double>() * 2.0).max_abs(), 1e-5);
}

TEST(ChartBackend, RejectsBadMetric) {
  ChartModel c;
  c.name = "bad";
  c.metric = [](const Point3&) { return diag3(1.0, -1.0, 1.0); };
  EXPECT_THROW(christoffel_fd(c, vec3(0.0, 0.0, 0.0)), InvalidChart);
}
