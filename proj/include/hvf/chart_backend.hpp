#pragma once

// Coordinate charts: finite-difference Christoffel symbols and Ricci curvature,
// integral curves, and cross-validation against frame models.
//
// Coordinate tensors follow the usual index placement: christoffel(k, i, j) is
// Gamma^k_{ij}. A chart may declare an orthonormal frame as a matrix whose
// column a holds the coordinate components of e_a.

#include "hvf/field_analysis.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace hvf {

class InvalidChart : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Point3 = Vec3<double>;

struct ChartModel {
  std::string name;
  std::function<Mat3<double>(const Point3&)> metric;
  std::function<Mat3<double>(const Point3&)> frame;  // optional orthonormal frame
  std::array<bool, 3> periodic{false, false, false};
  std::array<double, 3> period{0.0, 0.0, 0.0};
  std::function<bool(const Point3&)> valid;  // optional validity region
  std::map<std::string, double> params;
  // compare structure functions and phi with a frame model (left-invariant frames only)
  bool compare_structure = true;

  Point3 wrap(Point3 x) const {
    for (std::size_t i = 0; i < 3; ++i)
      if (periodic[i] && period[i] > 0) x(i) -= period[i] * std::floor(x(i) / period[i]);
    return x;
  }
};

/// Throws InvalidChart unless g is symmetric positive definite.
inline void require_spd(const Mat3<double>& g, const Point3& x) {
  double s = std::max(1.0, g.max_abs());
  if ((g - transpose(g)).max_abs() > 1e-12 * s)
    throw InvalidChart("metric is not symmetric at the sample point");
  double m1 = g(0, 0);
  double m2 = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  double m3 = det(g);
  if (!(m1 > 0 && m2 > 0 && m3 > 0) || !std::isfinite(m3))
    throw InvalidChart("metric is not positive definite at (" + format_scalar(x(0)) + ", " +
                       format_scalar(x(1)) + ", " + format_scalar(x(2)) + ")");
}

namespace detail {

inline Point3 shifted(const Point3& x, std::size_t k, double d) {
  Point3 y = x;
  y(k) += d;
  return y;
}

}  // namespace detail

/// Gamma^k_{ij} = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij), central differences with step h.
inline Tensor<double, 3> christoffel_fd(const ChartModel& chart, const Point3& x, double h = 1e-3) {
  if (!(h > 0)) throw std::invalid_argument("finite-difference step must be positive");
  Mat3<double> g = chart.metric(x);
  require_spd(g, x);
  Mat3<double> ginv = inverse(g);
  Tensor<double, 3> dg;  // dg(l, i, j) = d_l g_ij
  for (std::size_t l = 0; l < 3; ++l) {
    Mat3<double> d = (chart.metric(detail::shifted(x, l, h)) - chart.metric(detail::shifted(x, l, -h))) *
                     (1.0 / (2 * h));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) dg(l, i, j) = d(i, j);
  }
  Tensor<double, 3> G;
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double v = 0.0;
        for (std::size_t l = 0; l < 3; ++l) v += ginv(k, l) * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
        G(k, i, j) = 0.5 * v;
      }
  return G;
}

struct RicciSample {
  Mat3<double> coordinate;
  std::optional<Mat3<double>> frame;  // Ric(e_a, e_b) when the chart declares a frame
};

/// R_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik with nested central differences.
inline RicciSample ricci_fd(const ChartModel& chart, const Point3& x, double h = 1e-3) {
  Tensor<double, 3> G = christoffel_fd(chart, x, h);
  Tensor<double, 4> dG;  // dG(m, k, i, j) = d_m G^k_ij
  for (std::size_t m = 0; m < 3; ++m) {
    auto d = (christoffel_fd(chart, detail::shifted(x, m, h), h) -
              christoffel_fd(chart, detail::shifted(x, m, -h), h)) *
             (1.0 / (2 * h));
    for (std::size_t f = 0; f < 27; ++f) {
      auto [k, i, j] = Tensor<double, 3>::unflatten(f);
      dG(m, k, i, j) = d(k, i, j);
    }
  }
  RicciSample out;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        v += dG(k, k, i, j) - dG(j, k, i, k);
        for (std::size_t l = 0; l < 3; ++l) v += G(k, k, l) * G(l, i, j) - G(k, j, l) * G(l, i, k);
      }
      out.coordinate(i, j) = v;
    }
  if (chart.frame) {
    Mat3<double> F = chart.frame(x);
    out.frame = matmul(transpose(F), matmul(out.coordinate, F));
  }
  return out;
}

/// nabla_X Y in coordinates, Y given as a vector field.
inline Vec3<double> covariant_fd(const ChartModel& chart, const Point3& x, const Vec3<double>& X,
                                 const std::function<Vec3<double>(const Point3&)>& Y, double h) {
  Tensor<double, 3> G = christoffel_fd(chart, x, h);
  Vec3<double> y = Y(x);
  Vec3<double> out;
  for (std::size_t nu = 0; nu < 3; ++nu) {
    if (X(nu) == 0.0) continue;
    Vec3<double> dY = (Y(detail::shifted(x, nu, h)) - Y(detail::shifted(x, nu, -h))) * (1.0 / (2 * h));
    out += dY * X(nu);
  }
  for (std::size_t mu = 0; mu < 3; ++mu)
    for (std::size_t nu = 0; nu < 3; ++nu)
      for (std::size_t la = 0; la < 3; ++la) out(mu) += G(mu, nu, la) * X(nu) * y(la);
  return out;
}

/// Structure functions <[e_i, e_j], e_k> of the declared frame.
inline Tensor<double, 3> structure_functions_fd(const ChartModel& chart, const Point3& x, double h = 1e-6) {
  if (!chart.frame) throw InvalidChart("chart '" + chart.name + "' declares no frame");
  Mat3<double> F = chart.frame(x);
  Mat3<double> g = chart.metric(x);
  std::array<Mat3<double>, 3> dF;  // dF[nu] = d_nu F
  for (std::size_t nu = 0; nu < 3; ++nu)
    dF[nu] = (chart.frame(detail::shifted(x, nu, h)) - chart.frame(detail::shifted(x, nu, -h))) * (1.0 / (2 * h));
  Tensor<double, 3> c;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      Vec3<double> br;  // [e_i, e_j]^mu = e_i^nu d_nu e_j^mu - e_j^nu d_nu e_i^mu
      for (std::size_t mu = 0; mu < 3; ++mu) {
        double v = 0.0;
        for (std::size_t nu = 0; nu < 3; ++nu) v += F(nu, i) * dF[nu](mu, j) - F(nu, j) * dF[nu](mu, i);
        br(mu) = v;
      }
      Vec3<double> gb = matvec(g, br);
      for (std::size_t k = 0; k < 3; ++k) {
        double v = 0.0;
        for (std::size_t mu = 0; mu < 3; ++mu) v += gb(mu) * F(mu, k);
        c(i, j, k) = v;
      }
    }
  return c;
}

/// phi(e_a, e_b) = -<nabla_{e_a} zeta, e_b> for zeta with constant frame components z.
inline Mat3<double> phi_fd(const ChartModel& chart, const Point3& x, const Vec3<double>& z, double h = 1e-5) {
  if (!chart.frame) throw InvalidChart("chart '" + chart.name + "' declares no frame");
  auto zeta = [&](const Point3& p) { return matvec(chart.frame(p), z); };
  Mat3<double> F = chart.frame(x);
  Mat3<double> g = chart.metric(x);
  Mat3<double> P;
  for (std::size_t a = 0; a < 3; ++a) {
    Vec3<double> ea = matvec(F, basis_vector<double>(a));
    Vec3<double> d = covariant_fd(chart, x, ea, zeta, h);
    Vec3<double> gd = matvec(g, d);
    for (std::size_t b = 0; b < 3; ++b) P(a, b) = -dot(gd, matvec(F, basis_vector<double>(b)));
  }
  return P;
}

struct CurveSample {
  double t = 0.0;
  Point3 x;
  double speed = 0.0;         // |V(x)|_g
  double geodesic_defect = 0.0;  // |nabla_V V|_g
};

struct IntegralCurve {
  std::vector<CurveSample> samples;
  double geodesic_residual = 0.0;  // max over samples
  double speed_drift = 0.0;        // max | |V|_g - 1 |
};

/// RK4 integral curve of `field` from x0 over [0, T]; the geodesic residual is
/// evaluated with central differences of step h along the way.
inline IntegralCurve integral_curve(const ChartModel& chart, const std::function<Vec3<double>(const Point3&)>& field,
                                    const Point3& x0, double T, double dt, double h = 1e-6) {
  if (!(dt > 0) || dt < 1e-14 * std::max(1.0, std::abs(T)))
    throw std::invalid_argument("integral_curve: step underflow");
  if (!(T >= 0)) throw std::invalid_argument("integral_curve: negative time span");
  IntegralCurve curve;
  auto sample = [&](double t, const Point3& x) {
    if (chart.valid && !chart.valid(x)) throw InvalidChart("integral curve left the chart's validity region");
    for (std::size_t i = 0; i < 3; ++i)
      if (!std::isfinite(x(i))) throw InvalidChart("integral curve diverged");
    CurveSample s;
    s.t = t;
    s.x = x;
    Vec3<double> v = field(x);
    Mat3<double> g = chart.metric(x);
    s.speed = std::sqrt(dot(v, matvec(g, v)));
    Vec3<double> acc = covariant_fd(chart, x, v, field, h);
    s.geodesic_defect = std::sqrt(std::max(0.0, dot(acc, matvec(g, acc))));
    curve.geodesic_residual = std::max(curve.geodesic_residual, s.geodesic_defect);
    curve.speed_drift = std::max(curve.speed_drift, std::abs(s.speed - 1.0));
    curve.samples.push_back(s);
  };
  auto steps = static_cast<long>(std::ceil(T / dt - 1e-9));
  Point3 x = x0;
  sample(0.0, chart.wrap(x));
  for (long n = 0; n < steps; ++n) {
    double step = std::min(dt, T - n * dt);
    Vec3<double> k1 = field(x);
    Vec3<double> k2 = field(x + k1 * (step / 2));
    Vec3<double> k3 = field(x + k2 * (step / 2));
    Vec3<double> k4 = field(x + k3 * step);
    x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6);
    x = chart.wrap(x);
    sample(std::min(T, (n + 1) * dt), x);
  }
  return curve;
}

struct CrossValidation {
  int points = 0;
  bool structure_compared = false;
  double max_structure_dev = 0.0;
  double max_ricci_dev = 0.0;
  double max_phi_dev = 0.0;
};

/// Compares the chart's frame against a frame model at each sample point; phi
/// is compared for the field with frame components z.
inline CrossValidation cross_validate(const ChartModel& chart, const FrameModel<double>& model,
                                      const std::vector<Point3>& points, const Vec3<double>& z,
                                      double h = 1e-3) {
  if (!chart.frame) throw InvalidChart("chart '" + chart.name + "' declares no frame");
  CrossValidation cv;
  cv.structure_compared = chart.compare_structure;
  ShapeOperator<double> phi;
  if (chart.compare_structure) phi = shape_operator(model.connection, z, Tolerance{1e-9, 1e-12});
  for (const auto& x : points) {
    ++cv.points;
    auto ric = ricci_fd(chart, x, h);
    cv.max_ricci_dev = std::max(cv.max_ricci_dev, (*ric.frame - model.curv.ricci).max_abs());
    if (chart.compare_structure) {
      cv.max_structure_dev =
          std::max(cv.max_structure_dev, (structure_functions_fd(chart, x) - model.brackets.c).max_abs());
      cv.max_phi_dev = std::max(cv.max_phi_dev, (phi_fd(chart, x, z) - phi.bilinear).max_abs());
    }
  }
  return cv;
}

/// 3 x 3 x 3 grid centred at c with the given spacing.
inline std::vector<Point3> grid_points(const Point3& c, double spacing) {
  std::vector<Point3> pts;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k) pts.push_back(c + vec3<double>(i * spacing, j * spacing, k * spacing));
  return pts;
}

// Built-in charts

/// Larger eigenvalue of an integer matrix in SL(2, Z) with |trace| > 2.
inline double anosov_beta(const std::array<std::array<long, 2>, 2>& A) {
  long d = A[0][0] * A[1][1] - A[0][1] * A[1][0];
  if (d != 1) throw std::invalid_argument("matrix is not in SL(2, Z)");
  double tr = static_cast<double>(A[0][0] + A[1][1]);
  if (std::abs(tr) <= 2) throw std::invalid_argument("matrix is not hyperbolic (|trace| <= 2)");
  double disc = std::sqrt(tr * tr - 4);
  double beta = (std::abs(tr) + disc) / 2;
  return beta;
}

/// (x, s, t) with g = beta^{-2t} dx^2 + beta^{2t} ds^2 + dt^2 and
/// e1 = beta^{-t} d_s, e2 = beta^t d_x, e3 = d_t.
inline ChartModel hyperbolic_torus_chart(double beta) {
  if (!(beta > 1)) throw std::invalid_argument("hyperbolic torus needs beta > 1");
  ChartModel c;
  c.name = "hyperbolic-torus";
  c.params["beta"] = beta;
  c.metric = [beta](const Point3& p) {
    double b = std::pow(beta, p(2));
    return diag3(1.0 / (b * b), b * b, 1.0);
  };
  c.frame = [beta](const Point3& p) {
    double b = std::pow(beta, p(2));
    Mat3<double> F;
    F(1, 0) = 1.0 / b;
    F(0, 1) = b;
    F(2, 2) = 1.0;
    return F;
  };
  c.periodic = {true, true, false};
  c.period = {1.0, 1.0, 0.0};
  return c;
}

/// Euclidean R^3 with the rotating frame d_x, sin(ax) d_y + cos(ax) d_z, cos(ax) d_y - sin(ax) d_z.
inline ChartModel flat_torus_chart(double a) {
  if (a == 0.0) throw std::invalid_argument("flat torus needs a != 0");
  ChartModel c;
  c.name = "flat-torus";
  c.params["a"] = a;
  c.metric = [](const Point3&) { return identity3<double>(); };
  c.frame = [a](const Point3& p) {
    double s = std::sin(a * p(0)), co = std::cos(a * p(0));
    Mat3<double> F;
    F(0, 0) = 1.0;
    F(1, 1) = s;
    F(2, 1) = co;
    F(1, 2) = co;
    F(2, 2) = -s;
    return F;
  };
  c.periodic = {true, true, true};
  const double L = 2 * std::numbers::pi;
  c.period = {L / std::abs(a), L, L};
  return c;
}

/// Stereographic chart of the unit 3-sphere: g = 4 / (1 + |x|^2)^2 Id, frame (1 + |x|^2)/2 d_i.
inline ChartModel round_sphere_chart() {
  ChartModel c;
  c.name = "round-sphere";
  c.metric = [](const Point3& p) {
    double f = 2.0 / (1.0 + dot(p, p));
    return identity3<double>() * (f * f);
  };
  c.frame = [](const Point3& p) { return identity3<double>() * ((1.0 + dot(p, p)) / 2.0); };
  c.compare_structure = false;
  return c;
}

}  // namespace hvf
