#pragma once

// Classification of divergence-free harmonic unit fields with geodesic flow
// lines and Ric(zeta) = lambda zeta, with bracket emission for the non-Killing
// family and Milnor labelling of the algebras involved.

#include "hvf/field_analysis.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace hvf {

template <class T>
struct RicciAlignment {
  bool eigenvector = false;
  T lambda{0};  // <Ric zeta, zeta>
  T defect{0};  // max |Ric zeta - lambda zeta|
};

template <class T>
RicciAlignment<T> ricci_alignment(const Mat3<T>& ricci, const Vec3<T>& zeta,
                                  const Tolerance& tol = {}, double scale = 1.0) {
  RicciAlignment<T> r;
  Vec3<T> rz = matvec(ricci, zeta);
  r.lambda = dot(rz, zeta);
  r.defect = (rz - zeta * r.lambda).max_abs();
  r.eigenvector = is_zero(r.defect, tol, scale);
  return r;
}

enum class MilnorType { SU2, SL2R, E2, Sol, Nil, Abelian, NotLie };

inline std::string_view to_string(MilnorType m) {
  switch (m) {
    case MilnorType::SU2: return "SU2";
    case MilnorType::SL2R: return "SL2R";
    case MilnorType::E2: return "E2";
    case MilnorType::Sol: return "Sol";
    case MilnorType::Nil: return "Nil";
    case MilnorType::Abelian: return "Abelian";
    case MilnorType::NotLie: return "NotLie";
  }
  return "?";
}

struct SignCount {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

/// Signs of the eigenvalues of a symmetric 3x3 matrix, read off the characteristic
/// polynomial x^3 - e1 x^2 + e2 x - e3 by Descartes' rule (exact for real-rooted
/// polynomials). Coefficients within tolerance of zero count as zero.
template <class T>
SignCount symmetric_signs(const Mat3<T>& a, const Tolerance& tol = {}) {
  double s = std::max(1.0, to_double(a.max_abs()));
  T e1 = trace(a);
  T e2 = principal_minor_sum(a);
  T e3 = det(a);
  auto sgn = [&](const T& x, double scale) {
    if (is_zero(x, tol, scale)) return 0;
    return x > T(0) ? 1 : -1;
  };
  int s1 = sgn(e1, s), s2 = sgn(e2, s * s), s3 = sgn(e3, s * s * s);
  SignCount c;
  c.zero = s3 != 0 ? 0 : (s2 != 0 ? 1 : (s1 != 0 ? 2 : 3));
  // coefficients of x^3, x^2, x, 1 with the zero-root factor divided out
  std::vector<int> coeffs{1, -s1, s2, -s3};
  coeffs.resize(4 - c.zero);
  int changes = 0, last = 0;
  for (int v : coeffs) {
    if (v == 0) continue;
    if (last != 0 && v != last) ++changes;
    last = v;
  }
  c.positive = changes;
  c.negative = 3 - c.zero - c.positive;
  return c;
}

template <class T>
struct MilnorClassification {
  MilnorType type = MilnorType::NotLie;
  Mat3<T> L;  // [x, y] = L (x cross y)
  SignCount signs;
  SignCount killing_signs;
  bool killing_consistent = false;
  std::string note;
};

/// L(k, m) = 1/2 sum_ij eps_ijm c(i, j, k), so that [e_i, e_j] = L(e_i x e_j).
template <class T>
Mat3<T> bracket_matrix(const StructureConstants<T>& s) {
  Mat3<T> L;
  const std::size_t cyc[3][3] = {{1, 2, 0}, {2, 0, 1}, {0, 1, 2}};
  for (const auto& ijm : cyc) {
    std::size_t i = ijm[0], j = ijm[1], m = ijm[2];
    for (std::size_t k = 0; k < 3; ++k) L(k, m) = s.c(i, j, k);
  }
  return L;
}

template <class T>
MilnorClassification<T> milnor_type(const StructureConstants<T>& s, const Tolerance& tol = {}) {
  MilnorClassification<T> out;
  double scale = std::max(1.0, s.scale());
  if (!is_zero(s.antisymmetry_defect(), tol, scale)) {
    out.note = "brackets are not antisymmetric";
    return out;
  }
  if (!is_zero(jacobi_residual(s, tol), tol, scale * scale)) {
    out.note = "Jacobi identity fails";
    return out;
  }
  out.L = bracket_matrix(s);
  if (!is_zero((out.L - transpose(out.L)).max_abs(), tol, scale)) {
    out.note = "not unimodular";
    return out;
  }
  out.signs = symmetric_signs(out.L, tol);
  int p = out.signs.positive, n = out.signs.negative, z = out.signs.zero;
  if (z == 3)
    out.type = MilnorType::Abelian;
  else if (z == 2)
    out.type = MilnorType::Nil;
  else if (z == 1)
    out.type = (p == 2 || n == 2) ? MilnorType::E2 : MilnorType::Sol;
  else
    out.type = (p == 3 || n == 3) ? MilnorType::SU2 : MilnorType::SL2R;

  auto kf = killing_form(s, tol);
  out.killing_signs = symmetric_signs(kf.b, tol);
  const auto& ks = out.killing_signs;
  bool negative_definite = ks.negative == 3;
  bool indefinite_nondegenerate = ks.zero == 0 && ks.positive > 0 && ks.negative > 0;
  switch (out.type) {
    case MilnorType::SU2: out.killing_consistent = negative_definite; break;
    case MilnorType::SL2R: out.killing_consistent = indefinite_nondegenerate; break;
    default: out.killing_consistent = ks.zero > 0; break;
  }
  return out;
}

enum class FieldCase {
  Parallel,
  KillingSasakianRescale,
  NonKilling_b_zero,
  NonKilling_b_nonzero,
  HypothesisFailed
};

inline std::string_view to_string(FieldCase c) {
  switch (c) {
    case FieldCase::Parallel: return "Parallel";
    case FieldCase::KillingSasakianRescale: return "KillingSasakianRescale";
    case FieldCase::NonKilling_b_zero: return "NonKilling_b_zero";
    case FieldCase::NonKilling_b_nonzero: return "NonKilling_b_nonzero";
    case FieldCase::HypothesisFailed: return "HypothesisFailed";
  }
  return "?";
}

/// A named check inside a classification: value should be zero.
template <class T>
struct Check {
  std::string name;
  T value{0};
  std::string anchor;
};

template <class T>
struct ClassificationResult {
  FieldCase kind = FieldCase::HypothesisFailed;
  std::string reason;  // set for HypothesisFailed

  T lambda{0};
  T lambda1{0};
  T b{0};
  T b_squared{0};  // (|phi|^2 + lambda)/4
  T norm2_phi{0};
  T scal{0};
  T trace_phi{0};

  // S-eigenframe (unnormalized, |e1|^2 = |e2|^2 = frame_norm2) and its orientation:
  // e2 = orientation * zeta x e1
  Vec3<T> e1, e2;
  T frame_norm2{1};
  int orientation = +1;

  std::optional<std::array<T, 3>> emitted_brackets;  // (a123, a132, a231)
  std::optional<std::array<T, 3>> flat_normal_form;  // brackets for b = -lambda1/2
  Mat3<T> reconstructed_ricci;  // Ricci of the emitted algebra
  Mat3<T> predicted_ricci;      // diag(lambda, (Scal-lambda)/2 (1 +- lambda1/(2b)))
  MilnorType milnor_input = MilnorType::NotLie;
  MilnorType milnor_emitted = MilnorType::NotLie;

  std::vector<Check<T>> checks;  // all must vanish for the result to be verified
  double model_frame_residual = 0.0;  // input brackets in (zeta, (e1-e2)/r2, (e1+e2)/r2) vs emitted

  std::string theorem_family;
  bool compact_obstruction = false;
  std::vector<std::string> warnings;

  bool verified(const Tolerance& tol = {}, double scale = 1.0) const {
    for (const auto& c : checks)
      if (!is_zero(c.value, tol, scale)) return false;
    return kind != FieldCase::HypothesisFailed;
  }
  const Check<T>* find_check(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Dead band around lambda1 = 0 used by the float kernel.
inline constexpr double kLambda1DeadBand = 1e-8;

namespace detail {

template <class T>
std::array<T, 3> normal_form_brackets(const T& scal, const T& lambda, const T& lambda1, const T& b) {
  T q = (scal - lambda) / (4 * b);
  return {T(-q + lambda1 / 2 - b), T(q + lambda1 / 2 + b), T(-2 * b)};
}

/// Input brackets in the frame (zeta, (e1 - e2)/sqrt2, (e1 + e2)/sqrt2) compared
/// with the emitted constants. The frame vectors are kept unnormalized so the
/// comparison stays exact: an entry with m horizontal slots carries the factor
/// (2N)^(-m/2), and the emitted algebra is nonzero only where m = 2.
template <class T>
double model_frame_residual(const StructureConstants<T>& s, const Vec3<T>& zeta,
                            const Vec3<T>& e1, const Vec3<T>& e2, const T& n2,
                            const std::array<T, 3>& emitted) {
  const Vec3<T> X[3] = {zeta, e1 - e2, e1 + e2};
  const T two_n = 2 * n2;
  auto target = StructureConstants<T>::unimodular(emitted[0], emitted[1], emitted[2]);
  double worst = 0.0;
  for (std::size_t f = 0; f < 27; ++f) {
    auto [i, j, k] = Tensor<T, 3>::unflatten(f);
    T raw = dot(s.bracket(X[i], X[j]), X[k]);
    int m = (i != 0) + (j != 0) + (k != 0);
    double d;
    if (m % 2 == 0) {
      T val = raw;
      for (int r = 0; r < m / 2; ++r) val /= two_n;
      d = to_double(abs_of(T(val - target.c(i, j, k))));
    } else {
      d = raw == T(0) ? 0.0 : std::abs(to_double(raw)) / std::pow(to_double(two_n), m / 2.0);
    }
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace detail

/// Classifies the field; on the exact kernel this throws InexactOperation when
/// lambda1 is irrational and the non-Killing branch needs its value.
template <class T>
ClassificationResult<T> classify(const FieldContext<T>& ctx) {
  using K = kernel_traits<T>;
  ClassificationResult<T> r;
  const auto& model = *ctx.model;
  const auto& tol = ctx.tol;
  const double scale = ctx.scale;
  const double root_scale = std::sqrt(scale);
  const auto& z = ctx.zeta;
  const auto& g = model.connection;
  const auto& Ric = model.curv.ricci;

  r.norm2_phi = ctx.inv.norm2_phi;
  r.scal = model.curv.scal;
  r.trace_phi = ctx.inv.trace_phi;
  r.compact_obstruction = !is_zero(r.trace_phi, tol, root_scale);
  r.milnor_input = milnor_type(model.brackets, tol).type;

  auto align = ricci_alignment(Ric, z, tol, scale);
  r.lambda = align.lambda;
  auto fail = [&](std::string why) {
    r.kind = FieldCase::HypothesisFailed;
    r.reason = std::move(why);
    r.theorem_family = "not applicable";
    return r;
  };
  if (!align.eigenvector)
    return fail("NotEigenvector: Ric(zeta) is not parallel to zeta (defect " +
                format_scalar(align.defect) + ")");
  auto h = harmonic_residuals(ctx);
  if (!h.harmonic) return fail("not harmonic (residual " + format_scalar(h.unit_harmonic) + ")");
  if (!ctx.phi.totally_geodesic) return fail("integral curves are not geodesics");
  if (r.compact_obstruction)
    return fail("not divergence-free (trace phi = " + format_scalar(r.trace_phi) + ")");

  r.b_squared = (r.norm2_phi + r.lambda) / 4;
  if (r.b_squared < T(0) && !is_zero(r.b_squared, tol, scale))
    return fail("b^2 < 0: lambda < -|phi|^2");
  T lambda1_sq = r.norm2_phi - r.lambda;

  // horizontal block of S in the adapted frame: [[p, q], [q, -p]] since trace S_H = 2 trace phi = 0
  const auto& fr = ctx.J.frame;
  T p = 2 * ctx.phi.horizontal[0][0];
  T q = ctx.phi.horizontal[0][1] + ctx.phi.horizontal[1][0];

  bool lambda1_zero;
  if constexpr (K::exact) {
    lambda1_zero = (p == T(0) && q == T(0));
  } else {
    double l1 = std::sqrt(p * p + q * q);
    lambda1_zero = l1 <= kLambda1DeadBand * std::max(1.0, root_scale);
    if (l1 > 0.0 && l1 <= 1e3 * kLambda1DeadBand * std::max(1.0, root_scale))
      r.warnings.push_back("lambda1 = " + format_scalar(l1) + " is close to the dead band; dispatch may be unstable");
  }

  // b from the rotation part: b = <phi e2, e1> = trace(phi J)/2 for the chosen orientation
  T b_right = ctx.inv.trace_phiJ / 2;

  if (lambda1_zero) {
    r.lambda1 = T(0);
    r.checks.push_back({"lambda1_squared", lambda1_sq, "lambda1^2 = |phi|^2 - lambda"});
    auto kk = killing_and_kostant(ctx);
    r.checks.push_back({"killing_ricci", kk.killing_ricci_residual, "Killing and Ric(zeta) = lambda zeta imply lambda = |phi|^2"});
    r.checks.push_back({"kostant", kk.kostant_residual, "nabla^2_{X,Y} zeta = R(X, zeta) Y"});
    bool lambda_zero = is_zero(r.lambda, tol, scale);
    if (lambda_zero) {
      r.kind = FieldCase::Parallel;
      r.b = T(0);
      r.checks.push_back({"phi_vanishes", ctx.phi.matrix.max_abs(), "phi = 0"});
      r.theorem_family = "Killing family: Parallel (locally R x N)";
    } else if (r.lambda < T(0)) {
      return fail("Killing field with lambda < 0 gives b^2 = lambda/2 < 0");
    } else {
      r.kind = FieldCase::KillingSasakianRescale;
      r.orientation = b_right < T(0) ? -1 : +1;
      r.b = abs_of(b_right);
      r.checks.push_back({"b_squared", T(r.b * r.b - r.b_squared), "b^2 = (|phi|^2 + lambda)/4 = lambda/2"});
      r.theorem_family = "Killing family: Sasakian after the homothety g -> b^2 g";
    }
    r.e1 = fr.u;
    r.e2 = cross(z, fr.u) * T(r.orientation);
    r.frame_norm2 = fr.norm2;
    return r;
  }

  // eigenvector of [[p, q], [q, -p]] for +lambda1, then lifted to R^3
  T lambda1;
  if constexpr (K::exact) {
    lambda1 = K::sqrt(T(p * p + q * q));  // may throw InexactOperation
  } else {
    lambda1 = std::sqrt(p * p + q * q);
  }
  r.lambda1 = lambda1;
  // (p + lambda1, q) and (q, lambda1 - p) are both eigenvectors; pick the one that cannot vanish
  T w0, w1;
  if (p >= T(0)) {
    w0 = p + lambda1, w1 = q;
  } else {
    w0 = q, w1 = lambda1 - p;
  }
  const Vec3<T> v_right = cross(z, fr.u);
  Vec3<T> e1 = fr.u * w0 + v_right * w1;
  T n2 = dot(e1, e1);
  Vec3<T> e2_right = cross(z, e1);

  // b with the right-handed orientation; orientation is then chosen by the sign rule
  T b_raw = dot(matvec(ctx.phi.matrix, e2_right), e1) / n2;
  bool flat = is_zero(Ric.max_abs(), tol, scale);
  int orientation;
  if (flat) {
    // flat normal form: b = -lambda1/2
    orientation = b_raw > T(0) ? -1 : +1;
  } else {
    orientation = b_raw < T(0) ? -1 : +1;
  }
  r.orientation = orientation;
  r.b = b_raw * T(orientation);
  r.e1 = e1;
  r.e2 = e2_right * T(orientation);
  r.frame_norm2 = n2;
  if (flat) r.warnings.push_back("flat model: b reported in the normal form b = -lambda1/2");

  r.checks.push_back({"lambda1_squared", T(lambda1 * lambda1 - lambda1_sq), "lambda1^2 = |phi|^2 - lambda"});
  r.checks.push_back({"b_squared", T(r.b * r.b - r.b_squared), "b^2 = (|phi|^2 + lambda)/4"});
  r.checks.push_back({"b_relation", T(r.b * r.b - (r.lambda / 2 + lambda1 * lambda1 / 4)),
                      "b^2 = lambda/2 + lambda1^2/4"});
  r.checks.push_back({"det_phi", T(ctx.inv.det_h - r.lambda / 2), "det(phi|H) = lambda/2"});

  // phi in (e1, e2) must be [[lambda1/2, b], [-b, -lambda1/2]] (column j = phi(e_j))
  {
    const Vec3<T> E[2] = {r.e1, r.e2};
    const T expected[2][2] = {{lambda1 / 2, r.b}, {T(-r.b), T(-lambda1 / 2)}};
    T worst(0);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        T v = dot(matvec(ctx.phi.matrix, E[j]), E[i]) / n2;
        T d = abs_of(T(v - expected[i][j]));
        if (d > worst) worst = d;
      }
    r.checks.push_back({"matrix_phi", worst, "phi = [[lambda1/2, b], [-b, -lambda1/2]] in the S-eigenframe"});
  }

  T ric12 = dot(matvec(Ric, r.e1), r.e2) / n2;
  T conn = dot(g.covariant(z, r.e1), r.e2) / n2;  // <nabla_zeta e1, e2>
  r.checks.push_back({"ric12", T(ric12 - lambda1 * conn), "Ric(e1, e2) = lambda1 <nabla_zeta e1, e2>"});
  r.checks.push_back({"scalb", T(2 * r.b * conn + (r.scal - r.lambda) / 2),
                      "2b <nabla_zeta e1, e2> = -(Scal - lambda)/2"});
  {
    T r11 = dot(matvec(Ric, r.e1), r.e1) / n2;
    T r22 = dot(matvec(Ric, r.e2), r.e2) / n2;
    T half = (r.scal - r.lambda) / 2;
    T d = std::max(abs_of(T(r11 - half)), abs_of(T(r22 - half)));
    r.checks.push_back({"ricci_horizontal", d, "Ric(e1, e1) = Ric(e2, e2) = (Scal - lambda)/2"});
  }

  bool b_zero = is_zero(r.b, tol, root_scale);
  if (b_zero) {
    r.kind = FieldCase::NonKilling_b_zero;
    r.checks.push_back({"scal_equals_lambda", T(r.scal - r.lambda), "b = 0 implies Scal = lambda"});
    r.theorem_family = r.lambda >= T(0) ? "excluded by the global theorem (b = 0 forces lambda1 = 0 when lambda >= 0)"
                                        : "outside the global theorem (lambda < 0)";
    return r;
  }

  r.kind = FieldCase::NonKilling_b_nonzero;
  auto br = detail::normal_form_brackets(r.scal, r.lambda, lambda1, r.b);
  r.emitted_brackets = br;
  if (flat) r.flat_normal_form = br;

  auto emitted = StructureConstants<T>::unimodular(br[0], br[1], br[2]);
  auto em = FrameModel<T>::build(emitted, "emitted", tol);
  r.reconstructed_ricci = em.curv.ricci;
  T half = (r.scal - r.lambda) / 2;
  T ratio = lambda1 / (2 * r.b);
  r.predicted_ricci = diag3<T>(r.lambda, half * (1 + ratio), half * (1 - ratio));
  r.checks.push_back({"ricci_roundtrip", (r.reconstructed_ricci - r.predicted_ricci).max_abs(),
                      "Ricci of the emitted algebra = diag(lambda, (Scal-lambda)/2 (1 +- lambda1/(2b)))"});
  r.milnor_emitted = milnor_type(emitted, tol).type;
  r.model_frame_residual = detail::model_frame_residual(model.brackets, z, r.e1, r.e2, n2, br);
  r.theorem_family = r.lambda >= T(0) ? "unimodular bracket family" : "outside the global theorem (lambda < 0)";
  return r;
}

template <class T>
ClassificationResult<T> classify(const FrameModel<T>& model, const Vec3<T>& zeta,
                                 const Tolerance& tol = {}) {
  return classify(make_field_context(model, zeta, tol));
}

template <class T>
struct RescaleResult {
  FrameModel<T> model;
  Vec3<T> zeta;                 // same components; unit for the rescaled metric
  T sasakian_residual{0};
  T rotation_residual{0};       // phi~ on H vs the unit rotation, best orientation
};

/// Homothety g -> b^2 g re-expressed in the frame e_i / b: c~ = c / b.
template <class T>
RescaleResult<T> conformal_rescale(const FrameModel<T>& model, const Vec3<T>& zeta, const T& b,
                                   const Tolerance& tol = {}) {
  if (is_zero(b, tol)) throw std::invalid_argument("conformal_rescale needs b != 0");
  StructureConstants<T> s = model.brackets;
  s.c *= T(T(1) / b);
  RescaleResult<T> out;
  out.model = FrameModel<T>::build(s, model.name.empty() ? "rescaled" : model.name + " rescaled", tol);
  out.zeta = zeta;
  auto ctx = make_field_context(out.model, zeta, tol);
  out.sasakian_residual = sasakian_residual(ctx);
  const auto& hb = ctx.phi.horizontal;
  T plus = std::max({abs_of(hb[0][0]), abs_of(T(hb[0][1] + 1)), abs_of(T(hb[1][0] - 1)), abs_of(hb[1][1])});
  T minus = std::max({abs_of(hb[0][0]), abs_of(T(hb[0][1] - 1)), abs_of(T(hb[1][0] + 1)), abs_of(hb[1][1])});
  out.rotation_residual = std::min(plus, minus);
  return out;
}

}  // namespace hvf
