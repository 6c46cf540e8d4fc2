#pragma once

// Unit vector fields with constant frame components on a frame model.
//
// Throughout, phi(X) = -nabla_X zeta. It is stored two ways:
//   bilinear(x, y) = <phi(e_x), e_y>     (a (0,2) tensor, used for calculus)
//   matrix(i, j)   = <phi(e_j), e_i>     (column j is phi(e_j), used for algebra)
// J is the rotation by +90 degrees in the horizontal plane, J(X) = zeta x X for
// the right-handed orientation, extended by J(zeta) = 0.

#include "hvf/frame_geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hvf {

class NonUnitField : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class T>
struct UnitField {
  Vec3<T> zeta;
};

/// Checks |zeta| = 1 (exactly, or to tolerance on the float kernel).
template <class T>
UnitField<T> make_unit_field(const Vec3<T>& zeta, const Tolerance& tol = {}) {
  T n2 = dot(zeta, zeta);
  if (!is_zero(T(n2 - T(1)), tol)) throw NonUnitField("field is not unit length");
  return UnitField<T>{zeta};
}

/// Scales v to unit length. On the exact kernel this throws InexactOperation
/// when |v| is irrational.
template <class T>
Vec3<T> normalized(const Vec3<T>& v) {
  T n2 = dot(v, v);
  if (n2 == T(0)) throw NonUnitField("cannot normalize the zero vector");
  T n = kernel_traits<T>::sqrt(n2);
  return v * T(T(1) / n);
}

/// Horizontal pair for zeta, kept unnormalized so the exact kernel never needs a
/// square root: h1 = u/|u|, h2 = v/|u| with v = orientation * (zeta x u), |v| = |u|.
template <class T>
struct AdaptedFrame {
  Vec3<T> u;
  Vec3<T> v;
  T norm2{1};
};

template <class T>
AdaptedFrame<T> adapted_frame(const Vec3<T>& zeta, int orientation = +1) {
  AdaptedFrame<T> f;
  // zeta = +-e_k: take the cyclic successor e_{k+1}
  for (std::size_t k = 0; k < 3; ++k) {
    if (zeta((k + 1) % 3) == T(0) && zeta((k + 2) % 3) == T(0) && zeta(k) != T(0)) {
      f.u = basis_vector<T>((k + 1) % 3);
      f.norm2 = T(1);
      f.v = cross(zeta, f.u) * T(orientation);
      return f;
    }
  }
  // least aligned frame vector, ties broken by index order
  std::size_t m = 0;
  for (std::size_t k = 1; k < 3; ++k)
    if (abs_of(zeta(k)) < abs_of(zeta(m))) m = k;
  f.u = basis_vector<T>(m) - zeta * zeta(m);
  f.norm2 = dot(f.u, f.u);
  f.v = cross(zeta, f.u) * T(orientation);
  return f;
}

template <class T>
struct ShapeOperator {
  Mat3<T> bilinear;
  Mat3<T> matrix;
  Vec3<T> geodesic_curvature;  // phi(zeta) = -nabla_zeta zeta
  bool totally_geodesic = false;
  T divergence{0};  // trace(phi) = -sum_i <nabla_{e_i} zeta, e_i>
  std::array<std::array<T, 2>, 2> horizontal{};  // <phi(h_b), h_a> in the adapted frame
};

template <class T>
struct HorizontalStructure {
  Mat3<T> matrix;  // column j is J(e_j)
  int orientation = +1;
  AdaptedFrame<T> frame;
};

template <class T>
HorizontalStructure<T> horizontal_structure(const Vec3<T>& zeta, int orientation = +1) {
  HorizontalStructure<T> h;
  h.orientation = orientation;
  for (std::size_t j = 0; j < 3; ++j) {
    Vec3<T> col = cross(zeta, basis_vector<T>(j)) * T(orientation);
    for (std::size_t i = 0; i < 3; ++i) h.matrix(i, j) = col(i);
  }
  h.frame = adapted_frame(zeta, orientation);
  return h;
}

template <class T>
ShapeOperator<T> shape_operator(const ConnectionTable<T>& g, const Vec3<T>& zeta,
                                const Tolerance& tol = {}, int orientation = +1) {
  make_unit_field(zeta, tol);
  ShapeOperator<T> s;
  for (std::size_t x = 0; x < 3; ++x) {
    Vec3<T> d = g.covariant(basis_vector<T>(x), zeta);
    for (std::size_t y = 0; y < 3; ++y) {
      s.bilinear(x, y) = -d(y);
      s.matrix(y, x) = -d(y);
    }
  }
  s.geodesic_curvature = matvec(s.matrix, zeta);
  double scale = to_double(g.gamma.max_abs());
  s.totally_geodesic = is_zero(s.geodesic_curvature.max_abs(), tol, scale);
  s.divergence = trace(s.matrix);
  auto f = adapted_frame(zeta, orientation);
  const Vec3<T>* w[2] = {&f.u, &f.v};
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      s.horizontal[a][b] = dot(*w[a], matvec(s.matrix, *w[b])) / f.norm2;
  return s;
}

template <class T>
struct FieldInvariants {
  T trace_phi{0};
  T det_h{0};      // determinant of the horizontal block of phi
  T norm2_phi{0};  // |phi|^2 = |nabla zeta|^2
  T trace_phi2{0};
  Mat3<T> S;        // phi + phi^T
  Mat3<T> S_tilde;  // phi - phi^T
  std::optional<T> lambda1;  // largest eigenvalue of S on the horizontal plane
  double lambda1_approx = 0.0;
  T trace_phiJ{0};
  T energy_density{0};  // 3/2 + |nabla zeta|^2 / 2
};

template <class T>
FieldInvariants<T> field_invariants(const ShapeOperator<T>& phi, const HorizontalStructure<T>& J) {
  FieldInvariants<T> inv;
  const auto& M = phi.matrix;
  inv.trace_phi = trace(M);
  inv.det_h = phi.horizontal[0][0] * phi.horizontal[1][1] - phi.horizontal[0][1] * phi.horizontal[1][0];
  inv.norm2_phi = M.norm2();
  inv.trace_phi2 = trace(matmul(M, M));
  inv.S = M + transpose(M);
  inv.S_tilde = M - transpose(M);
  // horizontal block of S: [[p, q], [q, r]]
  T p = 2 * phi.horizontal[0][0];
  T r = 2 * phi.horizontal[1][1];
  T q = phi.horizontal[0][1] + phi.horizontal[1][0];
  T mean = (p + r) / 2;
  T half_gap = (p - r) / 2;
  T disc = half_gap * half_gap + q * q;
  inv.lambda1_approx = to_double(mean) + std::sqrt(to_double(disc));
  try {
    inv.lambda1 = mean + kernel_traits<T>::sqrt(disc);
  } catch (const InexactOperation&) {
    inv.lambda1.reset();
  }
  inv.trace_phiJ = trace(matmul(M, J.matrix));
  inv.energy_density = T(3) / T(2) + inv.norm2_phi / T(2);
  return inv;
}

/// All derivatives of zeta, phi, J and R needed by the identities, computed once.
template <class T>
struct FieldContext {
  const FrameModel<T>* model = nullptr;
  Vec3<T> zeta;
  Tolerance tol;
  double scale = 1.0;

  Tensor<T, 2> dzeta;    // <nabla_{e_a} zeta, e_b>
  Tensor<T, 3> ddzeta;   // <nabla^2_{e_a,e_b} zeta, e_c>
  ShapeOperator<T> phi;
  HorizontalStructure<T> J;
  Tensor<T, 2> Jt;       // <J e_x, e_y>
  Tensor<T, 3> dphi;     // <(nabla_{e_a} phi)(e_x), e_y>
  Tensor<T, 4> ddphi;
  Tensor<T, 3> dJ;
  Tensor<T, 4> ddJ;
  Tensor<T, 5> dR;
  Tensor<T, 3> dRic;
  Mat3<T> jacobi;        // matrix of L(X) = R(X, zeta) zeta
  Vec3<T> rough_laplacian;
  FieldInvariants<T> inv;
  Vec3<T> ric_zeta;
  T ric_zz{0};
};

template <class T>
FieldContext<T> make_field_context(const FrameModel<T>& model, const Vec3<T>& zeta,
                                   const Tolerance& tol = {}, int orientation = +1) {
  make_unit_field(zeta, tol);
  FieldContext<T> ctx;
  ctx.model = &model;
  ctx.zeta = zeta;
  ctx.tol = tol;
  ctx.scale = std::max(1.0, model.scale());
  const auto& g = model.connection;
  const auto& R = model.curv.riemann;

  ctx.dzeta = covariant_derivative(zeta, g);
  ctx.ddzeta = covariant_derivative(ctx.dzeta, g);
  ctx.phi = shape_operator(g, zeta, tol, orientation);
  ctx.J = horizontal_structure(zeta, orientation);
  ctx.Jt = transpose(ctx.J.matrix);
  ctx.dphi = covariant_derivative(ctx.phi.bilinear, g);
  ctx.ddphi = covariant_derivative(ctx.dphi, g);
  ctx.dJ = covariant_derivative(ctx.Jt, g);
  ctx.ddJ = covariant_derivative(ctx.dJ, g);
  ctx.dR = covariant_derivative(R, g);
  ctx.dRic = covariant_derivative(model.curv.ricci, g);

  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) {
      T v(0);
      for (std::size_t q = 0; q < 3; ++q)
        for (std::size_t r = 0; r < 3; ++r) v += zeta(q) * zeta(r) * R(x, q, r, y);
      ctx.jacobi(y, x) = v;
    }
  for (std::size_t c = 0; c < 3; ++c) {
    T v(0);
    for (std::size_t a = 0; a < 3; ++a) v -= ctx.ddzeta(a, a, c);
    ctx.rough_laplacian(c) = v;
  }
  ctx.inv = field_invariants(ctx.phi, ctx.J);
  ctx.ric_zeta = matvec(model.curv.ricci, zeta);
  ctx.ric_zz = dot(zeta, ctx.ric_zeta);
  return ctx;
}

/// nabla^* nabla zeta = -sum_i (nabla_{e_i} nabla_{e_i} zeta - nabla_{nabla_{e_i} e_i} zeta).
template <class T>
Vec3<T> rough_laplacian_field(const ConnectionTable<T>& g, const Vec3<T>& zeta) {
  auto dd = covariant_derivative(covariant_derivative(zeta, g), g);
  Vec3<T> out;
  for (std::size_t c = 0; c < 3; ++c) {
    T v(0);
    for (std::size_t a = 0; a < 3; ++a) v -= dd(a, a, c);
    out(c) = v;
  }
  return out;
}

template <class T>
struct HarmonicResiduals {
  T unit_harmonic{0};  // |nabla^* nabla zeta - |nabla zeta|^2 zeta|
  T harmonic_map{0};   // |sum_i R(nabla_{e_i} zeta, zeta) e_i|
  Vec3<T> tension;     // nabla^* nabla zeta - |nabla zeta|^2 zeta
  bool harmonic = false;
  bool totally_geodesic = false;
};

template <class T>
HarmonicResiduals<T> harmonic_residuals(const FieldContext<T>& ctx) {
  HarmonicResiduals<T> h;
  const auto& R = ctx.model->curv.riemann;
  T n2 = ctx.dzeta.norm2();
  h.tension = ctx.rough_laplacian - ctx.zeta * n2;
  h.unit_harmonic = h.tension.max_abs();
  Vec3<T> hm;
  for (std::size_t l = 0; l < 3; ++l) {
    T v(0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t p = 0; p < 3; ++p) {
        if (ctx.dzeta(i, p) == T(0)) continue;
        for (std::size_t q = 0; q < 3; ++q) v += ctx.dzeta(i, p) * ctx.zeta(q) * R(p, q, i, l);
      }
    hm(l) = v;
  }
  h.harmonic_map = hm.max_abs();
  h.harmonic = is_zero(h.unit_harmonic, ctx.tol, ctx.scale);
  h.totally_geodesic = ctx.phi.totally_geodesic;
  return h;
}

template <class T>
HarmonicResiduals<T> harmonic_residuals(const FrameModel<T>& model, const Vec3<T>& zeta,
                                        const Tolerance& tol = {}) {
  return harmonic_residuals(make_field_context(model, zeta, tol));
}

template <class T>
struct KillingKostant {
  T killing_residual{0};  // max |phi + phi^T|
  T kostant_residual{0};  // max |nabla^2_{X,Y} zeta - R(X, zeta) Y|
  bool killing = false;
  bool ricci_eigen = false;
  bool killing_ricci_applicable = false;
  T killing_ricci_residual{0};  // |Ric(zeta,zeta) - |phi|^2|
};

template <class T>
KillingKostant<T> killing_and_kostant(const FieldContext<T>& ctx) {
  KillingKostant<T> k;
  const auto& R = ctx.model->curv.riemann;
  k.killing_residual = ctx.inv.S.max_abs();
  T worst(0);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 3; ++c) {
        T rhs(0);
        for (std::size_t q = 0; q < 3; ++q) rhs += ctx.zeta(q) * R(a, q, b, c);
        T d = abs_of(T(ctx.ddzeta(a, b, c) - rhs));
        if (d > worst) worst = d;
      }
  k.kostant_residual = worst;
  k.killing = is_zero(k.killing_residual, ctx.tol, std::sqrt(ctx.scale));
  Vec3<T> defect = ctx.ric_zeta - ctx.zeta * ctx.ric_zz;
  k.ricci_eigen = is_zero(defect.max_abs(), ctx.tol, ctx.scale);
  k.killing_ricci_applicable = k.killing && k.ricci_eigen;
  k.killing_ricci_residual = abs_of(T(ctx.ric_zz - ctx.inv.norm2_phi));
  return k;
}

/// Max of the two Sasakian defects: phi^2 = -Id + zeta (x) zeta and
/// (nabla_X phi)(Y) = <X,Y> zeta - <Y,zeta> X.
template <class T>
T sasakian_residual(const FieldContext<T>& ctx) {
  const auto& M = ctx.phi.matrix;
  Mat3<T> sq = matmul(M, M) + identity3<T>() - outer(ctx.zeta, ctx.zeta);
  T worst = sq.max_abs();
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t y = 0; y < 3; ++y)
      for (std::size_t w = 0; w < 3; ++w) {
        T rhs = (a == y ? ctx.zeta(w) : T(0)) - (a == w ? ctx.zeta(y) : T(0));
        T d = abs_of(T(ctx.dphi(a, y, w) - rhs));
        if (d > worst) worst = d;
      }
  return worst;
}

template <class T>
T sasakian_residual(const FrameModel<T>& model, const Vec3<T>& zeta, const Tolerance& tol = {}) {
  return sasakian_residual(make_field_context(model, zeta, tol));
}

struct FieldFlags {
  bool harmonic = false;
  bool totally_geodesic = false;
  bool divergence_free = false;
  bool ricci_eigen = false;
  bool killing = false;
};

template <class T>
struct ResidualEntry {
  std::string name;
  T value{0};
  bool asserted = false;
  std::string anchor;     // the identity being checked
  std::string condition;  // hypotheses under which it is asserted
};

template <class T>
struct ResidualMap {
  std::vector<ResidualEntry<T>> entries;
  FieldFlags flags;

  const ResidualEntry<T>* find(std::string_view name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
  const T& operator[](std::string_view name) const {
    if (auto* e = find(name)) return e->value;
    throw std::out_of_range("no residual named " + std::string(name));
  }
};

template <class T>
FieldFlags field_flags(const FieldContext<T>& ctx) {
  auto h = harmonic_residuals(ctx);
  auto k = killing_and_kostant(ctx);
  FieldFlags f;
  f.harmonic = h.harmonic;
  f.totally_geodesic = ctx.phi.totally_geodesic;
  f.divergence_free = is_zero(ctx.inv.trace_phi, ctx.tol, std::sqrt(ctx.scale));
  f.ricci_eigen = k.ricci_eigen;
  f.killing = k.killing;
  return f;
}

/// Every Bochner-Weitzenboeck type identity for the field, as named residuals.
/// For constant-component fields all derivatives of scalar invariants vanish, so
/// the "left side" of each differential identity is zero and the residual is the
/// max-norm of its right side (or of the difference of both sides when both
/// involve tensors).
template <class T>
ResidualMap<T> identity_suite(const FieldContext<T>& ctx) {
  ResidualMap<T> map;
  map.flags = field_flags(ctx);
  const auto& f = map.flags;
  const auto& model = *ctx.model;
  const auto& R = model.curv.riemann;
  const auto& Ric = model.curv.ricci;
  const auto& M = ctx.phi.matrix;
  const auto& P = ctx.phi.bilinear;
  const auto& z = ctx.zeta;
  const Mat3<T> Mt = transpose(M);
  const T norm2 = ctx.inv.norm2_phi;
  const T lambda = ctx.ric_zz;

  auto add = [&](std::string name, T value, bool asserted, std::string anchor,
                 std::string condition) {
    map.entries.push_back(ResidualEntry<T>{std::move(name), abs_of(value), asserted,
                                           std::move(anchor), std::move(condition)});
  };
  auto maxabs = [](std::initializer_list<T> xs) {
    T m(0);
    for (const auto& x : xs)
      if (abs_of(x) > m) m = abs_of(x);
    return m;
  };

  const bool geo = f.totally_geodesic;
  const bool hg = f.harmonic && f.totally_geodesic;

  // nabla_zeta applied to a (0,3) derivative tensor: sum_a z_a d(a, x, y)
  auto along_zeta = [&](const Tensor<T, 3>& d) {
    Mat3<T> out;
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t y = 0; y < 3; ++y) {
        T v(0);
        for (std::size_t a = 0; a < 3; ++a) v += z(a) * d(a, x, y);
        out(x, y) = v;
      }
    return out;
  };
  const Mat3<T> dphi_zeta = along_zeta(ctx.dphi);  // bilinear: <(nabla_zeta phi) e_x, e_y>

  // riccati: (nabla_zeta phi)(X) = phi^2(X) + L(X)
  {
    Mat3<T> lhs = transpose(dphi_zeta);  // as a matrix
    Mat3<T> rhs = matmul(M, M) + ctx.jacobi;
    add("riccati", (lhs - rhs).max_abs(), geo, "(nabla_zeta phi)(X) = phi^2(X) + R(X,zeta)zeta",
        "totally geodesic");
  }
  // codazzi: (nabla_X phi)(Y) - (nabla_Y phi)(X) = -R(X,Y) zeta
  {
    T worst(0);
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t w = 0; w < 3; ++w) {
          T rz(0);
          for (std::size_t q = 0; q < 3; ++q) rz += z(q) * R(x, y, q, w);
          T d = abs_of(T(ctx.dphi(x, y, w) - ctx.dphi(y, x, w) + rz));
          if (d > worst) worst = d;
        }
    add("codazzi", worst, true, "(nabla_X phi)(Y) - (nabla_Y phi)(X) = -R(X,Y)zeta", "always");
  }
  // div_phi: sum_i (nabla_{e_i} phi)(e_i) = |phi|^2 zeta
  {
    Vec3<T> d;
    for (std::size_t w = 0; w < 3; ++w) {
      T v(0);
      for (std::size_t i = 0; i < 3; ++i) v += ctx.dphi(i, i, w);
      d(w) = v - norm2 * z(w);
    }
    add("div_phi", d.max_abs(), f.harmonic, "-delta phi = sum_i (nabla_{e_i} phi)(e_i) = |phi|^2 zeta",
        "harmonic");
  }
  // div_phi_T: delta phi^T = Ric(zeta) - d trace(phi)
  {
    Vec3<T> d;
    for (std::size_t w = 0; w < 3; ++w) {
      T v(0);
      for (std::size_t i = 0; i < 3; ++i) v -= ctx.dphi(i, w, i);
      d(w) = v - ctx.ric_zeta(w);
    }
    add("div_phi_T", d.max_abs(), true, "delta phi^T = Ric(zeta) - d(trace phi)", "always");
  }
  // riccati_T: nabla_zeta phi^T = (phi^T)^2 + L
  {
    Mat3<T> lhs = dphi_zeta;  // bilinear of phi is the matrix of phi^T
    Mat3<T> rhs = matmul(Mt, Mt) + ctx.jacobi;
    add("riccati_T", (lhs - rhs).max_abs(), geo, "nabla_zeta phi^T = (phi^T)^2 + L",
        "totally geodesic");
  }
  // codazzi_S: <(nabla_X S)(Y) - (nabla_Y S)(X), Z> = <(nabla_Z S~)(X), Y> - 2 R(X,Y,zeta,Z)
  {
    auto dS = [&](std::size_t a, std::size_t x, std::size_t y) {
      return ctx.dphi(a, x, y) + ctx.dphi(a, y, x);
    };
    auto dSt = [&](std::size_t a, std::size_t x, std::size_t y) {
      // bilinear of S~ = phi - phi^T as a matrix is -(P - P^T); keep the matrix convention
      return ctx.dphi(a, y, x) - ctx.dphi(a, x, y);
    };
    T worst(0);
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t w = 0; w < 3; ++w) {
          T rz(0);
          for (std::size_t q = 0; q < 3; ++q) rz += z(q) * R(x, y, q, w);
          // <(nabla_a S~)(e_x), e_y> with S~ = phi - phi^T: dphi(a,x,y) - dphi(a,y,x)
          T lhs = dS(x, y, w) - dS(y, x, w);
          T rhs = -dSt(w, x, y) - 2 * rz;
          T d = abs_of(T(lhs - rhs));
          if (d > worst) worst = d;
        }
    add("codazzi_S", worst, true,
        "<(nabla_X S)(Y) - (nabla_Y S)(X), Z> = <(nabla_Z S~)(X), Y> - 2R(X,Y,zeta,Z)", "always");
  }
  // nabla_J: (nabla_X J)(Y) = -<J phi(X), Y> zeta + <Y, zeta> J phi(X)
  const Mat3<T> Jphi = matmul(ctx.J.matrix, M);
  {
    T worst(0);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t w = 0; w < 3; ++w) {
          T rhs = -Jphi(y, a) * z(w) + z(y) * Jphi(w, a);
          T d = abs_of(T(ctx.dJ(a, y, w) - rhs));
          if (d > worst) worst = d;
        }
    add("nabla_J", worst, true, "(nabla_X J)(Y) = -<J phi(X), Y> zeta + <Y, zeta> J phi(X)",
        "always");
  }
  // J^2 = -Id + zeta (x) zeta
  {
    Mat3<T> d = matmul(ctx.J.matrix, ctx.J.matrix) + identity3<T>() - outer(z, z);
    add("J_square", d.max_abs(), true, "J^2 = -Id + zeta (x) zeta", "always");
  }
  const T phi_dot_J = contract_all(P, ctx.Jt);  // <phi, J>
  // laplacian_J: nabla^* nabla J = |phi|^2 J
  {
    T worst(0);
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t y = 0; y < 3; ++y) {
        T lap(0);
        for (std::size_t a = 0; a < 3; ++a) lap -= ctx.ddJ(a, a, x, y);
        T d = abs_of(T(lap - norm2 * ctx.Jt(x, y)));
        if (d > worst) worst = d;
      }
    add("laplacian_J", worst, hg, "nabla^* nabla J = |phi|^2 J", "harmonic, totally geodesic");
  }
  // grad_fj: <nabla phi, nabla J> = |phi|^2 <phi, J>
  {
    T lhs = contract_all(ctx.dphi, ctx.dJ);
    add("grad_fj", T(lhs - norm2 * phi_dot_J), hg, "<nabla phi, nabla J> = |phi|^2 <phi, J>",
        "harmonic, totally geodesic");
  }
  Mat3<T> lap_phi;  // bilinear (nabla^* nabla phi)(e_x) . e_w
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t w = 0; w < 3; ++w) {
      T v(0);
      for (std::size_t a = 0; a < 3; ++a) v -= ctx.ddphi(a, a, x, w);
      lap_phi(x, w) = v;
    }
  // laplacian_phi_J: <nabla^* nabla phi, J> = |phi|^2 <phi, J>
  {
    T lhs = contract_all(lap_phi, ctx.Jt);
    add("laplacian_phi_J", T(lhs - norm2 * phi_dot_J), hg && f.ricci_eigen,
        "<nabla^* nabla phi, J> = |phi|^2 <phi, J>", "harmonic, totally geodesic, Ric(zeta) = lambda zeta");
  }
  // laplacian_phi_full:
  // (nabla^*nabla phi)(X) + <X, grad|phi|^2> zeta
  //   = |phi|^2 phi(X) - phi(Ric X) - sum_i (nabla_{e_i} R)(X, e_i) zeta + 2 sum_i R(X, e_i) phi(e_i)
  {
    T worst(0);
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t w = 0; w < 3; ++w) {
        T rhs = norm2 * P(x, w);
        for (std::size_t m = 0; m < 3; ++m) rhs -= Ric(x, m) * P(m, w);
        for (std::size_t i = 0; i < 3; ++i)
          for (std::size_t q = 0; q < 3; ++q) rhs -= z(q) * ctx.dR(i, x, i, q, w);
        for (std::size_t i = 0; i < 3; ++i)
          for (std::size_t m = 0; m < 3; ++m) rhs += 2 * P(i, m) * R(x, i, m, w);
        T d = abs_of(T(lap_phi(x, w) - rhs));
        if (d > worst) worst = d;
      }
    add("laplacian_phi_full", worst, hg,
        "(nabla^*nabla phi)(X) + <X, grad|phi|^2> zeta = |phi|^2 phi(X) - phi(Ric X) - "
        "sum_i (nabla_{e_i}R)(X,e_i)zeta + 2 sum_i R(X,e_i)phi(e_i)",
        "harmonic, totally geodesic");
  }
  // ode along the leaves; zeta-derivatives of constants vanish
  const T tr_phi = ctx.inv.trace_phi;
  const T tr_phiJ = ctx.inv.trace_phiJ;
  add("leaf_ode_1", T(tr_phi * tr_phiJ), geo, "zeta(trace(phi J)) = trace(phi) trace(phi J)",
      "totally geodesic");
  {
    T first = ctx.inv.trace_phi2 + ctx.ric_zz;
    T second = tr_phi * tr_phi - 2 * ctx.inv.det_h + ctx.ric_zz;
    add("leaf_ode_2", maxabs({first, second}), geo,
        "zeta(trace phi) = trace(phi^2) + Ric(zeta,zeta) = trace(phi)^2 - 2 det(phi) + Ric(zeta,zeta)",
        "totally geodesic");
  }
  {
    T stated = 2 * (trace(matmul(matmul(M, M), Mt)) + trace(matmul(Mt, ctx.jacobi)));
    add("leaf_ode_3", stated, geo, "zeta(|phi|^2) = 2 trace(phi^2 phi^T + phi^T L)", "totally geodesic");
    T direct = 2 * contract_all(P, dphi_zeta);
    add("leaf_ode_3_direct", direct, true, "zeta(|phi|^2) = 2 <phi, nabla_zeta phi>", "always");
  }
  // Laplacian of trace(phi)
  {
    T rhs = norm2 * tr_phi - 2 * trace(matmul(matmul(M, M), Mt)) +
            trace(matmul(Mt, Ric - 2 * ctx.jacobi));
    add("laplacian_trace", rhs, hg,
        "Delta trace(phi) = |phi|^2 trace(phi) - 2 trace(phi^2 phi^T) + trace(phi^T(Ric - 2L)) - zeta(Scal)/2",
        "harmonic, totally geodesic");
    T eigen = tr_phi * (2 * ctx.inv.det_h - norm2 + model.curv.scal - 3 * lambda);
    add("laplacian_trace_eigen", eigen, hg && f.ricci_eigen,
        "Delta trace(phi) = trace(phi)(2 det(phi) - |phi|^2 + Scal - 3 lambda) - zeta(Scal)",
        "harmonic, totally geodesic, Ric(zeta) = lambda zeta");
  }
  {
    T s_side = ctx.inv.S.norm2() - 2 * norm2 - 2 * ctx.inv.trace_phi2;
    T st_side = ctx.inv.S_tilde.norm2() - 2 * norm2 + 2 * ctx.inv.trace_phi2;
    add("norm_identity", maxabs({s_side, st_side}), true,
        "|S|^2 = 2|phi|^2 + 2 trace(phi^2), |S~|^2 = 2|phi|^2 - 2 trace(phi^2)", "always");
  }
  add("trace_phi2", T(ctx.inv.trace_phi2 + lambda),
      hg && f.divergence_free && f.ricci_eigen, "trace(phi^2) = -Ric(zeta,zeta) = -lambda",
      "divergence-free, harmonic, totally geodesic, Ric(zeta) = lambda zeta");
  add("contracted_bianchi", contracted_bianchi_residual(ctx.dR, ctx.dRic, z), true,
      "sum_i (nabla_{e_i}R)(X,e_i,zeta,Y) = (nabla_zeta Ric)(X,Y) - (nabla_Y Ric)(zeta,X)", "always");
  return map;
}

template <class T>
ResidualMap<T> identity_suite(const FrameModel<T>& model, const Vec3<T>& zeta,
                              const Tolerance& tol = {}) {
  return identity_suite(make_field_context(model, zeta, tol));
}

template <class T>
struct ContactCheck {
  T trace_phiJ{0};
  T wedge_value{0};  // (eta ^ d eta)(zeta, h1, h2) from the brackets
  bool is_contact = false;
  T agreement{0};    // |wedge_value - trace_phiJ|
};

template <class T>
ContactCheck<T> contact_check(const FieldContext<T>& ctx) {
  ContactCheck<T> c;
  c.trace_phiJ = ctx.inv.trace_phiJ;
  // d eta(X, Y) = X eta(Y) - Y eta(X) - eta([X,Y]); the first two vanish for constant fields
  const auto& s = ctx.model->brackets;
  const auto& fr = ctx.J.frame;
  auto deta = [&](const Vec3<T>& a, const Vec3<T>& b) { return T(-dot(ctx.zeta, s.bracket(a, b))); };
  auto eta = [&](const Vec3<T>& a) { return dot(ctx.zeta, a); };
  // (eta ^ d eta)(a, b, c) = eta(a) d eta(b, c) + eta(b) d eta(c, a) + eta(c) d eta(a, b),
  // evaluated on the unnormalized (zeta, u, v) and rescaled by 1/|u|^2
  const auto& a = ctx.zeta;
  T w = eta(a) * deta(fr.u, fr.v) + eta(fr.u) * deta(fr.v, a) + eta(fr.v) * deta(a, fr.u);
  c.wedge_value = w / fr.norm2;
  c.agreement = abs_of(T(c.wedge_value - c.trace_phiJ));
  c.is_contact = !is_zero(c.trace_phiJ, ctx.tol, std::sqrt(ctx.scale));
  return c;
}

template <class T>
ContactCheck<T> contact_check(const FrameModel<T>& model, const Vec3<T>& zeta,
                              const Tolerance& tol = {}, int orientation = +1) {
  return contact_check(make_field_context(model, zeta, tol, orientation));
}

}  // namespace hvf
