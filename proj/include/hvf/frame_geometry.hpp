#pragma once

// Exact tensor calculus on homogeneous 3-frame models.
//
// A frame model is an orthonormal frame (e_0, e_1, e_2) whose brackets have
// constant coefficients,
//
//     [e_i, e_j] = sum_k c(i,j,k) e_k.
//
// Everything below (connection, curvature, covariant derivatives of tensors
// with constant frame components) is then pure algebra in c.
//
// Conventions, fixed once:
//   gamma(i,j,k) = <nabla_{e_i} e_j, e_k>
//   R(X,Y)Z      = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
//   riemann(i,j,k,l) = <R(e_i,e_j) e_k, e_l>
//   ricci(a,b)   = sum_i riemann(i,a,b,i)      (round S^3 has Ric = +2 Id)
// Indices are 0-based here; reports print them 1-based.

#include "hvf/tensor.hpp"

#include <stdexcept>
#include <string>

namespace hvf {

/// Inconsistent model input (non-antisymmetric brackets, non-Lie input where a
/// Lie algebra is required).
class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class T>
struct StructureConstants {
  Tensor<T, 3> c;

  /// [e1,e2] = alpha e3, [e1,e3] = beta e2, [e2,e3] = gamma e1 (1-based).
  static StructureConstants unimodular(const T& alpha, const T& beta, const T& gamma) {
    StructureConstants s;
    s.set_bracket(0, 1, 2, alpha);
    s.set_bracket(0, 2, 1, beta);
    s.set_bracket(1, 2, 0, gamma);
    return s;
  }

  /// Sets c(i,j,k) = v and c(j,i,k) = -v.
  void set_bracket(std::size_t i, std::size_t j, std::size_t k, const T& v) {
    c(i, j, k) = v;
    c(j, i, k) = -v;
  }

  /// Bracket of two constant-coefficient vector fields.
  Vec3<T> bracket(const Vec3<T>& u, const Vec3<T>& v) const {
    Vec3<T> out;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        if (u(i) == T(0) || v(j) == T(0)) continue;
        T uv = u(i) * v(j);
        for (std::size_t k = 0; k < 3; ++k) out(k) += uv * c(i, j, k);
      }
    return out;
  }

  T antisymmetry_defect() const {
    T m(0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) {
          T d = abs_of(T(c(i, j, k) + c(j, i, k)));
          if (d > m) m = d;
        }
    return m;
  }

  double scale() const { return to_double(c.max_abs()); }

  /// Same algebra in the frame e'_i = sum_p Q(p, i) e_p; Q must be orthogonal
  /// for the new frame to stay orthonormal.
  StructureConstants rotated(const Mat3<T>& Q) const {
    StructureConstants out;
    for (std::size_t f = 0; f < 27; ++f) {
      auto [i, j, k] = Tensor<T, 3>::unflatten(f);
      T v(0);
      for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 3; ++q) {
          if (Q(p, i) == T(0) || Q(q, j) == T(0)) continue;
          for (std::size_t r = 0; r < 3; ++r) v += Q(p, i) * Q(q, j) * Q(r, k) * c(p, q, r);
        }
      out.c(i, j, k) = v;
    }
    return out;
  }

  template <class U>
  StructureConstants<U> cast() const {
    return StructureConstants<U>{c.template cast<U>()};
  }
};

template <class T>
struct ConnectionTable {
  Tensor<T, 3> gamma;

  /// nabla_u v for constant-coefficient fields u, v.
  Vec3<T> covariant(const Vec3<T>& u, const Vec3<T>& v) const {
    Vec3<T> out;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        if (u(i) == T(0) || v(j) == T(0)) continue;
        T uv = u(i) * v(j);
        for (std::size_t k = 0; k < 3; ++k) out(k) += uv * gamma(i, j, k);
      }
    return out;
  }
};

template <class T>
struct CurvatureBundle {
  Tensor<T, 4> riemann;
  Mat3<T> ricci;
  T scal{0};
};

template <class T>
struct KillingForm {
  Mat3<T> b;
};

namespace detail {

template <class T>
void require_antisymmetric(const StructureConstants<T>& s, const Tolerance& tol) {
  if (!is_zero(s.antisymmetry_defect(), tol, s.scale()))
    throw InvalidModel("structure constants are not antisymmetric in their first two indices");
}

}  // namespace detail

/// Max-norm of the Jacobi defect [[e_i,e_j],e_k] + cyclic over all basis triples.
template <class T>
T jacobi_residual(const StructureConstants<T>& s, const Tolerance& tol = {}) {
  detail::require_antisymmetric(s, tol);
  const auto& c = s.c;
  // bb(i,j,k,n): coefficient of e_n in [[e_i,e_j],e_k]
  auto double_bracket = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t n) {
    T v(0);
    for (std::size_t m = 0; m < 3; ++m) v += c(i, j, m) * c(m, k, n);
    return v;
  };
  T worst(0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t n = 0; n < 3; ++n) {
          T d = abs_of(T(double_bracket(i, j, k, n) + double_bracket(j, k, i, n) +
                         double_bracket(k, i, j, n)));
          if (d > worst) worst = d;
        }
  return worst;
}

/// Levi-Civita connection of the left-invariant metric making the frame orthonormal
/// (Koszul formula): gamma(i,j,k) = (c(i,j,k) - c(j,k,i) + c(k,i,j)) / 2.
template <class T>
ConnectionTable<T> levi_civita(const StructureConstants<T>& s, const Tolerance& tol = {}) {
  detail::require_antisymmetric(s, tol);
  const auto& c = s.c;
  ConnectionTable<T> g;
  const T half = T(1) / T(2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        g.gamma(i, j, k) = half * (c(i, j, k) - c(j, k, i) + c(k, i, j));
  return g;
}

template <class T>
T metric_compatibility_residual(const ConnectionTable<T>& g) {
  T m(0);
  for (std::size_t f = 0; f < 27; ++f) {
    auto [i, j, k] = Tensor<T, 3>::unflatten(f);
    T d = abs_of(T(g.gamma(i, j, k) + g.gamma(i, k, j)));
    if (d > m) m = d;
  }
  return m;
}

template <class T>
T torsion_residual(const ConnectionTable<T>& g, const StructureConstants<T>& s) {
  T m(0);
  for (std::size_t f = 0; f < 27; ++f) {
    auto [i, j, k] = Tensor<T, 3>::unflatten(f);
    T d = abs_of(T(g.gamma(i, j, k) - g.gamma(j, i, k) - s.c(i, j, k)));
    if (d > m) m = d;
  }
  return m;
}

template <class T>
CurvatureBundle<T> curvature(const ConnectionTable<T>& g, const StructureConstants<T>& s) {
  const auto& G = g.gamma;
  const auto& c = s.c;
  CurvatureBundle<T> out;
  for (std::size_t f = 0; f < 81; ++f) {
    auto [i, j, k, l] = Tensor<T, 4>::unflatten(f);
    T v(0);
    for (std::size_t m = 0; m < 3; ++m) {
      v += G(j, k, m) * G(i, m, l) - G(i, k, m) * G(j, m, l);
      v -= c(i, j, m) * G(m, k, l);
    }
    out.riemann.flat(f) = v;
  }
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      T v(0);
      for (std::size_t i = 0; i < 3; ++i) v += out.riemann(i, a, b, i);
      out.ricci(a, b) = v;
    }
  out.scal = trace(out.ricci);
  return out;
}

/// Covariant derivative of a tensor with constant frame components. The new
/// (differentiating) slot comes first:
///   (nabla T)(a, b1..br) = -sum_s sum_m gamma(a, b_s, m) T(b1..m..br).
template <class T, std::size_t R>
Tensor<T, R + 1> covariant_derivative(const Tensor<T, R>& t, const ConnectionTable<T>& g) {
  static_assert(R >= 1 && R <= 4, "covariant_derivative supports ranks 1..4");
  using Out = Tensor<T, R + 1>;
  Out out;
  for (std::size_t f = 0; f < Out::size; ++f) {
    auto idx = Out::unflatten(f);
    const std::size_t a = idx[0];
    typename Tensor<T, R>::Index src{};
    for (std::size_t s = 0; s < R; ++s) src[s] = idx[s + 1];
    T v(0);
    for (std::size_t s = 0; s < R; ++s) {
      auto moved = src;
      for (std::size_t m = 0; m < 3; ++m) {
        const T& gm = g.gamma(a, src[s], m);
        if (gm == T(0)) continue;
        moved[s] = m;
        v -= gm * t.at(moved);
      }
    }
    out.flat(f) = v;
  }
  return out;
}

/// B(X,Y) = trace(ad X o ad Y). Requires a Lie algebra.
template <class T>
KillingForm<T> killing_form(const StructureConstants<T>& s, const Tolerance& tol = {}) {
  T jac = jacobi_residual(s, tol);
  if (!is_zero(jac, tol, s.scale() * s.scale()))
    throw InvalidModel("Killing form requested for brackets that violate the Jacobi identity");
  KillingForm<T> k;
  // (ad e_a)(k, j) = c(a, j, k)
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      T v(0);
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t m = 0; m < 3; ++m) v += s.c(a, j, m) * s.c(b, m, j);
      k.b(a, b) = v;
    }
  return k;
}

/// Max defect of R(i,j,k,l) = -R(j,i,k,l) = -R(i,j,l,k) = R(k,l,i,j).
template <class T>
T riemann_symmetry_residual(const Tensor<T, 4>& R) {
  T m(0);
  for (std::size_t f = 0; f < 81; ++f) {
    auto [i, j, k, l] = Tensor<T, 4>::unflatten(f);
    for (const T& d : {T(R(i, j, k, l) + R(j, i, k, l)), T(R(i, j, k, l) + R(i, j, l, k)),
                       T(R(i, j, k, l) - R(k, l, i, j))}) {
      T a = abs_of(d);
      if (a > m) m = a;
    }
  }
  return m;
}

template <class T>
T first_bianchi_residual(const Tensor<T, 4>& R) {
  T m(0);
  for (std::size_t f = 0; f < 81; ++f) {
    auto [i, j, k, l] = Tensor<T, 4>::unflatten(f);
    T a = abs_of(T(R(i, j, k, l) + R(j, k, i, l) + R(k, i, j, l)));
    if (a > m) m = a;
  }
  return m;
}

/// (nabla_a R)(b,c) + (nabla_b R)(c,a) + (nabla_c R)(a,b) = 0, given nabla R with
/// the derivative slot first.
template <class T>
T second_bianchi_residual(const Tensor<T, 5>& dR) {
  T m(0);
  for (std::size_t f = 0; f < 243; ++f) {
    auto [a, b, c, d, e] = Tensor<T, 5>::unflatten(f);
    T v = abs_of(T(dR(a, b, c, d, e) + dR(b, c, a, d, e) + dR(c, a, b, d, e)));
    if (v > m) m = v;
  }
  return m;
}

/// sum_i (nabla_{e_i} R)(X, e_i, zeta, Y) = (nabla_zeta Ric)(X,Y) - (nabla_Y Ric)(zeta, X),
/// evaluated for all frame X, Y. Max-norm of the defect.
template <class T>
T contracted_bianchi_residual(const Tensor<T, 5>& dR, const Tensor<T, 3>& dRic,
                              const Vec3<T>& zeta) {
  T m(0);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) {
      T lhs(0), rhs(0);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t z = 0; z < 3; ++z) lhs += zeta(z) * dR(i, x, i, z, y);
      for (std::size_t z = 0; z < 3; ++z) rhs += zeta(z) * (dRic(z, x, y) - dRic(y, z, x));
      T v = abs_of(T(lhs - rhs));
      if (v > m) m = v;
    }
  return m;
}

/// Frame model with its derived connection and curvature, computed once.
template <class T>
struct FrameModel {
  std::string name;
  StructureConstants<T> brackets;
  ConnectionTable<T> connection;
  CurvatureBundle<T> curv;

  static FrameModel build(StructureConstants<T> s, std::string name = {},
                          const Tolerance& tol = {}) {
    FrameModel m;
    m.name = std::move(name);
    m.connection = levi_civita(s, tol);
    m.curv = curvature(m.connection, s);
    m.brackets = std::move(s);
    return m;
  }

  /// Natural magnitude of curvature-level quantities, used to scale float tolerances.
  double scale() const {
    double s = brackets.scale();
    return s * s;
  }
};

}  // namespace hvf
