#pragma once

// Dense tensors over R^3 with components in a fixed orthonormal frame.
//
// Tensor<T, R> holds 3^R components addressed by R indices in 0..2. Since the
// frame is orthonormal there is no distinction between upper and lower
// indices. Rank 1 doubles as a vector and rank 2 as a matrix with
// m(row, col).

#include "hvf/scalar.hpp"

#include <array>
#include <cstddef>
#include <type_traits>
#include <utility>

namespace hvf {

constexpr std::size_t pow3(std::size_t rank) { return rank == 0 ? 1 : 3 * pow3(rank - 1); }

template <class T, std::size_t Rank>
class Tensor {
 public:
  static constexpr std::size_t rank = Rank;
  static constexpr std::size_t size = pow3(Rank);
  using Index = std::array<std::size_t, Rank>;

  Tensor() { data_.fill(T(0)); }

  template <class... I>
    requires(sizeof...(I) == Rank)
  T& operator()(I... idx) {
    return data_[flatten(Index{static_cast<std::size_t>(idx)...})];
  }
  template <class... I>
    requires(sizeof...(I) == Rank)
  const T& operator()(I... idx) const {
    return data_[flatten(Index{static_cast<std::size_t>(idx)...})];
  }

  T& at(const Index& idx) { return data_[flatten(idx)]; }
  const T& at(const Index& idx) const { return data_[flatten(idx)]; }

  T& flat(std::size_t i) { return data_[i]; }
  const T& flat(std::size_t i) const { return data_[i]; }

  static constexpr std::size_t flatten(const Index& idx) {
    std::size_t f = 0;
    for (std::size_t k = 0; k < Rank; ++k) f = 3 * f + idx[k];
    return f;
  }
  static constexpr Index unflatten(std::size_t f) {
    Index idx{};
    for (std::size_t k = Rank; k-- > 0;) {
      idx[k] = f % 3;
      f /= 3;
    }
    return idx;
  }

  Tensor& operator+=(const Tensor& o) {
    for (std::size_t i = 0; i < size; ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    for (std::size_t i = 0; i < size; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor& operator*=(const T& s) {
    for (auto& x : data_) x *= s;
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, const T& s) { return a *= s; }
  friend Tensor operator*(const T& s, Tensor a) { return a *= s; }
  friend Tensor operator-(Tensor a) {
    for (auto& x : a.data_) x = -x;
    return a;
  }
  friend bool operator==(const Tensor& a, const Tensor& b) { return a.data_ == b.data_; }

  /// Largest absolute component.
  T max_abs() const {
    T m(0);
    for (const auto& x : data_) {
      T a = abs_of(x);
      if (a > m) m = a;
    }
    return m;
  }

  /// Sum of squared components.
  T norm2() const {
    T s(0);
    for (const auto& x : data_) s += x * x;
    return s;
  }

  template <class U>
  Tensor<U, Rank> cast() const {
    Tensor<U, Rank> out;
    for (std::size_t i = 0; i < size; ++i) {
      if constexpr (std::is_same_v<U, double>)
        out.flat(i) = to_double(data_[i]);
      else
        out.flat(i) = U(data_[i]);
    }
    return out;
  }

  const std::array<T, size>& data() const { return data_; }

 private:
  std::array<T, size> data_;
};

template <class T>
using Vec3 = Tensor<T, 1>;
template <class T>
using Mat3 = Tensor<T, 2>;

template <class T>
Vec3<T> vec3(T x, T y, T z) {
  Vec3<T> v;
  v(0) = std::move(x);
  v(1) = std::move(y);
  v(2) = std::move(z);
  return v;
}

template <class T>
Vec3<T> basis_vector(std::size_t k) {
  Vec3<T> v;
  v(k) = T(1);
  return v;
}

template <class T>
Mat3<T> identity3() {
  Mat3<T> m;
  for (std::size_t i = 0; i < 3; ++i) m(i, i) = T(1);
  return m;
}

template <class T>
Mat3<T> diag3(const T& a, const T& b, const T& c) {
  Mat3<T> m;
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return vec3<T>(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0));
}

template <class T>
Mat3<T> matmul(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> m;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      T s(0);
      for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      m(i, j) = s;
    }
  return m;
}

template <class T>
Vec3<T> matvec(const Mat3<T>& a, const Vec3<T>& v) {
  Vec3<T> out;
  for (std::size_t i = 0; i < 3; ++i) out(i) = a(i, 0) * v(0) + a(i, 1) * v(1) + a(i, 2) * v(2);
  return out;
}

template <class T>
Mat3<T> transpose(const Mat3<T>& a) {
  Mat3<T> m;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m(i, j) = a(j, i);
  return m;
}

template <class T>
T trace(const Mat3<T>& a) {
  return a(0, 0) + a(1, 1) + a(2, 2);
}

template <class T>
T det(const Mat3<T>& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

/// Second elementary symmetric function of the eigenvalues (sum of principal 2x2 minors).
template <class T>
T principal_minor_sum(const Mat3<T>& a) {
  return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) +
         a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
}

template <class T>
Mat3<T> outer(const Vec3<T>& a, const Vec3<T>& b) {
  Mat3<T> m;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m(i, j) = a(i) * b(j);
  return m;
}

/// Frobenius inner product sum_ij a_ij b_ij.
template <class T, std::size_t R>
T contract_all(const Tensor<T, R>& a, const Tensor<T, R>& b) {
  T s(0);
  for (std::size_t i = 0; i < Tensor<T, R>::size; ++i) s += a.flat(i) * b.flat(i);
  return s;
}

template <class T, std::size_t R>
T max_abs_diff(const Tensor<T, R>& a, const Tensor<T, R>& b) {
  return (a - b).max_abs();
}

/// Inverse of a 3x3 matrix by the adjugate; throws on a singular input.
template <class T>
Mat3<T> inverse(const Mat3<T>& a) {
  T d = det(a);
  if (d == T(0)) throw std::domain_error("singular 3x3 matrix");
  Mat3<T> inv;
  inv(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  inv(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  inv(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  inv(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  inv(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  inv(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  inv(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  inv(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  inv(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  for (std::size_t i = 0; i < 9; ++i) inv.flat(i) /= d;
  return inv;
}

}  // namespace hvf
