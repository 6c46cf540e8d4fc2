#pragma once

// Random model generators shared by the unit and acceptance tests.

#include "hvf/hvf.hpp"

#include <random>

namespace hvf::fixtures {

/// Rational in [-5, 5] with denominator 1..6.
inline Rational random_rational(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> den(1, 6);
  int q = den(rng);
  std::uniform_int_distribution<int> p(-5 * q, 5 * q);
  return Rational(p(rng), q);
}

inline std::array<Rational, 3> random_abc(std::mt19937_64& rng) {
  return {random_rational(rng), random_rational(rng), random_rational(rng)};
}

inline StructureConstants<Rational> random_unimodular(std::mt19937_64& rng) {
  auto [a, b, c] = random_abc(rng);
  return StructureConstants<Rational>::unimodular(a, b, c);
}

/// Uniform real parameters in [-5, 5]; distinct with probability one.
inline StructureConstants<double> random_unimodular_real(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double a = u(rng), b = u(rng), c = u(rng);
  return StructureConstants<double>::unimodular(a, b, c);
}

inline Vec3<double> random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  return normalized(vec3(nd(rng), nd(rng), nd(rng)));
}

inline Mat3<double> random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  auto a1 = random_unit(rng);
  auto a2 = vec3(nd(rng), nd(rng), nd(rng));
  a2 = normalized(a2 - a1 * dot(a1, a2));
  auto a3 = cross(a1, a2);
  Mat3<double> Q;
  for (std::size_t i = 0; i < 3; ++i) {
    Q(i, 0) = a1(i);
    Q(i, 1) = a2(i);
    Q(i, 2) = a3(i);
  }
  return Q;
}

/// A valid algebra in a random orthonormal frame: unimodular on even n,
/// a semidirect product R x R^2 on odd n.
inline StructureConstants<double> random_algebra(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  StructureConstants<double> s;
  if (n % 2 == 0) {
    s = StructureConstants<double>::unimodular(nd(rng), nd(rng), nd(rng));
  } else {
    s.set_bracket(2, 0, 0, nd(rng));
    s.set_bracket(2, 0, 1, nd(rng));
    s.set_bracket(2, 1, 0, nd(rng));
    s.set_bracket(2, 1, 1, nd(rng));
  }
  return s.rotated(random_rotation(rng));
}

}  // namespace hvf::fixtures
