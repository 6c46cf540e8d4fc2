#pragma once

// Search for left-invariant harmonic unit directions of a frame model.
//
// The objective is F(zeta) = |P_perp (nabla^* nabla zeta)|^2 on the unit sphere.
// nabla^* nabla zeta is linear in the constant components of zeta, so F is
// evaluated through a 3x3 matrix built once per model; the gradient is taken by
// central differences so the search does not reuse the algebra it is checking.
// Zeros of F are the real eigenvectors of that matrix, so solutions are either
// isolated lines or whole circles/spheres inside a repeated eigenspace.

#include "hvf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

namespace hvf {

struct FinderConfig {
  int n_starts = 64;
  int max_iters = 500;
  double step = 0.1;
  double converge_tol = 1e-12;
  double dedupe_tol = 1e-6;
  bool newton_polish = true;
  double fd_step = 1e-6;
  int workers = 1;

  void validate() const {
    if (n_starts <= 0 || max_iters <= 0 || !(step > 0) || !(converge_tol > 0) || !(dedupe_tol > 0) ||
        !(fd_step > 0) || workers <= 0)
      throw std::invalid_argument("finder config values must be positive");
  }
};

struct DirectionFlags {
  bool harmonic = false;
  bool totally_geodesic = false;
  bool killing = false;
  bool divergence_free = false;
};

struct CriticalDirection {
  Vec3<double> direction;
  double residual = 0.0;  // unit_harmonic from field_analysis
  DirectionFlags flags;
  int basin_count = 0;
  int first_seed = 0;
  bool frame_axis = false;  // +-e_k; anything else is an extra root
};

struct SeedOutcome {
  Vec3<double> start;
  Vec3<double> end;
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// A continuum of solutions: the unit sphere of a 2- or 3-dimensional eigenspace.
struct SolutionFamily {
  double energy = 0.0;  // common |nabla zeta|^2 of the members
  int dimension = 2;    // 2 = great circle, 3 = every direction
  Vec3<double> normal;  // plane normal of a circle
  int sample_count = 0;
  std::vector<CriticalDirection> axis_members;  // frame axes on the family, re-verified
};

struct FinderReport {
  std::vector<CriticalDirection> directions;  // isolated classes
  std::vector<SolutionFamily> families;
  std::vector<SeedOutcome> seeds;
  int seeds_converged = 0;
  int seeds_dropped = 0;
  bool all_directions = false;     // every direction is harmonic
  bool continuous_family = false;  // circles of solutions
  int raw_classes = 0;             // classes before grouping into families
};

/// Matrix of zeta -> nabla^* nabla zeta for constant-component fields.
template <class T>
Mat3<T> rough_laplacian_matrix(const ConnectionTable<T>& g) {
  Mat3<T> m;
  for (std::size_t k = 0; k < 3; ++k) {
    Vec3<T> col = rough_laplacian_field(g, basis_vector<T>(k));
    for (std::size_t i = 0; i < 3; ++i) m(i, k) = col(i);
  }
  return m;
}

template <class T>
Vec3<T> projected_laplacian(const Mat3<T>& lap, const Vec3<T>& zeta) {
  Vec3<T> v = matvec(lap, zeta);
  return v - zeta * dot(v, zeta);
}

/// F(zeta) = |P_perp nabla^* nabla zeta|^2.
template <class T>
T residual_objective(const FrameModel<T>& model, const Vec3<T>& zeta, const Tolerance& tol = {}) {
  make_unit_field(zeta, tol);
  return projected_laplacian(rough_laplacian_matrix(model.connection), zeta).norm2();
}

/// Energy density |nabla zeta|^2 / 2 (without the constant term), straight from the connection.
template <class T>
T energy_density(const ConnectionTable<T>& g, const Vec3<T>& zeta) {
  T e(0);
  for (std::size_t a = 0; a < 3; ++a) e += g.covariant(basis_vector<T>(a), zeta).norm2();
  return e / 2;
}

namespace detail {

inline void tangent_basis(const Vec3<double>& z, Vec3<double>& t1, Vec3<double>& t2) {
  auto f = adapted_frame(z);
  double n = std::sqrt(f.norm2);
  t1 = f.u * (1.0 / n);
  t2 = f.v * (1.0 / n);
}

inline Vec3<double> retract(const Vec3<double>& z, const Vec3<double>& t) {
  Vec3<double> v = z + t;
  return v * (1.0 / std::sqrt(dot(v, v)));
}

inline Vec3<double> along_circle(const Vec3<double>& z, const Vec3<double>& t, double theta) {
  return z * std::cos(theta) + t * std::sin(theta);
}

}  // namespace detail

/// Second evaluation of F: on a unimodular group the sphere gradient of the
/// energy density is P_perp nabla^* nabla zeta, so F is the squared norm of the
/// derivatives of the energy along two orthogonal great circles.
inline double residual_objective_dual(const FrameModel<double>& model, const Vec3<double>& zeta,
                                      double h = 1e-4) {
  auto mt = milnor_type(model.brackets);
  if (mt.type == MilnorType::NotLie)
    throw std::invalid_argument("energy path needs a unimodular model: " + mt.note);
  Vec3<double> t1, t2;
  detail::tangent_basis(zeta, t1, t2);
  double f = 0.0;
  for (const auto& t : {t1, t2}) {
    double ep = energy_density(model.connection, detail::along_circle(zeta, t, h));
    double em = energy_density(model.connection, detail::along_circle(zeta, t, -h));
    double d = (ep - em) / (2 * h);
    f += d * d;
  }
  return f;
}

namespace detail {

struct SeedRunner {
  const Mat3<double>& lap;
  const FinderConfig& cfg;

  double objective(const Vec3<double>& z) const { return projected_laplacian(lap, z).norm2(); }

  // residual components along a fixed tangent pair at the chart center
  std::array<double, 2> chart_residual(const Vec3<double>& center, const Vec3<double>& t1,
                                       const Vec3<double>& t2, double u1, double u2) const {
    Vec3<double> z = retract(center, t1 * u1 + t2 * u2);
    Vec3<double> r = projected_laplacian(lap, z);
    return {dot(r, t1), dot(r, t2)};
  }

  SeedOutcome run(const Vec3<double>& seed) const {
    SeedOutcome out;
    out.start = seed;
    Vec3<double> z = seed;
    double F = objective(z);
    double alpha = cfg.step;
    const double h = cfg.fd_step;
    const double target = cfg.converge_tol * cfg.converge_tol;
    const double switch_level = 1e-8;
    int it = 0;
    for (; it < cfg.max_iters && F > target; ++it) {
      if (cfg.newton_polish && F < switch_level) break;
      Vec3<double> t1, t2;
      tangent_basis(z, t1, t2);
      double g1 = (objective(retract(z, t1 * h)) - objective(retract(z, t1 * -h))) / (2 * h);
      double g2 = (objective(retract(z, t2 * h)) - objective(retract(z, t2 * -h))) / (2 * h);
      Vec3<double> grad = t1 * g1 + t2 * g2;
      double gn2 = g1 * g1 + g2 * g2;
      if (gn2 == 0.0) break;
      bool moved = false;
      while (alpha > 1e-300) {
        Vec3<double> zn = retract(z, grad * -alpha);
        double Fn = objective(zn);
        if (Fn <= F - 1e-4 * alpha * gn2) {
          z = zn;
          F = Fn;
          moved = true;
          alpha = std::min(alpha * 2, 1e6);
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }
    if (cfg.newton_polish) {
      for (int k = 0; k < 30; ++k, ++it) {
        Vec3<double> t1, t2;
        tangent_basis(z, t1, t2);
        auto r0 = chart_residual(z, t1, t2, 0, 0);
        if (std::max(std::abs(r0[0]), std::abs(r0[1])) <= 0.1 * cfg.converge_tol) break;
        auto a = chart_residual(z, t1, t2, h, 0), b = chart_residual(z, t1, t2, -h, 0);
        auto c = chart_residual(z, t1, t2, 0, h), d = chart_residual(z, t1, t2, 0, -h);
        double j11 = (a[0] - b[0]) / (2 * h), j21 = (a[1] - b[1]) / (2 * h);
        double j12 = (c[0] - d[0]) / (2 * h), j22 = (c[1] - d[1]) / (2 * h);
        double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) break;
        double du1 = -(j22 * r0[0] - j12 * r0[1]) / det;
        double du2 = -(-j21 * r0[0] + j11 * r0[1]) / det;
        Vec3<double> zn = retract(z, t1 * du1 + t2 * du2);
        double Fn = objective(zn);
        if (!(Fn < objective(z))) break;
        z = zn;
      }
      F = objective(z);
    }
    out.end = z;
    out.objective = F;
    out.iterations = it;
    return out;
  }
};

inline Vec3<double> canonical_sign(Vec3<double> v) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::abs(v(i)) > 1e-9) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return v;
}

/// Angle between the lines through a and b.
inline double line_angle(const Vec3<double>& a, const Vec3<double>& b) {
  double c = std::min(1.0, std::abs(dot(a, b)));
  double s = std::sqrt(cross(a, b).norm2());
  return std::atan2(s, c);
}

}  // namespace detail

/// Fibonacci-sphere seeds, deterministic in n.
inline std::vector<Vec3<double>> fibonacci_seeds(int n) {
  std::vector<Vec3<double>> pts;
  pts.reserve(static_cast<std::size_t>(n));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double y = 1.0 - 2.0 * (i + 0.5) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    double th = golden * i;
    pts.push_back(vec3(r * std::cos(th), y, r * std::sin(th)));
  }
  return pts;
}

namespace detail {

inline CriticalDirection verified_direction(const FrameModel<double>& model, const Vec3<double>& d) {
  auto ctx = make_field_context(model, d, Tolerance{1e-9, 1e-12});
  CriticalDirection c;
  c.direction = d;
  c.residual = harmonic_residuals(ctx).unit_harmonic;
  auto flags = field_flags(ctx);
  c.flags.harmonic = flags.harmonic;
  c.flags.totally_geodesic = flags.totally_geodesic;
  c.flags.killing = flags.killing;
  c.flags.divergence_free = flags.divergence_free;
  return c;
}

}  // namespace detail

/// Members of one eigenspace share the eigenvalue, which is the energy
/// |nabla zeta|^2 of the unit field. Classes are grouped by energy; singletons
/// are isolated roots, larger groups are circles or the whole sphere.
inline void group_families(const FrameModel<double>& model, const FinderConfig& cfg, FinderReport& rep) {
  if (rep.directions.size() <= 1) return;
  const double etol = 1e-8 * std::max(1.0, model.scale());
  const auto& g = model.connection;
  std::vector<double> energy;
  for (const auto& c : rep.directions) energy.push_back(2 * energy_density(g, c.direction));
  std::vector<int> group(rep.directions.size(), -1);
  int ngroups = 0;
  for (std::size_t i = 0; i < rep.directions.size(); ++i) {
    if (group[i] >= 0) continue;
    group[i] = ngroups;
    for (std::size_t j = i + 1; j < rep.directions.size(); ++j)
      if (group[j] < 0 && std::abs(energy[i] - energy[j]) <= etol) group[j] = ngroups;
    ++ngroups;
  }
  std::vector<CriticalDirection> isolated;
  for (int gi = 0; gi < ngroups; ++gi) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < group.size(); ++i)
      if (group[i] == gi) members.push_back(i);
    if (members.size() == 1) {
      isolated.push_back(rep.directions[members[0]]);
      continue;
    }
    SolutionFamily fam;
    fam.energy = energy[members[0]];
    fam.sample_count = static_cast<int>(members.size());
    double best = -1.0;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        auto cr = cross(rep.directions[members[a]].direction, rep.directions[members[b]].direction);
        double n2 = cr.norm2();
        if (n2 > best) {
          best = n2;
          fam.normal = cr * (1.0 / std::sqrt(n2));
        }
      }
    fam.normal = detail::canonical_sign(fam.normal);
    fam.dimension = 2;
    for (auto m : members)
      if (std::abs(dot(fam.normal, rep.directions[m].direction)) > 1e3 * cfg.dedupe_tol) fam.dimension = 3;
    for (std::size_t k = 0; k < 3; ++k) {
      auto e = basis_vector<double>(k);
      if (fam.dimension == 3 || std::abs(dot(fam.normal, e)) <= cfg.dedupe_tol) {
        auto c = detail::verified_direction(model, e);
        c.frame_axis = true;
        fam.axis_members.push_back(c);
      }
    }
    if (fam.dimension == 3)
      rep.all_directions = true;
    else
      rep.continuous_family = true;
    rep.families.push_back(std::move(fam));
  }
  rep.directions = std::move(isolated);
}

inline FinderReport find_all(const FrameModel<double>& model, const FinderConfig& cfg = {}) {
  cfg.validate();
  const Mat3<double> lap = rough_laplacian_matrix(model.connection);
  const auto seeds = fibonacci_seeds(cfg.n_starts);
  FinderReport rep;
  rep.seeds.resize(seeds.size());

  detail::SeedRunner runner{lap, cfg};
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < seeds.size(); i += stride) rep.seeds[i] = runner.run(seeds[i]);
  };
  std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), seeds.size());
  if (nw <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < nw; ++w) pool.emplace_back(work, w, nw);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < seeds.size(); ++i) {
    auto& s = rep.seeds[i];
    s.residual = harmonic_residuals(make_field_context(model, s.end, Tolerance{1e-9, 1e-12})).unit_harmonic;
    s.converged = s.residual <= cfg.converge_tol * std::max(1.0, model.scale());
    if (!s.converged) {
      ++rep.seeds_dropped;
      continue;
    }
    ++rep.seeds_converged;
    Vec3<double> d = detail::canonical_sign(s.end);
    bool merged = false;
    for (auto& c : rep.directions) {
      if (detail::line_angle(c.direction, d) <= cfg.dedupe_tol) {
        ++c.basin_count;
        merged = true;
        break;
      }
    }
    if (merged) continue;
    CriticalDirection c = detail::verified_direction(model, d);
    c.basin_count = 1;
    c.first_seed = static_cast<int>(i);
    for (std::size_t k = 0; k < 3; ++k)
      if (detail::line_angle(d, basis_vector<double>(k)) <= cfg.dedupe_tol) c.frame_axis = true;
    rep.directions.push_back(c);
  }

  rep.raw_classes = static_cast<int>(rep.directions.size());
  group_families(model, cfg, rep);
  return rep;
}

template <class T>
FinderReport find_all(const FrameModel<T>& model, const FinderConfig& cfg = {}) {
  auto m = FrameModel<double>::build(model.brackets.template cast<double>(), model.name);
  return find_all(m, cfg);
}

}  // namespace hvf
