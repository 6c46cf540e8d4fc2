#pragma once

// Built-in models with their expected-facts sheets.
//
// Each fact is a closure that runs the engine and compares with a stored
// value. Provenance records where the expected value comes from: quoted in the
// published example, trivially true, or derived here by hand.

#include "hvf/chart_backend.hpp"
#include "hvf/classifier.hpp"
#include "hvf/harmonic_finder.hpp"

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hvf {

class UnknownModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Provenance { Published, Trivial, Derived };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Published: return "published";
    case Provenance::Trivial: return "trivial";
    case Provenance::Derived: return "derived";
  }
  return "?";
}

enum class ModelKind { Frame, Chart, Both };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Frame: return "frame";
    case ModelKind::Chart: return "chart";
    case ModelKind::Both: return "both";
  }
  return "?";
}

struct FactOutcome {
  bool pass = false;
  double deviation = 0.0;
  std::string detail;
};

struct CatalogEntry;

struct Fact {
  std::string name;
  std::string statement;
  Provenance provenance = Provenance::Derived;
  std::function<FactOutcome(const CatalogEntry&)> check;
};

using CatalogParams = std::map<std::string, std::string>;

struct CatalogEntry {
  std::string name;
  ModelKind kind = ModelKind::Frame;
  CatalogParams params;  // normalized echo of the constructor parameters
  std::optional<StructureConstants<Rational>> exact_brackets;
  StructureConstants<double> float_brackets;  // for chart-only entries: the comparison model
  std::optional<ChartModel> chart;
  std::size_t default_field = 2;
  std::vector<Fact> facts;

  FrameModel<double> float_model() const { return FrameModel<double>::build(float_brackets, name); }
  std::optional<FrameModel<Rational>> exact_model() const {
    if (!exact_brackets) return std::nullopt;
    return FrameModel<Rational>::build(*exact_brackets, name);
  }
  bool has_frame() const { return kind != ModelKind::Chart; }
};

namespace detail {

inline FactOutcome outcome(double dev, double bound, std::string detail = {}) {
  return FactOutcome{dev <= bound, dev, std::move(detail)};
}

inline FactOutcome exact_outcome(const Rational& dev, std::string detail = {}) {
  return FactOutcome{dev == 0, to_double(dev), std::move(detail)};
}

inline FactOutcome flag_outcome(bool ok, std::string detail) {
  return FactOutcome{ok, ok ? 0.0 : 1.0, std::move(detail)};
}

inline Rational param_rational(const CatalogParams& p, const std::string& key, const Rational& dflt) {
  auto it = p.find(key);
  if (it == p.end()) return dflt;
  try {
    return parse_rational(it->second);
  } catch (const std::exception& e) {
    throw std::invalid_argument("parameter '" + key + "': " + e.what());
  }
}

inline std::array<std::array<long, 2>, 2> param_matrix(const CatalogParams& p, const std::string& key) {
  std::array<std::array<long, 2>, 2> A{{{2, 1}, {1, 1}}};
  auto it = p.find(key);
  if (it == p.end()) return A;
  // "a,b;c,d" or "[[a,b],[c,d]]"
  std::string s;
  for (char ch : it->second)
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '-' || ch == ',' || ch == ';') s.push_back(ch);
  for (auto& ch : s)
    if (ch == ';') ch = ',';
  std::vector<long> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) v.push_back(std::stol(tok));
  if (v.size() != 4) throw std::invalid_argument("parameter '" + key + "' must be a 2x2 integer matrix");
  A = {{{v[0], v[1]}, {v[2], v[3]}}};
  return A;
}

inline std::string matrix_text(const std::array<std::array<long, 2>, 2>& A) {
  return "[[" + std::to_string(A[0][0]) + "," + std::to_string(A[0][1]) + "],[" + std::to_string(A[1][0]) + "," +
         std::to_string(A[1][1]) + "]]";
}

inline void require_known(const CatalogParams& p, std::initializer_list<std::string_view> keys,
                          const std::string& model) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (auto key : keys) ok = ok || k == key;
    if (!ok) throw std::invalid_argument("unknown parameter '" + k + "' for model '" + model + "'");
  }
}

/// Expected Ricci of the unimodular model in its Milnor frame.
template <class T>
Mat3<T> unimodular_ricci(const T& a, const T& b, const T& c) {
  T h = T(-1) / T(2);
  return diag3<T>(h * (a + b - c) * (a + b + c), h * (a - b - c) * (a + b - c), h * (a + b + c) * (-a + b + c));
}

/// The six quoted connection coefficients <nabla_{e_i} e_j, e_k>, as (i, j, k, value).
template <class T>
std::vector<std::tuple<int, int, int, T>> unimodular_connection(const T& a, const T& b, const T& c) {
  return {{2, 0, 1, (c - a - b) / 2}, {2, 1, 0, (a + b - c) / 2}, {0, 2, 1, (b - a + c) / 2},
          {1, 2, 0, (a + b + c) / 2}, {1, 0, 2, (-a - b - c) / 2}, {0, 1, 2, (a - b - c) / 2}};
}

}  // namespace detail

inline CatalogEntry make_unimodular_entry(const Rational& a, const Rational& b, const Rational& c,
                                          std::string name = "unimodular") {
  CatalogEntry e;
  e.name = std::move(name);
  e.kind = ModelKind::Frame;
  e.params = {{"alpha", a.str()}, {"beta", b.str()}, {"gamma", c.str()}};
  e.exact_brackets = StructureConstants<Rational>::unimodular(a, b, c);
  e.float_brackets = e.exact_brackets->cast<double>();
  e.facts.push_back({"ricci_closed_form", "Ric = -1/2 diag((a+b-c)(a+b+c), (a-b-c)(a+b-c), (a+b+c)(-a+b+c))",
                     Provenance::Published, [a, b, c](const CatalogEntry& en) {
                       auto m = *en.exact_model();
                       return detail::exact_outcome((m.curv.ricci - detail::unimodular_ricci(a, b, c)).max_abs());
                     }});
  e.facts.push_back({"connection_table", "the six quoted nabla_{e_i} e_j of the Milnor frame", Provenance::Published,
                     [a, b, c](const CatalogEntry& en) {
                       auto m = *en.exact_model();
                       Rational worst(0);
                       for (auto [i, j, k, v] : detail::unimodular_connection(a, b, c))
                         worst = std::max(worst, abs_of(Rational(m.connection.gamma(i, j, k) - v)));
                       return detail::exact_outcome(worst);
                     }});
  e.facts.push_back({"phi_e3", "phi of e3 on (e1, e2) is -1/2 [[0, a+b+c], [-a+b+c, 0]]", Provenance::Published,
                     [a, b, c](const CatalogEntry& en) {
                       auto m = *en.exact_model();
                       auto s = shape_operator(m.connection, basis_vector<Rational>(2));
                       Rational h(-1, 2);
                       Rational d = std::max({abs_of(s.matrix(0, 0)), abs_of(s.matrix(1, 1)),
                                              abs_of(Rational(s.matrix(0, 1) - h * (a + b + c))),
                                              abs_of(Rational(s.matrix(1, 0) - h * (-a + b + c)))});
                       return detail::exact_outcome(d);
                     }});
  e.facts.push_back({"axes_harmonic", "e1, e2, e3 are harmonic with geodesic integral curves", Provenance::Published,
                     [](const CatalogEntry& en) {
                       auto m = *en.exact_model();
                       Rational worst(0);
                       bool geo = true;
                       for (std::size_t k = 0; k < 3; ++k) {
                         auto ctx = make_field_context(m, basis_vector<Rational>(k));
                         worst = std::max(worst, harmonic_residuals(ctx).unit_harmonic);
                         geo = geo && ctx.phi.totally_geodesic;
                       }
                       auto o = detail::exact_outcome(worst);
                       o.pass = o.pass && geo;
                       return o;
                     }});
  e.facts.push_back({"laplacian_e3", "nabla^* nabla e3 = ((a+b+c)^2 + (a-b-c)^2)/4 e3", Provenance::Published,
                     [a, b, c](const CatalogEntry& en) {
                       auto m = *en.exact_model();
                       auto lap = rough_laplacian_field(m.connection, basis_vector<Rational>(2));
                       Rational expect = ((a + b + c) * (a + b + c) + (a - b - c) * (a - b - c)) / 4;
                       return detail::exact_outcome((lap - basis_vector<Rational>(2) * expect).max_abs());
                     }});
  return e;
}

inline CatalogEntry make_hopf_entry() {
  CatalogEntry e = make_unimodular_entry(2, -2, 2, "hopf");
  e.params.clear();
  e.facts.push_back({"ricci_2", "Ric = 2 Id", Provenance::Published, [](const CatalogEntry& en) {
                       auto m = *en.exact_model();
                       return detail::exact_outcome((m.curv.ricci - identity3<Rational>() * Rational(2)).max_abs());
                     }});
  e.facts.push_back({"norm_phi", "|phi|^2 = 2 for e3", Provenance::Derived, [](const CatalogEntry& en) {
                       auto ctx = make_field_context(*en.exact_model(), basis_vector<Rational>(2));
                       return detail::exact_outcome(abs_of(Rational(ctx.inv.norm2_phi - 2)));
                     }});
  e.facts.push_back({"killing", "e3 is Killing and satisfies Kostant's formula", Provenance::Published,
                     [](const CatalogEntry& en) {
                       auto ctx = make_field_context(*en.exact_model(), basis_vector<Rational>(2));
                       auto k = killing_and_kostant(ctx);
                       return detail::exact_outcome(std::max(k.killing_residual, k.kostant_residual));
                     }});
  e.facts.push_back({"classification", "e3 classifies as KillingSasakianRescale with b = 1", Provenance::Derived,
                     [](const CatalogEntry& en) {
                       auto r = classify(*en.exact_model(), basis_vector<Rational>(2));
                       bool ok = r.kind == FieldCase::KillingSasakianRescale && r.b == 1;
                       return detail::flag_outcome(ok, std::string(to_string(r.kind)) + ", b = " + r.b.str());
                     }});
  return e;
}

inline CatalogEntry make_flat_torus_entry(const Rational& a) {
  if (a == 0) throw std::invalid_argument("flat-torus needs a != 0");
  CatalogEntry e = make_unimodular_entry(a, -a, 0, "flat-torus");
  e.kind = ModelKind::Both;
  e.params = {{"a", a.str()}};
  e.chart = flat_torus_chart(to_double(a));
  e.facts.push_back({"flat", "Ric = 0", Provenance::Published, [](const CatalogEntry& en) {
                       return detail::exact_outcome(en.exact_model()->curv.ricci.max_abs());
                     }});
  e.facts.push_back({"e1_parallel", "e1 is parallel", Provenance::Published, [](const CatalogEntry& en) {
                       auto s = shape_operator(en.exact_model()->connection, basis_vector<Rational>(0));
                       return detail::exact_outcome(s.matrix.max_abs());
                     }});
  e.facts.push_back({"chart_brackets", "the rotating chart frame has [e1,e2] = a e3, [e1,e3] = -a e2, [e2,e3] = 0",
                     Provenance::Derived, [](const CatalogEntry& en) {
                       auto cv = cross_validate(*en.chart, en.float_model(), grid_points(vec3(0.3, 0.2, 0.1), 0.25),
                                                basis_vector<double>(2));
                       return detail::outcome(std::max(cv.max_structure_dev, cv.max_ricci_dev), 1e-5);
                     }});
  return e;
}

inline CatalogEntry make_hyperbolic_torus_entry(const std::array<std::array<long, 2>, 2>& A) {
  const double beta = anosov_beta(A);
  const double lb = std::log(beta);
  CatalogEntry e;
  e.name = "hyperbolic-torus";
  e.kind = ModelKind::Both;
  e.params = {{"A", detail::matrix_text(A)}};
  // [e1, e3] = ln(beta) e1, [e2, e3] = -ln(beta) e2
  e.float_brackets.set_bracket(0, 2, 0, lb);
  e.float_brackets.set_bracket(1, 2, 1, -lb);
  e.chart = hyperbolic_torus_chart(beta);
  const double tol = 1e-12;
  e.facts.push_back({"ricci", "Ric = diag(0, 0, -2 ln^2 beta)", Provenance::Published, [lb, tol](const CatalogEntry& en) {
                       auto m = en.float_model();
                       return detail::outcome((m.curv.ricci - diag3(0.0, 0.0, -2 * lb * lb)).max_abs(), tol);
                     }});
  e.facts.push_back({"phi_e3", "phi of e3 on (e1, e2) is diag(-ln beta, ln beta)", Provenance::Published,
                     [lb, tol](const CatalogEntry& en) {
                       auto s = shape_operator(en.float_model().connection, basis_vector<double>(2));
                       double d = std::max({std::abs(s.horizontal[0][0] + lb), std::abs(s.horizontal[1][1] - lb),
                                            std::abs(s.horizontal[0][1]), std::abs(s.horizontal[1][0])});
                       return detail::outcome(d, tol);
                     }});
  e.facts.push_back({"connection_table", "nabla_{e1}e1 = -ln(beta) e3, nabla_{e1}e3 = ln(beta) e1, "
                                         "nabla_{e2}e2 = ln(beta) e3, nabla_{e2}e3 = -ln(beta) e2, all others 0",
                     Provenance::Published, [lb, tol](const CatalogEntry& en) {
                       Tensor<double, 3> expect;
                       expect(0, 0, 2) = -lb;
                       expect(0, 2, 0) = lb;
                       expect(1, 1, 2) = lb;
                       expect(1, 2, 1) = -lb;
                       return detail::outcome((en.float_model().connection.gamma - expect).max_abs(), tol);
                     }});
  e.facts.push_back({"e3_harmonic", "e3 is harmonic with geodesic integral curves and is not Killing",
                     Provenance::Published, [tol](const CatalogEntry& en) {
                       auto ctx = make_field_context(en.float_model(), basis_vector<double>(2));
                       auto h = harmonic_residuals(ctx);
                       auto k = killing_and_kostant(ctx);
                       auto o = detail::outcome(h.unit_harmonic, tol);
                       o.pass = o.pass && h.totally_geodesic && !k.killing;
                       return o;
                     }});
  e.facts.push_back({"e1_harmonic", "e1 is harmonic, not geodesic, and phi of e1 vanishes on its horizontal plane",
                     Provenance::Published, [tol](const CatalogEntry& en) {
                       auto ctx = make_field_context(en.float_model(), basis_vector<double>(0));
                       auto h = harmonic_residuals(ctx);
                       double horiz = 0.0;
                       for (const auto& row : ctx.phi.horizontal)
                         for (double v : row) horiz = std::max(horiz, std::abs(v));
                       auto o = detail::outcome(std::max(h.unit_harmonic, horiz), tol);
                       o.pass = o.pass && !h.totally_geodesic;
                       return o;
                     }});
  e.facts.push_back({"chart_ricci", "the chart reproduces the frame Ricci on a 27-point grid (h = 1e-3)",
                     Provenance::Derived, [](const CatalogEntry& en) {
                       auto cv = cross_validate(*en.chart, en.float_model(), grid_points(vec3(0.3, 0.4, 0.2), 0.25),
                                                basis_vector<double>(2), 1e-3);
                       return detail::outcome(std::max(cv.max_ricci_dev, cv.max_structure_dev), 1e-5);
                     }});
  e.facts.push_back({"classification", "e3 classifies as NonKilling_b_zero with Scal = lambda", Provenance::Derived,
                     [](const CatalogEntry& en) {
                       auto r = classify(en.float_model(), basis_vector<double>(2), Tolerance{1e-10, 1e-12});
                       bool ok = r.kind == FieldCase::NonKilling_b_zero && r.verified(Tolerance{1e-10, 1e-12});
                       return detail::flag_outcome(ok, std::string(to_string(r.kind)));
                     }});
  return e;
}

inline CatalogEntry make_hyperbolic_space_entry() {
  CatalogEntry e;
  e.name = "hyperbolic-space";
  e.kind = ModelKind::Frame;
  StructureConstants<Rational> s;
  // [e1, e3] = e1, [e2, e3] = e2: e3 is the unit normal of the horospheres pointing
  // away from their centre, so phi = -Id on H and trace(phi) = -2
  s.set_bracket(0, 2, 0, 1);
  s.set_bracket(1, 2, 1, 1);
  e.exact_brackets = s;
  e.float_brackets = s.cast<double>();
  e.facts.push_back({"ricci", "Ric = -2 Id", Provenance::Derived, [](const CatalogEntry& en) {
                       auto m = *en.exact_model();
                       return detail::exact_outcome((m.curv.ricci + identity3<Rational>() * Rational(2)).max_abs());
                     }});
  e.facts.push_back({"e3", "e3 is harmonic and geodesic with trace(phi) = -2", Provenance::Derived,
                     [](const CatalogEntry& en) {
                       auto ctx = make_field_context(*en.exact_model(), basis_vector<Rational>(2));
                       auto h = harmonic_residuals(ctx);
                       auto o = detail::exact_outcome(std::max(h.unit_harmonic, abs_of(Rational(ctx.inv.trace_phi + 2))));
                       o.pass = o.pass && h.totally_geodesic;
                       return o;
                     }});
  e.facts.push_back({"compact_obstruction", "e3 has nonzero divergence, so it cannot live on a compact quotient",
                     Provenance::Derived, [](const CatalogEntry& en) {
                       auto r = classify(*en.exact_model(), basis_vector<Rational>(2));
                       return detail::flag_outcome(r.compact_obstruction, r.reason);
                     }});
  return e;
}

inline CatalogEntry make_round_sphere_entry() {
  CatalogEntry e;
  e.name = "round-sphere";
  e.kind = ModelKind::Chart;
  e.chart = round_sphere_chart();
  e.exact_brackets = StructureConstants<Rational>::unimodular(2, -2, 2);
  e.float_brackets = e.exact_brackets->cast<double>();
  e.facts.push_back({"chart_ricci", "stereographic chart has Ric = 2 Id, matching the (2,-2,2) frame model",
                     Provenance::Derived, [](const CatalogEntry& en) {
                       auto cv = cross_validate(*en.chart, en.float_model(), grid_points(vec3(0.3, 0.4, 0.2), 0.25),
                                                basis_vector<double>(2), 1e-3);
                       return detail::outcome(cv.max_ricci_dev, 1e-5);
                     }});
  return e;
}

inline std::vector<std::string> catalog_names() {
  return {"hopf", "hyperbolic-torus", "unimodular", "flat-torus", "hyperbolic-space", "round-sphere"};
}

/// Looks up a model by name. Parameters are strings: rationals as "p/q" or
/// decimals, matrices as "a,b;c,d".
inline CatalogEntry catalog_get(const std::string& name, const CatalogParams& params = {}) {
  if (name == "hopf") {
    detail::require_known(params, {}, name);
    return make_hopf_entry();
  }
  if (name == "hyperbolic-torus") {
    detail::require_known(params, {"A"}, name);
    return make_hyperbolic_torus_entry(detail::param_matrix(params, "A"));
  }
  if (name == "unimodular") {
    detail::require_known(params, {"alpha", "beta", "gamma"}, name);
    return make_unimodular_entry(detail::param_rational(params, "alpha", 1), detail::param_rational(params, "beta", 2),
                                 detail::param_rational(params, "gamma", 3));
  }
  if (name == "flat-torus") {
    detail::require_known(params, {"a"}, name);
    return make_flat_torus_entry(detail::param_rational(params, "a", 1));
  }
  if (name == "hyperbolic-space") {
    detail::require_known(params, {}, name);
    return make_hyperbolic_space_entry();
  }
  if (name == "round-sphere") {
    detail::require_known(params, {}, name);
    return make_round_sphere_entry();
  }
  throw UnknownModel("unknown catalog model '" + name + "'");
}

struct FactResult {
  std::string name;
  std::string statement;
  Provenance provenance;
  FactOutcome outcome;
};

inline std::vector<FactResult> verify_facts(const CatalogEntry& e) {
  std::vector<FactResult> out;
  for (const auto& f : e.facts) {
    FactOutcome o;
    try {
      o = f.check(e);
    } catch (const std::exception& ex) {
      o = FactOutcome{false, 0.0, std::string("error: ") + ex.what()};
    }
    out.push_back({f.name, f.statement, f.provenance, o});
  }
  return out;
}

}  // namespace hvf
