#pragma once

// Run configuration, report assembly and the Markdown emitter.
//
// Reports are nlohmann::ordered_json so that key order, and therefore the
// serialized bytes, depend only on the configuration. Floats are written as
// "%.17g" strings and rationals as "p/q" strings.

#include "hvf/catalog.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <random>
#include <thread>

namespace hvf {

using Json = nlohmann::ordered_json;

/// Schema violation in a run configuration; `path` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class RunMode { Analyze, Classify, Find, ChartVerify, Sweep, Catalog };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Analyze: return "analyze";
    case RunMode::Classify: return "classify";
    case RunMode::Find: return "find";
    case RunMode::ChartVerify: return "chart-verify";
    case RunMode::Sweep: return "sweep";
    case RunMode::Catalog: return "catalog";
  }
  return "?";
}

inline RunMode parse_mode(const std::string& s) {
  for (auto m : {RunMode::Analyze, RunMode::Classify, RunMode::Find, RunMode::ChartVerify, RunMode::Sweep,
                 RunMode::Catalog})
    if (to_string(m) == s) return m;
  throw ConfigError("mode", "unknown mode '" + s + "'");
}

struct ModelSpec {
  std::string type = "catalog";  // unimodular | frame | catalog | chart
  std::array<std::string, 3> abc{"1", "2", "3"};
  std::vector<std::string> c;  // 27 entries, c[i][j][k] flattened
  std::string name;
  CatalogParams params;
};

struct FieldSpec {
  std::optional<std::size_t> axis = 2;
  std::array<std::string, 3> vector{"0", "0", "1"};
};

struct Tolerances {
  double algebraic = 1e-10;
  double fd = 1e-5;
  double fd_step = 1e-3;
};

struct OutputSpec {
  std::string json_path;
  std::string markdown_path;
};

struct SweepSpec {
  std::string kind = "random";  // random | grid
  int count = 100;
  std::uint64_t seed = 0;
  std::string lo = "-5";
  std::string hi = "5";
  int denominator = 4;              // random rationals are k / denominator
  std::vector<std::string> values;  // grid values for each of alpha, beta, gamma
};

struct RunConfig {
  RunMode mode = RunMode::Analyze;
  std::optional<ModelSpec> model;
  FieldSpec field;
  Tolerances tolerances;
  FinderConfig finder;
  OutputSpec output;
  SweepSpec sweep;
  std::string kernel = "auto";  // auto | exact | float
  int workers = 1;
};

struct Report {
  Json json;
  std::string markdown;
  bool pass = false;
};

// Serialization helpers

inline std::string num(double x) { return format_scalar(x); }
inline std::string num(const Rational& x) { return format_scalar(x); }

template <class T>
Json vec_json(const Vec3<T>& v) {
  Json a = Json::array();
  for (std::size_t i = 0; i < 3; ++i) a.push_back(num(v(i)));
  return a;
}

template <class T>
Json mat_json(const Mat3<T>& m) {
  Json a = Json::array();
  for (std::size_t i = 0; i < 3; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < 3; ++j) row.push_back(num(m(i, j)));
    a.push_back(row);
  }
  return a;
}

template <class T>
Json tensor3_json(const Tensor<T, 3>& t) {
  Json a = Json::array();
  for (std::size_t i = 0; i < 3; ++i) {
    Json m = Json::array();
    for (std::size_t j = 0; j < 3; ++j) {
      Json row = Json::array();
      for (std::size_t k = 0; k < 3; ++k) row.push_back(num(t(i, j, k)));
      m.push_back(row);
    }
    a.push_back(m);
  }
  return a;
}

/// Nonzero brackets as [i, j, k, value] with i < j, 1-based.
template <class T>
Json brackets_json(const StructureConstants<T>& s) {
  Json a = Json::array();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        if (s.c(i, j, k) != T(0)) a.push_back(Json::array({i + 1, j + 1, k + 1, num(s.c(i, j, k))}));
  return a;
}

// Config parsing

namespace detail {

inline std::string scalar_text(const Json& j, const std::string& path) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    try {
      (void)parse_rational(s);
    } catch (const std::exception& e) {
      throw ConfigError(path, e.what());
    }
    return s;
  }
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number_unsigned()) return std::to_string(j.get<unsigned long long>());
  if (j.is_number_float()) return j.dump();
  throw ConfigError(path, "expected a number or a numeric string");
}

template <class V>
V get_number(const Json& obj, const std::string& key, const std::string& path, V dflt) {
  if (!obj.contains(key)) return dflt;
  const auto& j = obj.at(key);
  if (!j.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return j.get<V>();
}

inline std::string get_string(const Json& obj, const std::string& key, const std::string& path,
                              std::string dflt = {}) {
  if (!obj.contains(key)) return dflt;
  const auto& j = obj.at(key);
  if (!j.is_string()) throw ConfigError(path + "." + key, "expected a string");
  return j.get<std::string>();
}

inline void check_keys(const Json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : keys) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(path + "." + it.key(), "unknown field");
  }
}

inline CatalogParams params_from_json(const Json& j, const std::string& path) {
  CatalogParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it->is_array()) {
      // 2x2 integer matrices
      std::string s;
      for (const auto& row : *it) {
        if (!row.is_array()) throw ConfigError(path + "." + it.key(), "expected a nested array");
        for (const auto& v : row) {
          if (!v.is_number_integer()) throw ConfigError(path + "." + it.key(), "expected integers");
          s += std::to_string(v.get<long long>()) + ",";
        }
      }
      p[it.key()] = s;
    } else {
      p[it.key()] = scalar_text(*it, path + "." + it.key());
    }
  }
  return p;
}

}  // namespace detail

inline ModelSpec parse_model(const Json& j, const std::string& path = "model") {
  detail::check_keys(j, path, {"type", "alpha", "beta", "gamma", "c", "name", "params"});
  ModelSpec m;
  m.type = detail::get_string(j, "type", path, "");
  if (m.type == "unimodular") {
    const char* keys[3] = {"alpha", "beta", "gamma"};
    for (int i = 0; i < 3; ++i) {
      if (!j.contains(keys[i])) throw ConfigError(path + "." + keys[i], "missing");
      m.abc[i] = detail::scalar_text(j.at(keys[i]), path + "." + keys[i]);
    }
  } else if (m.type == "frame") {
    if (!j.contains("c")) throw ConfigError(path + ".c", "missing");
    const auto& c = j.at("c");
    if (!c.is_array() || c.size() != 3) throw ConfigError(path + ".c", "expected a 3x3x3 array");
    for (std::size_t a = 0; a < 3; ++a) {
      if (!c[a].is_array() || c[a].size() != 3) throw ConfigError(path + ".c[" + std::to_string(a) + "]", "expected 3x3");
      for (std::size_t b = 0; b < 3; ++b) {
        std::string p = path + ".c[" + std::to_string(a) + "][" + std::to_string(b) + "]";
        if (!c[a][b].is_array() || c[a][b].size() != 3) throw ConfigError(p, "expected 3 entries");
        for (std::size_t k = 0; k < 3; ++k) m.c.push_back(detail::scalar_text(c[a][b][k], p + "[" + std::to_string(k) + "]"));
      }
    }
  } else if (m.type == "catalog" || m.type == "chart") {
    m.name = detail::get_string(j, "name", path);
    if (m.name.empty()) throw ConfigError(path + ".name", "missing");
    if (j.contains("params")) m.params = detail::params_from_json(j.at("params"), path + ".params");
  } else {
    throw ConfigError(path + ".type", "expected one of unimodular, frame, catalog, chart");
  }
  return m;
}

inline FieldSpec parse_field(const Json& j, const std::string& path = "field") {
  FieldSpec f;
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "e1") f.axis = 0;
    else if (s == "e2") f.axis = 1;
    else if (s == "e3") f.axis = 2;
    else throw ConfigError(path, "expected e1, e2, e3 or [x, y, z]");
    return f;
  }
  if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected e1, e2, e3 or [x, y, z]");
  f.axis.reset();
  for (std::size_t i = 0; i < 3; ++i) f.vector[i] = detail::scalar_text(j[i], path + "[" + std::to_string(i) + "]");
  bool zero = true;
  for (const auto& s : f.vector) zero = zero && parse_rational(s) == 0;
  if (zero) throw ConfigError(path, "field is the zero vector");
  return f;
}

/// "hopf", "unimodular:1,2,3", "catalog:hyperbolic-torus", or a JSON object.
inline ModelSpec parse_model_arg(const std::string& s) {
  if (!s.empty() && s.front() == '{') {
    Json j;
    try {
      j = Json::parse(s);
    } catch (const std::exception& e) {
      throw ConfigError("model", e.what());
    }
    return parse_model(j);
  }
  ModelSpec m;
  auto colon = s.find(':');
  std::string head = s.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (head == "unimodular" && !rest.empty()) {
    m.type = "unimodular";
    std::stringstream ss(rest);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
      if (i >= 3) throw ConfigError("model", "unimodular takes three values");
      try {
        (void)parse_rational(tok);
      } catch (const std::exception& e) {
        throw ConfigError("model", e.what());
      }
      m.abc[i++] = tok;
    }
    if (i != 3) throw ConfigError("model", "unimodular takes three values");
    return m;
  }
  if (head == "catalog" || head == "chart") {
    m.type = head;
    m.name = rest;
  } else {
    m.type = "catalog";
    m.name = s;
  }
  if (m.name.empty()) throw ConfigError("model", "missing model name");
  return m;
}

inline FieldSpec parse_field_arg(const std::string& s) {
  if (s == "e1" || s == "e2" || s == "e3") return parse_field(Json(s));
  std::string t = s;
  if (!t.empty() && t.front() != '[') t = "[" + t + "]";
  Json j;
  try {
    j = Json::parse(t);
  } catch (const std::exception&) {
    // allow rationals such as 3/5,4/5,0
    Json a = Json::array();
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) a.push_back(tok);
    j = a;
  }
  return parse_field(j);
}

inline RunConfig parse_config(const Json& j) {
  detail::check_keys(j, "config", {"mode", "model", "field", "tolerances", "finder", "output", "sweep", "kernel",
                                   "workers"});
  RunConfig cfg;
  if (j.contains("mode")) {
    if (!j.at("mode").is_string()) throw ConfigError("mode", "expected a string");
    cfg.mode = parse_mode(j.at("mode").get<std::string>());
  }
  if (j.contains("model")) cfg.model = parse_model(j.at("model"));
  if (j.contains("field")) cfg.field = parse_field(j.at("field"));
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    detail::check_keys(t, "tolerances", {"algebraic", "fd", "fd_step"});
    cfg.tolerances.algebraic = detail::get_number(t, "algebraic", "tolerances", cfg.tolerances.algebraic);
    cfg.tolerances.fd = detail::get_number(t, "fd", "tolerances", cfg.tolerances.fd);
    cfg.tolerances.fd_step = detail::get_number(t, "fd_step", "tolerances", cfg.tolerances.fd_step);
  }
  if (j.contains("finder")) {
    const auto& f = j.at("finder");
    detail::check_keys(f, "finder", {"n_starts", "max_iters", "step", "converge_tol", "dedupe_tol", "newton_polish",
                                     "fd_step"});
    auto& c = cfg.finder;
    c.n_starts = detail::get_number(f, "n_starts", "finder", c.n_starts);
    c.max_iters = detail::get_number(f, "max_iters", "finder", c.max_iters);
    c.step = detail::get_number(f, "step", "finder", c.step);
    c.converge_tol = detail::get_number(f, "converge_tol", "finder", c.converge_tol);
    c.dedupe_tol = detail::get_number(f, "dedupe_tol", "finder", c.dedupe_tol);
    c.fd_step = detail::get_number(f, "fd_step", "finder", c.fd_step);
    if (f.contains("newton_polish")) {
      if (!f.at("newton_polish").is_boolean()) throw ConfigError("finder.newton_polish", "expected a boolean");
      c.newton_polish = f.at("newton_polish").get<bool>();
    }
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::check_keys(o, "output", {"json_path", "markdown_path"});
    cfg.output.json_path = detail::get_string(o, "json_path", "output");
    cfg.output.markdown_path = detail::get_string(o, "markdown_path", "output");
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    detail::check_keys(s, "sweep", {"kind", "count", "seed", "range", "denominator", "values"});
    auto& w = cfg.sweep;
    w.kind = detail::get_string(s, "kind", "sweep", w.kind);
    if (w.kind != "random" && w.kind != "grid") throw ConfigError("sweep.kind", "expected random or grid");
    w.count = detail::get_number(s, "count", "sweep", w.count);
    w.seed = detail::get_number<std::uint64_t>(s, "seed", "sweep", w.seed);
    w.denominator = detail::get_number(s, "denominator", "sweep", w.denominator);
    if (s.contains("range")) {
      const auto& r = s.at("range");
      if (!r.is_array() || r.size() != 2) throw ConfigError("sweep.range", "expected [lo, hi]");
      w.lo = detail::scalar_text(r[0], "sweep.range[0]");
      w.hi = detail::scalar_text(r[1], "sweep.range[1]");
    }
    if (s.contains("values")) {
      const auto& v = s.at("values");
      if (!v.is_array() || v.empty()) throw ConfigError("sweep.values", "expected a nonempty array");
      for (std::size_t i = 0; i < v.size(); ++i)
        w.values.push_back(detail::scalar_text(v[i], "sweep.values[" + std::to_string(i) + "]"));
    }
  }
  cfg.kernel = detail::get_string(j, "kernel", "config", cfg.kernel);
  cfg.workers = detail::get_number(j, "workers", "config", cfg.workers);
  return cfg;
}

inline void validate_config(const RunConfig& cfg) {
  const auto& t = cfg.tolerances;
  if (!(t.algebraic > 0)) throw ConfigError("tolerances.algebraic", "must be positive");
  if (!(t.fd > 0)) throw ConfigError("tolerances.fd", "must be positive");
  if (!(t.fd_step > 0)) throw ConfigError("tolerances.fd_step", "must be positive");
  if (cfg.kernel != "auto" && cfg.kernel != "exact" && cfg.kernel != "float")
    throw ConfigError("kernel", "expected auto, exact or float");
  if (cfg.workers <= 0) throw ConfigError("workers", "must be positive");
  try {
    cfg.finder.validate();
  } catch (const std::exception& e) {
    throw ConfigError("finder", e.what());
  }
  const auto& s = cfg.sweep;
  if (s.count <= 0) throw ConfigError("sweep.count", "must be positive");
  if (s.denominator <= 0) throw ConfigError("sweep.denominator", "must be positive");
  if (parse_rational(s.lo) > parse_rational(s.hi)) throw ConfigError("sweep.range", "lo exceeds hi");
  bool needs_model = cfg.mode != RunMode::Sweep && cfg.mode != RunMode::Catalog;
  if (needs_model && !cfg.model) throw ConfigError("model", "missing");
}

// Model resolution

struct ResolvedModel {
  Json echo;
  std::optional<StructureConstants<Rational>> exact;
  StructureConstants<double> flt;
  std::optional<CatalogEntry> entry;
  bool frame = true;
};

inline ResolvedModel resolve_model(const ModelSpec& spec) {
  ResolvedModel r;
  r.echo["type"] = spec.type;
  if (spec.type == "unimodular") {
    Rational a = parse_rational(spec.abc[0]), b = parse_rational(spec.abc[1]), c = parse_rational(spec.abc[2]);
    r.echo["alpha"] = num(a);
    r.echo["beta"] = num(b);
    r.echo["gamma"] = num(c);
    r.entry = make_unimodular_entry(a, b, c);
    r.exact = r.entry->exact_brackets;
  } else if (spec.type == "frame") {
    StructureConstants<Rational> s;
    for (std::size_t n = 0; n < 27; ++n) s.c(n / 9, (n / 3) % 3, n % 3) = parse_rational(spec.c[n]);
    if (s.antisymmetry_defect() != 0)
      throw ConfigError("model.c", "structure constants are not antisymmetric in their first two indices");
    if (jacobi_residual(s) != 0) throw ConfigError("model.c", "brackets violate the Jacobi identity");
    r.exact = s;
  } else {
    try {
      r.entry = catalog_get(spec.name, spec.params);
    } catch (const UnknownModel& e) {
      throw ConfigError("model.name", e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("model.params", e.what());
    }
    r.echo["name"] = spec.name;
    Json p = Json::object();
    for (const auto& [k, v] : r.entry->params) p[k] = v;
    r.echo["params"] = p;
    r.exact = r.entry->exact_brackets;
    r.frame = r.entry->has_frame();
  }
  r.flt = r.exact ? r.exact->cast<double>() : r.entry->float_brackets;
  r.echo["brackets"] = r.exact ? brackets_json(*r.exact) : brackets_json(r.flt);
  return r;
}

// Report assembly

namespace detail {

struct Verdict {
  bool pass = true;
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

template <class T>
Vec3<T> field_vector(const FieldSpec& f) {
  if (f.axis) return basis_vector<T>(*f.axis);
  Vec3<Rational> v = vec3(parse_rational(f.vector[0]), parse_rational(f.vector[1]), parse_rational(f.vector[2]));
  if constexpr (kernel_traits<T>::exact) {
    return normalized(v);
  } else {
    return normalized(v.template cast<double>());
  }
}

template <class T>
Tolerance kernel_tolerance(const Tolerances& t) {
  return Tolerance{t.algebraic, 1e-12};
}

template <class T>
Json classification_json(const ClassificationResult<T>& r, const Tolerance& tol, double scale) {
  Json j;
  j["kind"] = std::string(to_string(r.kind));
  if (r.kind == FieldCase::HypothesisFailed) j["reason"] = r.reason;
  j["lambda"] = num(r.lambda);
  j["lambda1"] = num(r.lambda1);
  j["b"] = num(r.b);
  j["b_squared"] = num(r.b_squared);
  j["norm2_phi"] = num(r.norm2_phi);
  j["scal"] = num(r.scal);
  j["trace_phi"] = num(r.trace_phi);
  j["e1"] = vec_json(r.e1);
  j["e2"] = vec_json(r.e2);
  j["frame_norm2"] = num(r.frame_norm2);
  j["orientation"] = r.orientation;
  auto triple = [](const std::array<T, 3>& a) { return Json::array({num(a[0]), num(a[1]), num(a[2])}); };
  if (r.emitted_brackets) j["emitted_brackets"] = triple(*r.emitted_brackets);
  if (r.flat_normal_form) j["flat_normal_form"] = triple(*r.flat_normal_form);
  if (r.kind != FieldCase::HypothesisFailed) {
    j["reconstructed_ricci"] = mat_json(r.reconstructed_ricci);
    j["predicted_ricci"] = mat_json(r.predicted_ricci);
  }
  j["milnor_input"] = std::string(to_string(r.milnor_input));
  if (r.emitted_brackets) j["milnor_emitted"] = std::string(to_string(r.milnor_emitted));
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"value", num(c.value)}, {"anchor", c.anchor},
                      {"pass", is_zero(c.value, tol, scale)}});
  j["checks"] = checks;
  j["model_frame_residual"] = num(r.model_frame_residual);
  j["theorem_family"] = r.theorem_family;
  j["compact_obstruction"] = r.compact_obstruction;
  j["warnings"] = r.warnings;
  j["verified"] = r.verified(tol, scale);
  return j;
}

template <class T>
void require_classification(const ClassificationResult<T>& r, const Tolerance& tol, double scale, Verdict& v) {
  for (const auto& c : r.checks) v.require(is_zero(c.value, tol, scale), "classification." + c.name);
  if (r.kind == FieldCase::NonKilling_b_zero || r.kind == FieldCase::NonKilling_b_nonzero)
    v.require(r.model_frame_residual <= tol.bound(scale), "classification.model_frame_residual");
}

inline std::string md_matrix(const Json& m) {
  std::string s = "| | 1 | 2 | 3 |\n|---|---|---|---|\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    s += "| " + std::to_string(i + 1) + " |";
    for (const auto& x : m[i]) s += " " + x.get<std::string>() + " |";
    s += "\n";
  }
  return s;
}

inline std::string md_classification(const Json& c) {
  std::string s = "| quantity | value |\n|---|---|\n";
  for (const char* k : {"kind", "lambda", "lambda1", "b", "scal", "norm2_phi", "trace_phi", "milnor_input",
                        "milnor_emitted", "theorem_family"}) {
    if (!c.contains(k)) continue;
    const auto& v = c.at(k);
    s += std::string("| ") + k + " | " + (v.is_string() ? v.get<std::string>() : v.dump()) + " |\n";
  }
  if (c.contains("emitted_brackets")) {
    const auto& e = c.at("emitted_brackets");
    s += "| emitted [e1,e2], [e1,e3], [e2,e3] | " + e[0].get<std::string>() + " e3, " + e[1].get<std::string>() +
         " e2, " + e[2].get<std::string>() + " e1 |\n";
  }
  if (c.contains("flat_normal_form")) {
    const auto& e = c.at("flat_normal_form");
    s += "| flat normal form | " + e[0].get<std::string>() + " e3, " + e[1].get<std::string>() + " e2, " +
         e[2].get<std::string>() + " e1 |\n";
  }
  if (c.contains("reason")) s += "| reason | " + c.at("reason").get<std::string>() + " |\n";
  return s;
}

template <class T>
Json analyze_kernel(const FrameModel<T>& model, const Vec3<T>& zeta, const Tolerance& tol, bool classify_only,
                    Verdict& v, std::string& md) {
  Json j;
  auto ctx = make_field_context(model, zeta, tol);
  j["field"] = vec_json(zeta);
  if (!classify_only) {
    j["connection"] = tensor3_json(model.connection.gamma);
    j["ricci"] = mat_json(model.curv.ricci);
    j["scalar_curvature"] = num(model.curv.scal);
    const auto& inv = ctx.inv;
    Json ij;
    ij["trace_phi"] = num(inv.trace_phi);
    ij["det_h"] = num(inv.det_h);
    ij["norm2_phi"] = num(inv.norm2_phi);
    ij["trace_phi2"] = num(inv.trace_phi2);
    ij["lambda1"] = inv.lambda1 ? Json(num(*inv.lambda1)) : Json(nullptr);
    ij["lambda1_approx"] = num(inv.lambda1_approx);
    ij["trace_phiJ"] = num(inv.trace_phiJ);
    ij["energy_density"] = num(inv.energy_density);
    ij["phi"] = mat_json(ctx.phi.matrix);
    ij["geodesic_curvature"] = vec_json(ctx.phi.geodesic_curvature);
    j["invariants"] = ij;

    auto h = harmonic_residuals(ctx);
    auto kk = killing_and_kostant(ctx);
    auto suite = identity_suite(ctx);
    auto contact = contact_check(ctx);
    Json flags;
    flags["harmonic"] = suite.flags.harmonic;
    flags["totally_geodesic"] = suite.flags.totally_geodesic;
    flags["divergence_free"] = suite.flags.divergence_free;
    flags["ricci_eigen"] = suite.flags.ricci_eigen;
    flags["killing"] = suite.flags.killing;
    j["flags"] = flags;

    Json res = Json::array();
    auto add = [&](const std::string& name, const T& value, bool asserted, const std::string& anchor,
                   const std::string& condition) {
      bool ok = is_zero(value, tol, ctx.scale);
      res.push_back({{"name", name}, {"value", num(value)}, {"asserted", asserted}, {"anchor", anchor},
                     {"condition", condition}, {"pass", asserted ? ok : true}});
      if (asserted) v.require(ok, "residuals." + name);
    };
    add("unit_harmonic", h.unit_harmonic, false, "nabla^* nabla zeta = |nabla zeta|^2 zeta", "informational");
    add("harmonic_map", h.harmonic_map, false, "sum_i R(nabla_{e_i} zeta, zeta) e_i = 0", "informational");
    add("killing", kk.killing_residual, false, "phi + phi^T = 0", "informational");
    add("kostant", kk.kostant_residual, kk.killing, "nabla^2_{X,Y} zeta = R(X, zeta) Y", "killing");
    if (kk.killing_ricci_applicable)
      add("killing_ricci", kk.killing_ricci_residual, true, "Ric(zeta, zeta) = |phi|^2", "killing + harmonic");
    add("sasakian", sasakian_residual(ctx), false, "(nabla_X phi) Y = <X, Y> zeta - <zeta, Y> X", "informational");
    for (const auto& e : suite.entries) add(e.name, e.value, e.asserted, e.anchor, e.condition);
    add("contact_agreement", contact.agreement, true, "(eta ^ d eta)(zeta, h1, h2) = trace(phi J)", "always");
    j["residuals"] = res;
    j["contact"] = {{"trace_phiJ", num(contact.trace_phiJ)},
                    {"wedge_value", num(contact.wedge_value)},
                    {"is_contact", contact.is_contact}};

    md += "## Ricci\n\n" + md_matrix(j["ricci"]) + "\n";
    md += "## phi\n\n" + md_matrix(ij["phi"]) + "\n";
    md += "## Residuals\n\n| name | value | asserted | anchor |\n|---|---|---|---|\n";
    for (const auto& e : res)
      md += "| " + e["name"].get<std::string>() + " | " + e["value"].get<std::string>() + " | " +
            (e["asserted"].get<bool>() ? "yes" : "no") + " | " + e["anchor"].get<std::string>() + " |\n";
    md += "\n";
  }
  auto cls = classify(ctx);
  j["classification"] = classification_json(cls, tol, ctx.scale);
  require_classification(cls, tol, ctx.scale, v);
  md += "## Classification\n\n" + md_classification(j["classification"]) + "\n";
  return j;
}

template <class T>
Json facts_json(const CatalogEntry& e, Verdict& v, std::string& md) {
  Json a = Json::array();
  md += "## Expected facts\n\n| fact | provenance | deviation | pass |\n|---|---|---|---|\n";
  for (const auto& f : verify_facts(e)) {
    a.push_back({{"name", f.name}, {"statement", f.statement}, {"provenance", std::string(to_string(f.provenance))},
                 {"deviation", num(f.outcome.deviation)}, {"pass", f.outcome.pass}, {"detail", f.outcome.detail}});
    v.require(f.outcome.pass, "facts." + f.name);
    md += "| " + f.name + " | " + std::string(to_string(f.provenance)) + " | " + num(f.outcome.deviation) + " | " +
          (f.outcome.pass ? "yes" : "no") + " |\n";
  }
  md += "\n";
  return a;
}

inline Json direction_json(const CriticalDirection& d) {
  return {{"direction", vec_json(d.direction)},
          {"residual", num(d.residual)},
          {"harmonic", d.flags.harmonic},
          {"totally_geodesic", d.flags.totally_geodesic},
          {"killing", d.flags.killing},
          {"divergence_free", d.flags.divergence_free},
          {"basin_count", d.basin_count},
          {"first_seed", d.first_seed},
          {"frame_axis", d.frame_axis},
          {"status", d.frame_axis ? "frame axis" : "extra root, unconfirmed"}};
}

/// Parameter triples of a sweep, in output order.
inline std::vector<std::array<Rational, 3>> sweep_parameters(const SweepSpec& s) {
  std::vector<std::array<Rational, 3>> out;
  if (s.kind == "grid") {
    std::vector<Rational> vals;
    for (const auto& x : s.values) vals.push_back(parse_rational(x));
    if (vals.empty()) throw ConfigError("sweep.values", "grid sweep needs values");
    for (const auto& a : vals)
      for (const auto& b : vals)
        for (const auto& c : vals) out.push_back({a, b, c});
    return out;
  }
  Rational lo = parse_rational(s.lo) * s.denominator, hi = parse_rational(s.hi) * s.denominator;
  // integer numerators k with lo <= k <= hi
  BigInt klo = boost::multiprecision::numerator(lo) / boost::multiprecision::denominator(lo);
  if (Rational(klo) < lo) klo += 1;
  BigInt khi = boost::multiprecision::numerator(hi) / boost::multiprecision::denominator(hi);
  if (Rational(khi) > hi) khi -= 1;
  if (klo > khi) throw ConfigError("sweep.range", "no grid point k/denominator lies in the range");
  std::mt19937_64 gen(s.seed);
  std::uniform_int_distribution<long long> dist(klo.convert_to<long long>(), khi.convert_to<long long>());
  for (int n = 0; n < s.count; ++n) {
    std::array<Rational, 3> abc;
    for (auto& x : abc) x = Rational(dist(gen), s.denominator);
    out.push_back(abc);
  }
  return out;
}

/// Exact analysis of the three frame axes of one unimodular model.
inline Json sweep_one(const std::array<Rational, 3>& abc, const Tolerance& tol, bool& ok) {
  Json j;
  j["alpha"] = num(abc[0]);
  j["beta"] = num(abc[1]);
  j["gamma"] = num(abc[2]);
  auto m = FrameModel<Rational>::build(StructureConstants<Rational>::unimodular(abc[0], abc[1], abc[2]));
  Rational ric_dev = (m.curv.ricci - unimodular_ricci(abc[0], abc[1], abc[2])).max_abs();
  j["ricci_closed_form_dev"] = num(ric_dev);
  j["milnor_type"] = std::string(to_string(milnor_type(m.brackets, tol).type));
  ok = ric_dev == 0;
  Json axes = Json::array();
  for (std::size_t k = 0; k < 3; ++k) {
    auto ctx = make_field_context(m, basis_vector<Rational>(k), tol);
    auto h = harmonic_residuals(ctx);
    auto suite = identity_suite(ctx);
    Rational worst(0);
    int asserted = 0;
    for (const auto& e : suite.entries)
      if (e.asserted) {
        ++asserted;
        worst = std::max(worst, abs_of(e.value));
      }
    auto cls = classify(ctx);
    bool axis_ok = h.unit_harmonic == 0 && worst == 0;
    for (const auto& c : cls.checks) axis_ok = axis_ok && c.value == 0;
    ok = ok && axis_ok;
    Json a;
    a["field"] = "e" + std::to_string(k + 1);
    a["unit_harmonic"] = num(h.unit_harmonic);
    a["asserted_identities"] = asserted;
    a["max_asserted_residual"] = num(worst);
    a["classification"] = std::string(to_string(cls.kind));
    a["lambda"] = num(cls.lambda);
    a["b"] = num(cls.b);
    if (cls.emitted_brackets)
      a["emitted_brackets"] = Json::array(
          {num((*cls.emitted_brackets)[0]), num((*cls.emitted_brackets)[1]), num((*cls.emitted_brackets)[2])});
    a["pass"] = axis_ok;
    axes.push_back(a);
  }
  j["axes"] = axes;
  j["pass"] = ok;
  return j;
}

/// Workers pull indices from a shared counter; results land in parameter order.
inline Json run_sweep(const RunConfig& cfg, const Tolerance& tol, Verdict& v, std::string& md) {
  auto params = sweep_parameters(cfg.sweep);
  std::vector<Json> results(params.size());
  std::vector<char> ok(params.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < params.size(); i = next++) {
      bool pass = false;
      try {
        results[i] = sweep_one(params[i], tol, pass);
      } catch (const std::exception& e) {
        results[i] = {{"alpha", num(params[i][0])}, {"beta", num(params[i][1])}, {"gamma", num(params[i][2])},
                      {"error", e.what()}, {"pass", false}};
      }
      ok[i] = pass;
    }
  };
  std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), params.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  Json s;
  s["kind"] = cfg.sweep.kind;
  s["seed"] = cfg.sweep.seed;
  s["models"] = static_cast<int>(params.size());
  Json arr = Json::array();
  int passed = 0;
  md += "## Sweep\n\n| alpha | beta | gamma | milnor | e1 | e2 | e3 | pass |\n|---|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < params.size(); ++i) {
    passed += ok[i] ? 1 : 0;
    v.require(ok[i], "sweep[" + std::to_string(i) + "]");
    const auto& r = results[i];
    md += "| " + r["alpha"].get<std::string>() + " | " + r["beta"].get<std::string>() + " | " +
          r["gamma"].get<std::string>() + " | ";
    if (r.contains("axes")) {
      md += r["milnor_type"].get<std::string>() + " |";
      for (const auto& a : r["axes"]) md += " " + a["classification"].get<std::string>() + " |";
    } else {
      md += "error | | | |";
    }
    md += std::string(" ") + (ok[i] ? "yes" : "no") + " |\n";
    arr.push_back(r);
  }
  md += "\n";
  s["passed"] = passed;
  s["results"] = arr;
  return s;
}

/// Runs the exact kernel when possible and falls back to floats on an inexact operation.
template <class F>
Json with_kernel(const RunConfig& cfg, const ResolvedModel& rm, F&& body) {
  Json j;
  bool try_exact = cfg.kernel != "float" && rm.exact.has_value();
  if (cfg.kernel == "exact" && !rm.exact) throw ConfigError("kernel", "model has no exact representation");
  if (try_exact) {
    try {
      auto m = FrameModel<Rational>::build(*rm.exact);
      auto zeta = field_vector<Rational>(cfg.field);
      j = body(m, zeta);
      j["kernel"] = "exact";
      return j;
    } catch (const InexactOperation& e) {
      if (cfg.kernel == "exact") throw;
      j["fallback"] = e.what();
    }
  }
  auto m = FrameModel<double>::build(rm.flt);
  auto zeta = field_vector<double>(cfg.field);
  Json r = body(m, zeta);
  r["kernel"] = "float";
  if (j.contains("fallback")) r["fallback"] = j["fallback"];
  return r;
}

}  // namespace detail

inline Json model_spec_json(const ModelSpec& m) {
  Json j;
  j["type"] = m.type;
  if (m.type == "unimodular") {
    j["alpha"] = m.abc[0];
    j["beta"] = m.abc[1];
    j["gamma"] = m.abc[2];
  } else if (m.type == "frame") {
    j["c"] = m.c;
  } else {
    j["name"] = m.name;
    Json p = Json::object();
    for (const auto& [k, v] : m.params) p[k] = v;
    j["params"] = p;
  }
  return j;
}

/// Runs one configuration. Config errors throw ConfigError; numerical failures
/// are recorded in the report and fail the verdict.
inline Report run(const RunConfig& cfg) {
  validate_config(cfg);
  Report rep;
  Json& out = rep.json;
  detail::Verdict v;
  std::string md = "# Report: " + std::string(to_string(cfg.mode)) + "\n\n";
  out["mode"] = std::string(to_string(cfg.mode));

  std::optional<ResolvedModel> rm;
  if (cfg.model) {
    rm = resolve_model(*cfg.model);
    out["model"] = rm->echo;
    md += "Model: `" + rm->echo.dump() + "`\n\n";
  }
  const Tolerance tol{cfg.tolerances.algebraic, 1e-12};

  auto guarded = [&](const std::string& section, auto&& body) {
    try {
      body();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      out["error"] = {{"section", section}, {"message", e.what()}};
      v.require(false, section + ": " + e.what());
      md += "**error** in " + section + ": " + e.what() + "\n\n";
    }
  };

  switch (cfg.mode) {
    case RunMode::Analyze:
    case RunMode::Classify: {
      if (!rm->frame) throw ConfigError("model", "chart-only model; use chart-verify");
      bool classify_only = cfg.mode == RunMode::Classify;
      guarded(std::string(to_string(cfg.mode)), [&] {
        Json body = detail::with_kernel(cfg, *rm, [&](const auto& m, const auto& zeta) {
          return detail::analyze_kernel(m, zeta, tol, classify_only, v, md);
        });
        for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
      });
      if (!classify_only && rm->entry && cfg.model->type != "unimodular")
        guarded("facts", [&] { out["facts"] = detail::facts_json<double>(*rm->entry, v, md); });
      break;
    }
    case RunMode::Find: {
      if (!rm->frame) throw ConfigError("model", "chart-only model; use chart-verify");
      guarded("finder", [&] {
        auto m = FrameModel<double>::build(rm->flt);
        FinderConfig fc = cfg.finder;
        fc.workers = cfg.workers;
        auto fr = find_all(m, fc);
        Json f;
        f["seeds"] = static_cast<int>(fr.seeds.size());
        f["seeds_converged"] = fr.seeds_converged;
        f["seeds_dropped"] = fr.seeds_dropped;
        f["raw_classes"] = fr.raw_classes;
        f["all_directions"] = fr.all_directions;
        f["continuous_family"] = fr.continuous_family;
        Json dirs = Json::array();
        double bound = 1e-8 * std::max(1.0, m.scale());
        md += "## Harmonic directions\n\n| direction | residual | geodesic | killing |\n|---|---|---|---|\n";
        for (const auto& d : fr.directions) {
          dirs.push_back(detail::direction_json(d));
          v.require(d.residual <= bound && d.flags.harmonic, "finder.direction");
          md += "| (" + num(d.direction(0)) + ", " + num(d.direction(1)) + ", " + num(d.direction(2)) + ") | " +
                num(d.residual) + " | " + (d.flags.totally_geodesic ? "yes" : "no") + " | " +
                (d.flags.killing ? "yes" : "no") + " |\n";
        }
        md += "\n";
        f["directions"] = dirs;
        Json fams = Json::array();
        for (const auto& fam : fr.families) {
          Json members = Json::array();
          for (const auto& d : fam.axis_members) {
            members.push_back(detail::direction_json(d));
            v.require(d.residual <= bound && d.flags.harmonic, "finder.family_member");
          }
          fams.push_back({{"energy", num(fam.energy)},
                          {"dimension", fam.dimension},
                          {"normal", vec_json(fam.normal)},
                          {"sample_count", fam.sample_count},
                          {"axis_members", members}});
        }
        f["families"] = fams;
        if (!fr.families.empty()) {
          md += "## Families\n\n| energy | dimension | frame axes on the family |\n|---|---|---|\n";
          for (const auto& fam : fr.families) {
            std::string axes;
            for (const auto& d : fam.axis_members)
              axes += "(" + num(d.direction(0)) + ", " + num(d.direction(1)) + ", " + num(d.direction(2)) + ") ";
            md += "| " + num(fam.energy) + " | " + std::to_string(fam.dimension) + " | " + axes + "|\n";
          }
          md += "\n";
        }
        out["finder"] = f;
      });
      break;
    }
    case RunMode::ChartVerify: {
      if (!rm->entry || !rm->entry->chart) throw ConfigError("model", "model has no chart");
      guarded("chart", [&] {
        const auto& chart = *rm->entry->chart;
        auto m = rm->entry->float_model();
        auto z = detail::field_vector<double>(cfg.field);
        auto pts = grid_points(vec3(0.3, 0.4, 0.2), 0.25);
        auto cv = cross_validate(chart, m, pts, z, cfg.tolerances.fd_step);
        Json c;
        c["points"] = cv.points;
        c["fd_step"] = num(cfg.tolerances.fd_step);
        c["max_ricci_dev"] = num(cv.max_ricci_dev);
        c["structure_compared"] = cv.structure_compared;
        v.require(cv.max_ricci_dev <= cfg.tolerances.fd, "chart.ricci");
        if (cv.structure_compared) {
          c["max_structure_dev"] = num(cv.max_structure_dev);
          c["max_phi_dev"] = num(cv.max_phi_dev);
          v.require(cv.max_structure_dev <= cfg.tolerances.fd, "chart.structure");
          v.require(cv.max_phi_dev <= cfg.tolerances.fd, "chart.phi");
        }
        auto curve = integral_curve(
            chart, [&](const Point3& p) { return matvec(chart.frame(p), z); }, vec3(0.3, 0.4, 0.2), 1.0, 0.01);
        c["integral_curve"] = {{"samples", static_cast<int>(curve.samples.size())},
                               {"geodesic_residual", num(curve.geodesic_residual)},
                               {"speed_drift", num(curve.speed_drift)}};
        auto shape = shape_operator(m.connection, z, Tolerance{1e-9, 1e-12});
        c["frame_geodesic_curvature"] = num(shape.geodesic_curvature.max_abs());
        out["chart"] = c;
        md += "## Chart cross-validation\n\n| quantity | value |\n|---|---|\n";
        for (auto it = c.begin(); it != c.end(); ++it)
          if (!it->is_object()) md += "| " + it.key() + " | " + (it->is_string() ? it->get<std::string>() : it->dump()) + " |\n";
        md += "| curve geodesic residual | " + num(curve.geodesic_residual) + " |\n\n";
      });
      break;
    }
    case RunMode::Sweep: {
      guarded("sweep", [&] { out["sweep"] = detail::run_sweep(cfg, tol, v, md); });
      break;
    }
    case RunMode::Catalog: {
      if (!rm) {
        Json list = Json::array();
        md += "| name | kind | parameters |\n|---|---|---|\n";
        for (const auto& n : catalog_names()) {
          auto e = catalog_get(n);
          Json p = Json::object();
          for (const auto& [k, val] : e.params) p[k] = val;
          list.push_back({{"name", n}, {"kind", std::string(to_string(e.kind))}, {"default_params", p},
                          {"facts", static_cast<int>(e.facts.size())}});
          md += "| " + n + " | " + std::string(to_string(e.kind)) + " | " + p.dump() + " |\n";
        }
        out["catalog"] = list;
        md += "\n";
      } else {
        if (!rm->entry) throw ConfigError("model", "catalog mode needs a catalog model");
        out["kind"] = std::string(to_string(rm->entry->kind));
        guarded("facts", [&] { out["facts"] = detail::facts_json<double>(*rm->entry, v, md); });
      }
      break;
    }
  }

  out["verdict"] = v.pass ? "pass" : "fail";
  out["failures"] = v.failures;
  md += std::string("**Verdict:** ") + (v.pass ? "pass" : "fail") + "\n";
  rep.markdown = md;
  rep.pass = v.pass;
  return rep;
}

}  // namespace hvf
