#include "rmmcli/config.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rmm/error.hpp"

namespace rmmcli {

using nlohmann::json;
using rmm::ValidationError;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError("config: " + path + ": " + what);
}

// Scale to SI per accepted suffix, grouped by unit family.
const std::map<std::string, std::map<std::string, double>>& unit_table() {
  static const std::map<std::string, std::map<std::string, double>> t{
      {"Pa", {{"Pa", 1.0}, {"kPa", 1e3}, {"MPa", 1e6}, {"GPa", 1e9}}},
      {"m", {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}}},
      {"kg/m3", {{"kg/m3", 1.0}, {"g/cm3", 1e3}}},
      {"N", {{"N", 1.0}, {"kN", 1e3}, {"mN", 1e-3}}},
      {"rad/s", {{"rad/s", 1.0}, {"krad/s", 1e3}, {"Mrad/s", 1e6}}},
      {"kg/m", {{"kg/m", 1.0}}},
      {"kg*m", {{"kg*m", 1.0}}},
      {"rad", {{"rad", 1.0}, {"deg", std::numbers::pi / 180.0}}},
  };
  return t;
}

/// A JSON object whose keys must all be consumed.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }
  ~Node() = default;

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }
  Node object(const std::string& key) {
    if (!has(key)) return Node(empty(), sub(key));
    return Node(raw(key), sub(key));
  }

  template <class T>
  void number(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) fail(sub(key), "expected an integer");
      out = v.get<T>();
    } else {
      if (!v.is_number()) fail(sub(key), "expected a number");
      out = v.get<T>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(sub(key), "expected true or false");
    out = v.get<bool>();
  }
  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_string()) fail(sub(key), "expected a string");
    out = v.get<std::string>();
  }
  void quantity(const std::string& key, const std::string& family, double& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_string()) fail(sub(key), "expected a quantity string with a unit, e.g. \"1 " + family + "\"");
    out = parse_quantity(v.get<std::string>(), family, sub(key));
  }
  double required_quantity(const std::string& key, const std::string& family) {
    if (!has(key)) fail(sub(key), "required");
    double v = 0.0;
    quantity(key, family, v);
    return v;
  }
  void quantity_list(const std::string& key, const std::string& family, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_array() || v.empty()) fail(sub(key), "expected a non-empty list");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = sub(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_string()) fail(p, "expected a quantity string");
      out.push_back(parse_quantity(v[i].get<std::string>(), family, p));
    }
  }
  template <class T>
  void int_list(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_array() || v.empty()) fail(sub(key), "expected a non-empty list of integers");
    std::vector<int> vals;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) fail(sub(key) + "[" + std::to_string(i) + "]", "expected an integer");
      vals.push_back(v[i].get<int>());
    }
    if constexpr (requires { out.push_back(0); }) {
      out.assign(vals.begin(), vals.end());
    } else {
      if (vals.size() != out.size()) {
        fail(sub(key), "expected " + std::to_string(out.size()) + " integers");
      }
      std::copy(vals.begin(), vals.end(), out.begin());
    }
  }
  void number_list(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_array() || v.empty()) fail(sub(key), "expected a non-empty list of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(sub(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
  }

  /// Unknown keys are hard errors.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(sub(it.key()), "unknown key");
    }
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

rmm::StaticUnknowns parse_statics(Node n) {
  rmm::StaticUnknowns s;
  s.mu_micro = n.required_quantity("mu_micro", "Pa");
  s.mu_star_micro = n.required_quantity("mu_star_micro", "Pa");
  s.lambda_micro = n.required_quantity("lambda_micro", "Pa");
  s.mu_c = n.required_quantity("mu_c", "Pa");
  s.mu_lc2 = n.required_quantity("mu_lc2", "N");
  n.finish();
  return s;
}

void check_positive(const std::string& path, double v) {
  if (!(v > 0.0)) fail(path, "must be positive");
}

void check_resolution(const std::string& path, int r) {
  if (r < 4 || r % 2 != 0) fail(path, "must be an even integer ≥ 4");
}

void check_sizes(const std::string& path, const std::vector<int>& n) {
  for (int v : n) {
    if (v < 1) fail(path, "sizes must be ≥ 1");
  }
}

}  // namespace

std::string stage_key(Stage s) {
  switch (s) {
    case Stage::Homogenize: return "homogenize";
    case Stage::Bloch: return "bloch";
    case Stage::RmmDisp: return "rmm_disp";
    case Stage::FitStatic: return "fit_static";
    case Stage::TrainSurrogate: return "train_surrogate";
    case Stage::FitDynamic: return "fit_dynamic";
  }
  return {};
}

std::string stage_command(Stage s) {
  std::string k = stage_key(s);
  for (char& c : k) {
    if (c == '_') c = '-';
  }
  return k;
}

bool RunConfig::enabled(Stage s) const {
  return std::find(stages.begin(), stages.end(), s) != stages.end();
}

double parse_quantity(const std::string& text, const std::string& expected,
                      const std::string& path) {
  std::istringstream is(text);
  is.imbue(std::locale::classic());
  double value = 0.0;
  if (!(is >> value)) fail(path, "cannot read a number from \"" + text + "\"");
  std::string unit;
  is >> unit;
  std::string rest;
  if (is >> rest) fail(path, "unexpected text after the unit in \"" + text + "\"");
  if (!std::isfinite(value)) fail(path, "value is not finite");
  const auto fam = unit_table().find(expected);
  if (fam == unit_table().end()) fail(path, "internal: unknown unit family " + expected);
  if (unit.empty()) fail(path, "missing unit, expected " + expected);
  const auto it = fam->second.find(unit);
  if (it == fam->second.end()) {
    std::string allowed;
    for (const auto& [u, f] : fam->second) allowed += (allowed.empty() ? "" : ", ") + u;
    fail(path, "unit \"" + unit + "\" is not one of " + allowed);
  }
  return value * it->second;
}

std::string apply_overrides(const std::string& text, const std::vector<std::string>& sets) {
  if (sets.empty()) return text;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--set: expected key.path=value, got " + s);
    const std::string key = s.substr(0, eq);
    const std::string value = s.substr(eq + 1);
    json* node = &root;
    std::size_t from = 0;
    while (true) {
      const auto dot = key.find('.', from);
      const std::string part = key.substr(from, dot == std::string::npos ? std::string::npos : dot - from);
      if (part.empty()) throw ValidationError("--set: empty key segment in " + key);
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ValidationError("--set: " + key + ": parent is not an object");
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      from = dot + 1;
    }
    json v = json::parse(value, nullptr, false);
    *node = v.is_discarded() ? json(value) : v;
  }
  return root.dump();
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }
  RunConfig c;
  Node top(root, "");
  if (!top.has("schema_version")) fail("schema_version", "required");
  top.number("schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(c.schema_version) +
                               " (this build reads " + std::to_string(kSchemaVersion) + ")");
  }
  std::string out = c.output_dir.string();
  top.string("output_dir", out);
  c.output_dir = out;
  if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;

  {
    if (!top.has("geometry")) fail("geometry", "required");
    Node g = top.object("geometry");
    std::string kind;
    g.string("kind", kind);
    const double l = g.required_quantity("l", "m");
    if (kind == "all_solid") {
      c.geometry = rmm::UnitCellGeometry::all_solid(l);
    } else if (kind == "cross_void") {
      const double l1 = g.required_quantity("arm_length", "m");
      const double l2 = g.required_quantity("arm_width", "m");
      c.geometry = rmm::UnitCellGeometry::cross_void(l, l1, l2);
    } else {
      fail(g.sub("kind"), "expected all_solid or cross_void, got \"" + kind + "\"");
    }
    g.finish();
    try {
      c.geometry.validate();
    } catch (const ValidationError& e) {
      fail("geometry", e.what());
    }
  }
  {
    if (!top.has("material")) fail("material", "required");
    Node m = top.object("material");
    c.material.lambda = m.required_quantity("lambda", "Pa");
    c.material.mu = m.required_quantity("mu", "Pa");
    c.material.rho = m.required_quantity("rho", "kg/m3");
    m.finish();
    if (!c.material.valid()) fail("material", "not positive definite or non-positive density");
  }
  {
    if (!top.has("stages")) fail("stages", "required");
    Node s = top.object("stages");
    for (Stage st : kStageOrder) {
      bool on = false;
      s.boolean(stage_key(st), on);
      if (on) c.stages.push_back(st);
    }
    s.finish();
  }
  if (top.has("c_macro")) {
    Node m = top.object("c_macro");
    rmm::TetragonalElasticity t;
    t.lambda = m.required_quantity("lambda", "Pa");
    t.mu = m.required_quantity("mu", "Pa");
    t.mu_star = m.required_quantity("mu_star", "Pa");
    m.finish();
    c.c_macro = t;
  }
  if (top.has("rho")) {
    double r = 0.0;
    top.quantity("rho", "kg/m3", r);
    check_positive("rho", r);
    c.rho = r;
  }
  if (top.has("statics")) c.statics = parse_statics(top.object("statics"));
  if (top.has("dynamics")) {
    Node d = top.object("dynamics");
    rmm::RmmDynamicParams p;
    const char* names[] = {"lambda_m1", "mu_m1", "mu_star_m1", "mu_c1", "lambda_m2",
                           "mu_m2",     "mu_star_m2", "mu_c2", "curv_inertia"};
    double* slots[] = {&p.lambda_m1, &p.mu_m1, &p.mu_star_m1, &p.mu_c1, &p.lambda_m2,
                       &p.mu_m2,     &p.mu_star_m2, &p.mu_c2, &p.curv_inertia};
    for (int i = 0; i < 9; ++i) {
      d.quantity(names[i], i == 8 ? "kg*m" : "kg/m", *slots[i]);
    }
    d.finish();
    c.dynamics = p;
  }
  {
    Node h = top.object("homogenize");
    h.number("resolution", c.homogenize.resolution);
    check_resolution(h.sub("resolution"), c.homogenize.resolution);
    h.finish();
  }
  {
    Node b = top.object("bloch");
    b.number("resolution", c.bloch.resolution);
    b.quantity_list("angles", "rad", c.bloch.angles);
    b.number("k_count", c.bloch.k_count);
    b.number("branches", c.bloch.branches);
    check_resolution(b.sub("resolution"), c.bloch.resolution);
    if (c.bloch.k_count < 2) fail(b.sub("k_count"), "must be ≥ 2");
    if (c.bloch.branches < 1) fail(b.sub("branches"), "must be ≥ 1");
    b.finish();
  }
  {
    Node r = top.object("rmm_disp");
    r.quantity_list("angles", "rad", c.rmm_disp.angles);
    r.number("k_count", c.rmm_disp.k_count);
    if (c.rmm_disp.k_count < 2) fail(r.sub("k_count"), "must be ≥ 2");
    r.finish();
  }
  {
    Node f = top.object("fit_static");
    auto& o = c.fit_static;
    f.number("resolution", o.resolution);
    f.int_list("n_list", o.n_list);
    f.number("amplitude", o.amplitude);
    if (f.has("start")) o.start = parse_statics(f.object("start"));
    if (f.has("mu_c_pin")) {
      double v = 0.0;
      f.quantity("mu_c_pin", "Pa", v);
      o.mu_c_pin = v;
    }
    f.number("max_iterations", o.max_iterations);
    check_resolution(f.sub("resolution"), o.resolution);
    check_sizes(f.sub("n_list"), o.n_list);
    check_positive(f.sub("amplitude"), o.amplitude);
    f.finish();
  }
  {
    Node s = top.object("train_surrogate");
    auto& o = c.surrogate;
    s.int_list("counts", o.counts);
    s.number("resolution", o.resolution);
    s.int_list("n_list", o.n_list);
    s.number("amplitude", o.amplitude);
    s.number("epochs", o.epochs);
    s.number("batch_size", o.batch_size);
    s.number("learning_rate", o.learning_rate);
    s.int_list("hidden", o.hidden);
    s.number("starts", o.starts);
    s.number("seed", o.seed);
    s.number("split_seed", o.split_seed);
    s.number("start_seed", o.start_seed);
    check_resolution(s.sub("resolution"), o.resolution);
    check_sizes(s.sub("n_list"), o.n_list);
    for (int v : o.counts) {
      if (v < 1) fail(s.sub("counts"), "must be ≥ 1");
    }
    if (o.epochs < 1) fail(s.sub("epochs"), "must be ≥ 1");
    if (o.batch_size < 1) fail(s.sub("batch_size"), "must be ≥ 1");
    if (o.starts < 1) fail(s.sub("starts"), "must be ≥ 1");
    check_positive(s.sub("learning_rate"), o.learning_rate);
    s.finish();
  }
  {
    Node f = top.object("fit_dynamic");
    auto& o = c.fit_dynamic;
    if (f.has("curvature")) {
      const json& v = f.raw("curvature");
      o.curvature.clear();
      if (v.is_boolean()) {
        o.curvature.push_back(v.get<bool>());
      } else if (v.is_array() && !v.empty()) {
        for (const auto& e : v) {
          if (!e.is_boolean()) fail(f.sub("curvature"), "expected booleans");
          o.curvature.push_back(e.get<bool>());
        }
      } else {
        fail(f.sub("curvature"), "expected a boolean or a non-empty list of booleans");
      }
    }
    if (f.has("directions") && f.raw("directions").is_number_integer()) {
      o.directions = {f.raw("directions").get<int>()};
    } else {
      f.int_list("directions", o.directions);
    }
    f.number("starts", o.starts);
    f.number("seed", o.seed);
    f.number("acoustic_weight", o.acoustic_weight);
    f.number("optic_weight", o.optic_weight);
    f.number_list("k_fractions", o.k_fractions);
    if (f.has("curves")) {
      std::string p;
      f.string("curves", p);
      std::filesystem::path path = p;
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      o.curves = path;
    }
    for (int d : o.directions) {
      if (d != 1 && d != 2) fail(f.sub("directions"), "must be 1 or 2");
    }
    if (o.starts < 1) fail(f.sub("starts"), "must be ≥ 1");
    f.finish();
  }
  top.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ValidationError("config: cannot open " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), file.parent_path());
}

void validate_prerequisites(const RunConfig& c) {
  auto need = [](bool ok, const std::string& stage, const std::string& what) {
    if (!ok) throw ValidationError("config: stages." + stage + ": missing prerequisite: " + what);
  };
  const bool has_macro = c.enabled(Stage::Homogenize) || c.c_macro.has_value();
  const bool has_rho = c.enabled(Stage::Homogenize) || c.rho.has_value();
  const bool has_statics = c.enabled(Stage::FitStatic) || c.statics.has_value();
  const bool has_curves = c.enabled(Stage::Bloch) || c.fit_dynamic.curves.has_value();
  if (c.stages.empty()) throw ValidationError("config: stages: no stage enabled");
  if (c.enabled(Stage::TrainSurrogate)) {
    need(has_macro, "train_surrogate", "C_macro (enable homogenize or give c_macro)");
  }
  if (c.enabled(Stage::FitStatic)) {
    need(has_macro, "fit_static", "C_macro (enable homogenize or give c_macro)");
    need(c.enabled(Stage::TrainSurrogate) || c.fit_static.start.has_value(),
         "fit_static", "a start point (enable train_surrogate or give fit_static.start)");
  }
  if (c.enabled(Stage::FitDynamic)) {
    need(has_curves, "fit_dynamic", "reference curves (enable bloch or give fit_dynamic.curves)");
    need(has_statics, "fit_dynamic", "static parameters (enable fit_static or give statics)");
    need(has_macro, "fit_dynamic", "C_macro (enable homogenize or give c_macro)");
    need(has_rho, "fit_dynamic", "apparent density (enable homogenize or give rho)");
    need(c.dynamics.has_value(), "fit_dynamic", "dynamics block with the level-2 start values");
    if (c.enabled(Stage::Bloch) && !c.fit_dynamic.curves) {
      auto has_angle = [&](double a) {
        return std::any_of(c.bloch.angles.begin(), c.bloch.angles.end(),
                           [&](double x) { return std::abs(x - a) < 1e-9; });
      };
      need(has_angle(0.0), "fit_dynamic", "a 0 rad angle in bloch.angles");
      const bool two = std::find(c.fit_dynamic.directions.begin(), c.fit_dynamic.directions.end(),
                                 2) != c.fit_dynamic.directions.end();
      need(!two || has_angle(std::numbers::pi / 4), "fit_dynamic",
           "a 45 deg angle in bloch.angles for the two-direction fit");
    }
  }
  if (c.enabled(Stage::RmmDisp)) {
    need(has_statics, "rmm_disp", "static parameters (enable fit_static or give statics)");
    need(has_macro, "rmm_disp", "C_macro (enable homogenize or give c_macro)");
    need(has_rho, "rmm_disp", "apparent density (enable homogenize or give rho)");
    need(c.enabled(Stage::FitDynamic) || c.dynamics.has_value(), "rmm_disp",
         "dynamic parameters (enable fit_dynamic or give dynamics)");
  }
}

std::string RunConfig::canonical() const {
  json j;
  j["schema_version"] = schema_version;
  j["output_dir"] = output_dir.lexically_normal().string();
  json g;
  g["name"] = geometry.name;
  g["l"] = geometry.l;
  g["l1"] = geometry.l1;
  g["l2"] = geometry.l2;
  j["geometry"] = g;
  j["material"] = {{"lambda", material.lambda}, {"mu", material.mu}, {"rho", material.rho}};
  json st = json::array();
  for (Stage s : stages) st.push_back(stage_key(s));
  j["stages"] = st;
  if (c_macro) j["c_macro"] = {c_macro->lambda, c_macro->mu, c_macro->mu_star};
  if (rho) j["rho"] = *rho;
  auto statics_json = [](const rmm::StaticUnknowns& s) {
    return json::array({s.mu_micro, s.mu_star_micro, s.lambda_micro, s.mu_c, s.mu_lc2});
  };
  if (statics) j["statics"] = statics_json(*statics);
  if (dynamics) {
    const auto& d = *dynamics;
    j["dynamics"] = {d.lambda_m1, d.mu_m1, d.mu_star_m1, d.mu_c1, d.lambda_m2,
                     d.mu_m2,     d.mu_star_m2, d.mu_c2, d.curv_inertia};
  }
  j["homogenize"] = {{"resolution", homogenize.resolution}};
  j["bloch"] = {{"resolution", bloch.resolution}, {"angles", bloch.angles},
                {"k_count", bloch.k_count}, {"branches", bloch.branches}};
  j["rmm_disp"] = {{"angles", rmm_disp.angles}, {"k_count", rmm_disp.k_count}};
  json fs = {{"resolution", fit_static.resolution}, {"n_list", fit_static.n_list},
             {"amplitude", fit_static.amplitude}, {"max_iterations", fit_static.max_iterations}};
  if (fit_static.start) fs["start"] = statics_json(*fit_static.start);
  if (fit_static.mu_c_pin) fs["mu_c_pin"] = *fit_static.mu_c_pin;
  j["fit_static"] = fs;
  const auto& s = surrogate;
  j["train_surrogate"] = {{"counts", s.counts},       {"resolution", s.resolution},
                          {"n_list", s.n_list},       {"amplitude", s.amplitude},
                          {"epochs", s.epochs},       {"batch_size", s.batch_size},
                          {"learning_rate", s.learning_rate}, {"hidden", s.hidden},
                          {"starts", s.starts},       {"seed", s.seed},
                          {"split_seed", s.split_seed}, {"start_seed", s.start_seed}};
  const auto& f = fit_dynamic;
  json fd = {{"curvature", f.curvature},
             {"directions", f.directions},
             {"starts", f.starts},
             {"seed", f.seed},
             {"acoustic_weight", f.acoustic_weight},
             {"optic_weight", f.optic_weight},
             {"k_fractions", f.k_fractions}};
  if (f.curves) fd["curves"] = f.curves->lexically_normal().string();
  j["fit_dynamic"] = fd;
  return j.dump();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace rmmcli
