#include "agm/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace agm {

using nlohmann::json;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a:") + buf;
}

namespace {

class Validator {
 public:
  void error(const std::string& field, const std::string& msg) {
    errors_.push_back(field + ": " + msg);
  }
  void require(bool cond, const std::string& field, const std::string& msg) {
    if (!cond) error(field, msg);
  }
  void check_expr(const std::string& text, int n, const std::string& field) {
    try {
      parse(text, n);
    } catch (const ParseError& e) {
      error(field, std::string("'") + text + "' does not parse: " + e.what());
    }
  }
  void finish(const std::string& what) {
    if (!errors_.empty()) throw ScenarioError(what, errors_);
  }
  bool ok() const { return errors_.empty(); }

 private:
  std::vector<std::string> errors_;
};

std::vector<std::string> string_list(const json& j, int n, Validator& v, const std::string& field,
                                     const char* fill = "0") {
  std::vector<std::string> out(static_cast<std::size_t>(n), fill);
  if (j.is_null()) return out;
  if (!j.is_array()) {
    v.error(field, "expected an array of expression strings");
    return out;
  }
  if (static_cast<int>(j.size()) != n) {
    v.error(field, "expected " + std::to_string(n) + " entries");
    return out;
  }
  for (int i = 0; i < n; ++i) {
    if (j[i].is_string()) {
      out[i] = j[i].get<std::string>();
    } else if (j[i].is_number()) {
      out[i] = j[i].dump();
    } else {
      v.error(field + "[" + std::to_string(i) + "]", "expected a string or number");
    }
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& digest) {
  Validator v;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario is not valid JSON", {e.what()});
  }
  Scenario s;
  s.digest = digest;
  if (!j.contains("n") || !j["n"].is_number_integer()) {
    v.error("n", "required integer chart dimension");
    v.finish("invalid scenario");
  }
  s.n = j["n"].get<int>();
  v.require(s.n >= 2 && s.n <= 4, "n", "dimension must be in 2..4");
  v.finish("invalid scenario");
  const int n = s.n;

  s.theta = j.value("theta", 1);
  v.require(s.theta == 1 || s.theta == 2, "theta", "must be 1 or 2");

  const bool has_explicit = j.contains("connection") || j.contains("instance");
  const bool has_generator = j.contains("generator");
  v.require(has_explicit != has_generator, "scenario",
            "exactly one of connection+instance or generator must be given");

  if (has_explicit && !has_generator) {
    std::map<std::string, std::string> conn;
    if (j.contains("connection")) {
      if (!j["connection"].is_object()) {
        v.error("connection", "expected an object keyed by \"i,j,k\"");
      } else {
        for (auto& [key, val] : j["connection"].items()) {
          int i = 0, jj = 0, k = 0;
          if (std::sscanf(key.c_str(), "%d,%d,%d", &i, &jj, &k) != 3 || i < 1 || i > n ||
              jj < 1 || jj > n || k < 1 || k > n) {
            v.error("connection." + key, "key must be \"i,j,k\" with 1-based indices in 1.." +
                                             std::to_string(n));
            continue;
          }
          std::string expr_text = val.is_string() ? val.get<std::string>() : val.dump();
          v.check_expr(expr_text, n, "connection." + key);
          conn[key] = expr_text;
        }
      }
    }
    s.connection = std::move(conn);
    ExplicitInstanceSpec inst;
    json ji = j.value("instance", json::object());
    inst.e = ji.value("e", 0);
    v.require(inst.e == 0 || inst.e == 1 || inst.e == -1, "instance.e", "must be 0, +1 or -1");
    inst.psi = string_list(ji.value("psi", json()), n, v, "instance.psi");
    inst.sigma = string_list(ji.value("sigma", json()), n, v, "instance.sigma");
    inst.mu = string_list(ji.value("mu", json()), n, v, "instance.mu");
    inst.nu = string_list(ji.value("nu", json()), n, v, "instance.nu");
    inst.F.assign(n, std::vector<std::string>(n, "0"));
    if (ji.contains("F")) {
      if (!ji["F"].is_array() || static_cast<int>(ji["F"].size()) != n) {
        v.error("instance.F", "expected an n-by-n array");
      } else {
        for (int r = 0; r < n; ++r)
          inst.F[r] = string_list(ji["F"][r], n, v, "instance.F[" + std::to_string(r) + "]");
      }
    }
    for (const auto& e : inst.psi) v.check_expr(e, n, "instance.psi");
    for (const auto& e : inst.sigma) v.check_expr(e, n, "instance.sigma");
    for (const auto& e : inst.mu) v.check_expr(e, n, "instance.mu");
    for (const auto& e : inst.nu) v.check_expr(e, n, "instance.nu");
    for (const auto& row : inst.F)
      for (const auto& e : row) v.check_expr(e, n, "instance.F");
    s.instance = std::move(inst);
  }

  if (has_generator) {
    const json& jg = j["generator"];
    GeneratorParams g;
    g.n = n;
    g.e = jg.value("e", 1);
    v.require(g.e == 0 || g.e == 1 || g.e == -1, "generator.e", "must be 0, +1 or -1");
    g.F0 = Eigen::MatrixXd::Zero(n, n);
    if (!jg.contains("F0") || !jg["F0"].is_array() || static_cast<int>(jg["F0"].size()) != n) {
      v.error("generator.F0", "expected an n-by-n numeric matrix");
    } else {
      for (int r = 0; r < n; ++r) {
        if (!jg["F0"][r].is_array() || static_cast<int>(jg["F0"][r].size()) != n) {
          v.error("generator.F0", "row " + std::to_string(r + 1) + " must have n entries");
          continue;
        }
        for (int c = 0; c < n; ++c) g.F0(r, c) = jg["F0"][r][c].get<double>();
      }
      Eigen::MatrixXd err = g.F0 * g.F0 - g.e * Eigen::MatrixXd::Identity(n, n);
      v.require(err.cwiseAbs().maxCoeff() <= 1e-12, "generator.F0",
                "F0*F0 must equal e*I exactly");
    }
    if (g.e == -1) v.require(n % 2 == 0, "generator.e", "e = -1 requires even dimension");
    g.p = string_list(jg.value("p", json()), n, v, "generator.p");
    g.q = string_list(jg.value("q", json()), n, v, "generator.q");
    g.sigma = string_list(jg.value("sigma", json()), n, v, "generator.sigma");
    g.psi = string_list(jg.value("psi", json()), n, v, "generator.psi");
    for (const auto& e : g.p) v.check_expr(e, n, "generator.p");
    for (const auto& e : g.q) v.check_expr(e, n, "generator.q");
    for (const auto& e : g.sigma) v.check_expr(e, n, "generator.sigma");
    for (const auto& e : g.psi) v.check_expr(e, n, "generator.psi");
    s.generator = std::move(g);
  }

  s.grid_bounds = default_bounds(n);
  if (j.contains("grid")) {
    const json& jgr = j["grid"];
    s.grid_count = jgr.value("count", 50);
    v.require(s.grid_count >= 1, "grid.count", "must be >= 1");
    s.grid_seed = jgr.value("seed", std::uint64_t{1});
    if (jgr.contains("bounds")) {
      if (!jgr["bounds"].is_array() || static_cast<int>(jgr["bounds"].size()) != n) {
        v.error("grid.bounds", "expected n [lo, hi] pairs");
      } else {
        for (int r = 0; r < n; ++r) {
          if (!jgr["bounds"][r].is_array() || jgr["bounds"][r].size() != 2) {
            v.error("grid.bounds", "row " + std::to_string(r + 1) + " must be [lo, hi]");
            continue;
          }
          s.grid_bounds(r, 0) = jgr["bounds"][r][0].get<double>();
          s.grid_bounds(r, 1) = jgr["bounds"][r][1].get<double>();
          v.require(s.grid_bounds(r, 0) < s.grid_bounds(r, 1), "grid.bounds", "lo must be < hi");
        }
      }
    }
  }

  s.fd_step = j.value("fd_step", 1e-4);
  v.require(s.fd_step > 0, "fd_step", "must be > 0");
  if (j.contains("tolerances")) {
    const json& jt = j["tolerances"];
    s.tolerances.algebraic = jt.value("algebraic", s.tolerances.algebraic);
    s.tolerances.derivative = jt.value("derivative", s.tolerances.derivative);
    s.tolerances.algebraic_fd = jt.value("algebraic_fd", s.tolerances.algebraic_fd);
    s.tolerances.derivative_fd = jt.value("derivative_fd", s.tolerances.derivative_fd);
  }
  if (j.contains("curvature_mode")) {
    std::string m = j["curvature_mode"].get<std::string>();
    if (m == "paper") {
      s.curvature = CurvatureMode::Paper;
    } else if (m == "standard") {
      s.curvature = CurvatureMode::Standard;
    } else {
      v.error("curvature_mode", "must be \"paper\" or \"standard\"");
    }
  }
  if (j.contains("readings")) {
    const json& jr = j["readings"];
    auto pick = [&](const char* key, std::initializer_list<const char*> names)
        -> std::optional<int> {
      if (!jr.contains(key)) return std::nullopt;
      std::string val = jr[key].get<std::string>();
      int i = 0;
      for (const char* cand : names) {
        if (val == cand) return i;
        ++i;
      }
      v.error(std::string("readings.") + key, "unknown reading '" + val + "'");
      return std::nullopt;
    };
    s.readings.a12 = pick("a12", {"contracted-covector", "plain-partial"});
    s.readings.nu_hat = pick("nu_hat", {"barred-derivatives", "source-derivatives"});
    s.readings.a18 = pick("a18", {"plain-trace", "alternated-trace"});
    s.readings.a19 = pick("a19", {"alternated-trace", "plain-trace"});
  }
  if (j.contains("path")) {
    const json& jp = j["path"];
    PathSpec p;
    p.x0 = Point::Zero(n);
    p.l0 = Eigen::VectorXd::Zero(n);
    if (jp.contains("x0") && jp["x0"].is_array() && static_cast<int>(jp["x0"].size()) == n) {
      for (int i = 0; i < n; ++i) p.x0(i) = jp["x0"][i].get<double>();
    } else {
      v.error("path.x0", "expected n numbers");
    }
    if (jp.contains("l0") && jp["l0"].is_array() && static_cast<int>(jp["l0"].size()) == n) {
      for (int i = 0; i < n; ++i) p.l0(i) = jp["l0"][i].get<double>();
    } else {
      v.error("path.l0", "expected n numbers");
    }
    p.t_end = jp.value("t_end", 1.0);
    p.steps = jp.value("steps", 512);
    p.defect_tol = jp.value("defect_tol", 1e-6);
    v.require(p.steps >= 16, "path.steps", "must be >= 16");
    v.require(p.t_end > 0, "path.t_end", "must be > 0");
    s.path = std::move(p);
  }

  v.finish("invalid scenario");
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file", {file.string() + ": unreadable"});
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  return parse_scenario(text, fnv1a_hex(text));
}

namespace {

TensorField covector_from(const std::vector<std::string>& texts, int n) {
  Tensor<Expr> c(std::vector<int>{n});
  for (int j = 0; j < n; ++j) c(j) = parse(texts[j], n);
  return TensorField(n, {0, 1}, std::move(c));
}

}  // namespace

RealizedScenario realize(const Scenario& s) {
  const int n = s.n;
  Grid grid = make_grid(n, s.grid_count, s.grid_seed, s.grid_bounds);
  if (s.generator) {
    Generated g = generate_instance(*s.generator, grid);
    g.inst.theta = s.theta;
    return {std::move(g.L), std::move(g.inst), std::move(grid)};
  }
  Tensor<Expr> Lc(std::vector<int>{n, n, n});
  for (std::size_t i = 0; i < Lc.size(); ++i) Lc[i] = Expr::constant(0.0);
  for (const auto& [key, text] : *s.connection) {
    int i = 0, j = 0, k = 0;
    std::sscanf(key.c_str(), "%d,%d,%d", &i, &j, &k);
    Lc(i - 1, j - 1, k - 1) = parse(text, n);
  }
  ConnectionField L(TensorField(n, {1, 2}, std::move(Lc)));
  const ExplicitInstanceSpec& es = *s.instance;
  MappingInstance inst;
  inst.psi = covector_from(es.psi, n);
  inst.sigma = covector_from(es.sigma, n);
  Tensor<Expr> Fc(std::vector<int>{n, n});
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) Fc(r, c) = parse(es.F[r][c], n);
  inst.F = TensorField(n, {1, 1}, std::move(Fc));
  inst.mu = CovectorProvider::from_field(covector_from(es.mu, n));
  inst.nu = CovectorProvider::from_field(covector_from(es.nu, n));
  inst.e = es.e;
  inst.theta = s.theta;
  return {std::move(L), std::move(inst), std::move(grid)};
}

AuditOptions audit_options(const Scenario& s, DerivMode mode, CurvatureMode curvature) {
  AuditOptions o;
  o.mode = mode;
  o.curvature = curvature;
  o.tol_algebraic = mode.is_exact() ? s.tolerances.algebraic : s.tolerances.algebraic_fd;
  o.tol_derivative = mode.is_exact() ? s.tolerances.derivative : s.tolerances.derivative_fd;
  o.force_a12 = s.readings.a12;
  o.force_nu_hat = s.readings.nu_hat;
  o.force_a18 = s.readings.a18;
  o.force_a19 = s.readings.a19;
  return o;
}

}  // namespace agm
