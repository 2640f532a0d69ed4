#include "agm/report.hpp"

#include <sstream>

#include <json.hpp>

namespace agm {

using ojson = nlohmann::ordered_json;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

constexpr const char* kToolVersion = "agm 0.1.0";

ojson point_json(const Point& x) {
  ojson a = ojson::array();
  for (int i = 0; i < x.size(); ++i) a.push_back(format_real(x(i)));
  return a;
}

ojson index_json(const std::vector<int>& idx) {
  ojson a = ojson::array();
  for (int i : idx) a.push_back(i + 1);  // 1-based in reports
  return a;
}

ojson meta_json(const ReportMeta& meta) {
  ojson m;
  m["tool"] = kToolVersion;
  m["command"] = meta.command;
  m["scenario_digest"] = meta.scenario_digest;
  m["mode"] = meta.mode.is_exact() ? "exact" : "fd";
  if (!meta.mode.is_exact()) m["fd_step"] = format_real(meta.mode.h);
  m["curvature_mode"] = meta.curvature == CurvatureMode::Paper ? "paper" : "standard";
  m["theta"] = meta.theta;
  m["tolerance_algebraic"] = format_real(meta.tol_algebraic);
  m["tolerance_derivative"] = format_real(meta.tol_derivative);
  return m;
}

// Nested arrays of formatted reals for a rank-2/3/4 value array.
ojson values_json(const Values& v) {
  std::vector<int> idx(v.shape().size(), 0);
  std::function<ojson(int, std::vector<int>&)> rec = [&](int depth, std::vector<int>& ix) {
    ojson a = ojson::array();
    if (depth == v.rank() - 1) {
      for (int i = 0; i < v.shape()[depth]; ++i) {
        ix[depth] = i;
        a.push_back(format_real(v.at(ix)));
      }
    } else {
      for (int i = 0; i < v.shape()[depth]; ++i) {
        ix[depth] = i;
        a.push_back(rec(depth + 1, ix));
      }
    }
    return a;
  };
  if (v.rank() == 0) return ojson(format_real(v[0]));
  return rec(0, idx);
}

ojson matrix_json(const Eigen::MatrixXd& m) {
  ojson a = ojson::array();
  for (int r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(format_real(m(r, c)));
    a.push_back(row);
  }
  return a;
}

}  // namespace

std::string render_audit_report(const ReportMeta& meta, const AuditReport& report) {
  ojson j;
  j["meta"] = meta_json(meta);
  ojson checks = ojson::array();
  for (const IdentityCheck& c : report.checks) {
    ojson jc;
    jc["id"] = c.id;
    jc["relation"] = c.eq_ref;
    jc["residual"] = format_real(c.residual);
    jc["pass"] = c.pass;
    if (c.inherited) jc["inherited"] = true;
    if (!c.reading.empty()) jc["reading"] = c.reading;
    jc["argmax_point"] = point_json(c.argmax_point);
    jc["argmax_index"] = index_json(c.argmax_index);
    checks.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks);
  j["summary"] = report.summary;
  j["all_pass"] = report.all_pass;
  return j.dump(2) + "\n";
}

std::string render_invariants_report(const ReportMeta& meta, const MappingSide& side,
                                     const InvariantsRequest& req, DerivMode mode,
                                     CurvatureMode cmode) {
  ojson j;
  j["meta"] = meta_json(meta);
  ojson pts = ojson::array();
  for (const Point& x : req.points) {
    ojson e;
    e["point"] = point_json(x);
    Values om = side.omega.eval(x);
    double om_asym = 0.0;
    const int n = side.L.dim();
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          om_asym = std::max(om_asym, std::abs(om(i, a, b) - om(i, b, a)));
    e["omega_symmetry_residual"] = format_real(om_asym);
    e["thomas"] = values_json(side.thomas.eval(x));
    e["u_sym"] = values_json(side.usym.eval(x));
    Values fs = f_script(side, x, mode);
    e["f_script"] = values_json(fs);
    e["f_trace"] = matrix_json(f_trace(fs));
    e["weyl"] = values_json(weyl_pi2(side, x, cmode, mode, req.weyl_reading));
    if (req.include_priors) {
      try {
        e["t1"] = values_json(t1(side.L, side.inst, x));
      } catch (const DegenerateAffinorError& err) {
        e["t1_error"] = err.what();
      }
      e["t2hat_symmetrize_pair"] =
          values_json(t2hat(side.L, side.inst, x, mode, T2Reading::SymmetrizePair));
      e["t2hat_no_symmetrize"] =
          values_json(t2hat(side.L, side.inst, x, mode, T2Reading::NoSymmetrize));
    }
    pts.push_back(std::move(e));
  }
  j["invariants"] = std::move(pts);
  return j.dump(2) + "\n";
}

std::string render_check_report(const ReportMeta& meta, double reciprocity, double basic,
                                double contracted, double tol) {
  ojson j;
  j["meta"] = meta_json(meta);
  ojson checks = ojson::array();
  auto one = [&](const char* id, const char* rel, double res) {
    ojson c;
    c["id"] = id;
    c["relation"] = rel;
    c["residual"] = format_real(res);
    c["pass"] = res <= tol;
    checks.push_back(std::move(c));
  };
  one("A1", "affinor reciprocity F.F = e I", reciprocity);
  one("A2", "basic equation of the mapping", basic);
  one("A3", "trace of the basic equation", contracted);
  j["checks"] = std::move(checks);
  bool all = reciprocity <= tol && basic <= tol && contracted <= tol;
  j["all_pass"] = all;
  j["summary"] = all ? "all pass"
                     : (reciprocity > tol ? "first failure: A1"
                                          : (basic > tol ? "first failure: A2"
                                                         : "first failure: A3"));
  return j.dump(2) + "\n";
}

std::string render_path_csv(const std::vector<CurveSample>& samples,
                            const DefectResult& defects) {
  std::ostringstream os;
  const int n = samples.empty() ? 0 : static_cast<int>(samples[0].x.size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= n; ++i) os << ",lambda" << i;
  os << ",defect\n";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    os << format_real(samples[k].t);
    for (int i = 0; i < n; ++i) os << ',' << format_real(samples[k].x(i));
    for (int i = 0; i < n; ++i) os << ',' << format_real(samples[k].lambda(i));
    os << ',';
    if (k < defects.defect.size() && std::isfinite(defects.defect[k]))
      os << format_real(defects.defect[k]);
    os << '\n';
  }
  return os.str();
}

std::string render_explicit_scenario(const Scenario& s, const ConnectionField& L,
                                     const MappingInstance& inst) {
  const int n = s.n;
  ojson j;
  j["n"] = n;
  j["theta"] = s.theta;
  ojson conn;
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj)
      for (int k = 0; k < n; ++k) {
        const Expr& e = L.coeffs().components()(i, jj, k);
        if (e.is_zero()) continue;
        std::ostringstream key;
        key << (i + 1) << ',' << (jj + 1) << ',' << (k + 1);
        conn[key.str()] = e.str();
      }
  j["connection"] = std::move(conn);
  ojson ji;
  ji["e"] = inst.e;
  auto cov_json = [&](const TensorField& f) {
    ojson a = ojson::array();
    for (int i = 0; i < n; ++i) a.push_back(f.components()(i).str());
    return a;
  };
  ji["psi"] = cov_json(inst.psi);
  ji["sigma"] = cov_json(inst.sigma);
  ojson Fj = ojson::array();
  for (int r = 0; r < n; ++r) {
    ojson row = ojson::array();
    for (int c = 0; c < n; ++c) row.push_back(inst.F.components()(r, c).str());
    Fj.push_back(row);
  }
  ji["F"] = std::move(Fj);
  ji["mu"] = cov_json(inst.mu.field());
  ji["nu"] = cov_json(inst.nu.field());
  j["instance"] = std::move(ji);
  ojson jg;
  jg["count"] = s.grid_count;
  jg["seed"] = s.grid_seed;
  ojson bounds = ojson::array();
  for (int r = 0; r < n; ++r) bounds.push_back(ojson::array({s.grid_bounds(r, 0), s.grid_bounds(r, 1)}));
  jg["bounds"] = std::move(bounds);
  j["grid"] = std::move(jg);
  j["fd_step"] = s.fd_step;
  ojson jt;
  jt["algebraic"] = s.tolerances.algebraic;
  jt["derivative"] = s.tolerances.derivative;
  jt["algebraic_fd"] = s.tolerances.algebraic_fd;
  jt["derivative_fd"] = s.tolerances.derivative_fd;
  j["tolerances"] = std::move(jt);
  j["curvature_mode"] = s.curvature == CurvatureMode::Paper ? "paper" : "standard";
  if (s.path) {
    ojson jp;
    jp["x0"] = ojson::array();
    jp["l0"] = ojson::array();
    for (int i = 0; i < n; ++i) {
      jp["x0"].push_back(s.path->x0(i));
      jp["l0"].push_back(s.path->l0(i));
    }
    jp["t_end"] = s.path->t_end;
    jp["steps"] = s.path->steps;
    jp["defect_tol"] = s.path->defect_tol;
    j["path"] = std::move(jp);
  }
  return j.dump(2) + "\n";
}

}  // namespace agm
