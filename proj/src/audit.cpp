#include "agm/audit.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace agm {

std::pair<double, double> default_tolerances(DerivMode mode) {
  return mode.is_exact() ? std::pair{1e-10, 1e-8} : std::pair{1e-6, 1e-4};
}

namespace {

struct ResTracker {
  double value = -1.0;
  Point at;
  std::vector<int> index;

  void update(double v, const Point& x, std::vector<int> idx) {
    if (v > value) {
      value = v;
      at = x;
      index = std::move(idx);
    }
  }
  double residual() const { return value < 0 ? 0.0 : value; }
};

// Everything one audit check might need from one space at one point.
struct SideWs {
  int n = 0;
  Values Lv, Sv, Tv, omv, thv, uv, Fv;
  Eigen::VectorXd cv;        // L^a_{ja}
  Eigen::VectorXd sv, psv;   // sigma, psi values
  Eigen::VectorXd muv, nuv;  // basic-equation coefficients
  Eigen::VectorXd ttr;       // torsion trace T~^a_{ba}
  double Ftr = 0.0;
  Eigen::VectorXd Ftr_d;  // plain partials of the affinor trace
  Values Sd, omd, thd;    // kind-1 covariant derivatives in this space
  Values Fd1, sd;         // kind-1 derivatives of F and sigma
  Values Fdth;            // kind-theta derivative of F
  Eigen::MatrixXd ctr_d;      // formal derivative of L^a_{ja}
  Eigen::MatrixXd ctr_plain;  // plain partials of L^a_{ja}
  Eigen::MatrixXd str_d;      // formal derivative of S~^a_{ja}
  Eigen::VectorXd Fdiv1, Fdivth;
  Eigen::MatrixXd sfblk;  // sigma/F first-derivative block, (slot, deriv)
  Eigen::VectorXd mf;     // mu F + mu.F - F-divergence, per deriv index
  Values sd_alt, Fd1_alt;  // same data differentiated with the source connection
  Values Rp, Rs;           // both curvature modes
  Values Fs;
  Values rho;
  Eigen::MatrixXd ric_p, ric_s, ftr2;
};

SideWs make_ws(const MappingSide& side, const ConnectionField* alt_conn, const Point& x,
               const AuditOptions& o) {
  SideWs w;
  const int n = side.L.dim();
  w.n = n;
  EvalCache cache;
  w.Lv = side.L.coeffs().eval(x, cache);
  w.Sv = side.L.sym().eval(x, cache);
  w.Tv = side.L.torsion().eval(x, cache);
  w.omv = side.omega.eval(x, cache);
  w.thv = side.thomas.eval(x, cache);
  w.uv = side.usym.eval(x, cache);
  w.Fv = side.inst.F.eval(x, cache);
  Values cval = side.L.trace().eval(x, cache);
  Values sval = side.inst.sigma.eval(x, cache);
  Values pval = side.inst.psi.eval(x, cache);
  w.cv.resize(n);
  w.sv.resize(n);
  w.psv.resize(n);
  for (int j = 0; j < n; ++j) {
    w.cv(j) = cval(j);
    w.sv(j) = sval(j);
    w.psv(j) = pval(j);
  }
  w.muv = side.inst.mu.eval(x, o.mode);
  w.nuv = side.inst.nu.eval(x, o.mode);
  w.ttr.resize(n);
  for (int b = 0; b < n; ++b) {
    double v = 0.0;
    for (int a = 0; a < n; ++a) v += w.Tv(a, b, a);
    w.ttr(b) = v;
  }
  w.Ftr = 0.0;
  for (int a = 0; a < n; ++a) w.Ftr += w.Fv(a, a);

  w.Sd = covdiff(side.L, side.L.sym(), 1, x, o.mode);
  w.omd = covdiff(side.L, side.omega, 1, x, o.mode);
  w.thd = covdiff(side.L, side.thomas, 1, x, o.mode);
  w.Fd1 = covdiff(side.L, side.inst.F, 1, x, o.mode);
  w.sd = covdiff(side.L, side.inst.sigma, 1, x, o.mode);
  w.Fdth = side.inst.theta == 1 ? w.Fd1 : covdiff(side.L, side.inst.F, side.inst.theta, x, o.mode);
  w.ctr_d = formal_contraction_deriv(side.L, x, o.mode);
  w.str_d = formal_contraction_deriv(side.L, side.sym_trace, x, o.mode);
  w.ctr_plain.resize(n, n);
  {
    Expr ftr_expr = Expr::constant(0.0);
    for (int a = 0; a < n; ++a) ftr_expr += side.inst.F.components()(a, a);
    w.Ftr_d.resize(n);
    for (int k = 0; k < n; ++k) {
      Values pk = partial_tensor(side.L.trace(), k, x, o.mode);
      for (int j = 0; j < n; ++j) w.ctr_plain(j, k) = pk(j);
      w.Ftr_d(k) = o.mode.is_exact() ? ftr_expr.diff(k + 1).eval(x, cache)
                                     : diff_fd(ftr_expr, k + 1, x, o.mode.h);
    }
  }
  w.Fdiv1.resize(n);
  w.Fdivth.resize(n);
  for (int j = 0; j < n; ++j) {
    double a1 = 0.0, at = 0.0;
    for (int a = 0; a < n; ++a) {
      a1 += w.Fd1(a, j, a);
      at += w.Fdth(a, j, a);
    }
    w.Fdiv1(j) = a1;
    w.Fdivth(j) = at;
  }
  w.sfblk.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double v = w.sd(j, k) * w.Ftr;
      for (int a = 0; a < n; ++a) v += w.sd(a, k) * w.Fv(a, j) + w.sv(a) * w.Fd1(a, j, k);
      w.sfblk(j, k) = v;
    }
  w.mf.resize(n);
  for (int k = 0; k < n; ++k) {
    double v = w.muv(k) * w.Ftr;
    for (int a = 0; a < n; ++a) v += w.muv(a) * w.Fv(a, k);
    w.mf(k) = v - w.Fdiv1(k);
  }
  if (alt_conn) {
    w.sd_alt = covdiff(*alt_conn, side.inst.sigma, 1, x, o.mode);
    w.Fd1_alt = covdiff(*alt_conn, side.inst.F, 1, x, o.mode);
  }
  w.Rp = curvature_paper(side.L, x, o.mode);
  w.Rs = curvature_std(side.L, x, o.mode);
  w.ric_p = ricci(w.Rp);
  w.ric_s = ricci(w.Rs);
  w.Fs = f_script(side, x, o.mode);
  w.ftr2 = f_trace(w.Fs);
  w.rho = rho_hat(side, x, o.mode);
  return w;
}

struct CheckDef {
  const char* id;
  const char* eq_ref;
  bool algebraic;
  std::vector<std::string> readings;  // empty when none
};

struct Accum {
  CheckDef def;
  std::vector<ResTracker> tr;  // one per reading (or a single one)
  explicit Accum(CheckDef d) : def(std::move(d)) {
    tr.resize(def.readings.empty() ? 1 : def.readings.size());
  }
};

}  // namespace

AuditReport run_audit(const ConnectionField& L, const MappingInstance& inst, const Grid& grid,
                      const AuditOptions& opts) {
  const int n = L.dim();
  MappingSide src = make_side(L, inst);
  ConnectionField Lbar = deform(L, inst);
  // No validation gate here: a corrupted instance must still produce a
  // report, with the failure localized by the checks themselves.
  MappingInstance inv = invert_instance(L, inst, grid, std::numeric_limits<double>::infinity());
  MappingSide tgt = make_side(Lbar, inv);

  const double e = static_cast<double>(inst.e);
  const bool paper_selected = opts.curvature == CurvatureMode::Paper;

  std::vector<Accum> acc;
  auto add = [&](const char* id, const char* ref, bool algebraic,
                 std::vector<std::string> readings = {}) {
    acc.emplace_back(CheckDef{id, ref, algebraic, std::move(readings)});
  };
  add("A1", "affinor reciprocity F.F = e I", true);
  add("A2", "basic equation of the mapping", true);
  add("A3", "trace of the basic equation", true);
  add("A4", "psi recovery from connection traces", true);
  add("A5", "generalized Thomas parameter invariance", true);
  add("A6", "deformation of the symmetric part", true);
  add("A7", "symmetrized Thomas parameter equals sym minus omega", true);
  add("A8", "deformation rule for the U derivative", false);
  add("A9", "deformation rule for the sym-part derivative", false);
  add("A10", "sym-torsion product deformation, upper contraction", false);
  add("A11", "sym-torsion product deformation, lower contraction", false);
  add("A12", "omega derivative expansion", false, {"contracted-covector", "plain-partial"});
  add("A13", "delta-hat decomposition via rho-hat", false);
  add("A14", "sym-part derivative via nu-hat", false, {"barred-derivatives", "source-derivatives"});
  add("A15", "curvature deformation via nu-hat", false,
      {"barred-derivatives", "source-derivatives"});
  add("A16", "Ricci deformation via nu-hat", false);
  add("A17", "alternated Ricci relation", false);
  add("A18", "nu-hat from Ricci and deformation traces", false,
      {"plain-trace", "alternated-trace"});
  add("A19", "Weyl-type invariance", false, {"alternated-trace", "plain-trace"});
  add("A20", "curvature mode difference identity", false);
  add("A21", "Weyl-type invariance under both curvature modes", false);
  acc.back().tr.resize(2);  // one tracker per curvature mode
  auto find = [&](const char* id) -> Accum& {
    for (auto& a : acc)
      if (a.def.id == std::string_view(id)) return a;
    throw std::logic_error("unknown check id");
  };

  for (const Point& x : grid.points) {
    SideWs ws = make_ws(src, nullptr, x, opts);
    SideWs wt = make_ws(tgt, &src.L, x, opts);

    // A1
    {
      ResTracker& t = find("A1").tr[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = -(i == j ? e : 0.0);
          for (int a = 0; a < n; ++a) v += ws.Fv(i, a) * ws.Fv(a, j);
          t.update(std::abs(v), x, {i, j});
        }
    }
    // A2
    {
      ResTracker& t = find("A2").tr[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            double v = ws.Fdth(i, j, k) + ws.Fdth(i, k, j) - ws.muv(j) * ws.Fv(i, k) -
                       ws.muv(k) * ws.Fv(i, j);
            if (i == k) v -= ws.nuv(j) - e * ws.sv(j);
            if (i == j) v -= ws.nuv(k) - e * ws.sv(k);
            t.update(std::abs(v), x, {i, j, k});
          }
    }
    // A3
    {
      ResTracker& t = find("A3").tr[0];
      for (int j = 0; j < n; ++j) {
        double v = ws.Ftr_d(j) - ws.muv(j) * ws.Ftr - (n + 1.0) * (ws.nuv(j) - e * ws.sv(j));
        for (int a = 0; a < n; ++a) v -= ws.muv(a) * ws.Fv(a, j);
        v += ws.Fdivth(j);
        t.update(std::abs(v), x, {j});
      }
    }
    // A4
    {
      ResTracker& t = find("A4").tr[0];
      for (int j = 0; j < n; ++j) {
        double sF = 0.0, sFb = 0.0;
        for (int a = 0; a < n; ++a) {
          sF += ws.sv(a) * ws.Fv(a, j);
          sFb += wt.sv(a) * wt.Fv(a, j);
        }
        double rhs = (wt.cv(j) - ws.cv(j)) / (n + 1.0) +
                     ((wt.sv(j) * wt.Ftr + sFb) - (ws.sv(j) * ws.Ftr + sF)) / (2.0 * (n + 1.0));
        t.update(std::abs(ws.psv(j) - rhs), x, {j});
      }
    }
    // A5
    {
      ResTracker& t = find("A5").tr[0];
      MaxAbs m = max_abs_diff(wt.thv, ws.thv);
      t.update(m.value, x, m.index);
    }
    // A6
    {
      ResTracker& t = find("A6").tr[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            double v = wt.Sv(i, j, k) - ws.Sv(i, j, k) - wt.omv(i, j, k) + ws.omv(i, j, k);
            t.update(std::abs(v), x, {i, j, k});
          }
    }
    // A7
    {
      ResTracker& t = find("A7").tr[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            double v = ws.uv(i, j, k) - (ws.Sv(i, j, k) - ws.omv(i, j, k));
            t.update(std::abs(v), x, {i, j, k});
          }
    }
    // six-term correction block shared by A8/A9/A14
    auto six = [&](int i, int j, int m, int nn) {
      double v = 0.0;
      for (int a = 0; a < n; ++a) {
        v += wt.Sv(i, a, nn) * wt.uv(a, j, m) - wt.Sv(a, j, nn) * wt.uv(i, a, m) -
             wt.Sv(a, m, nn) * wt.uv(i, j, a);
        v += -ws.Sv(i, a, nn) * ws.uv(a, j, m) + ws.Sv(a, j, nn) * ws.uv(i, a, m) +
             ws.Sv(a, m, nn) * ws.uv(i, j, a);
      }
      return v;
    };
    // A8
    {
      ResTracker& t = find("A8").tr[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int m = 0; m < n; ++m)
            for (int nn = 0; nn < n; ++nn) {
              double lhs = 0.5 * (wt.thd(i, j, m, nn) + wt.thd(i, m, j, nn));
              double rhs = 0.5 * (ws.thd(i, j, m, nn) + ws.thd(i, m, j, nn)) + six(i, j, m, nn);
              t.update(std::abs(lhs - rhs), x, {i, j, m, nn});
            }
    }
    // A9
    {
      ResTracker& t = find("A9").tr[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int m = 0; m < n; ++m)
            for (int nn = 0; nn < n; ++nn) {
              double rhs = ws.Sd(i, j, m, nn) + wt.omd(i, j, m, nn) - ws.omd(i, j, m, nn) +
                           six(i, j, m, nn);
              t.update(std::abs(wt.Sd(i, j, m, nn) - rhs), x, {i, j, m, nn});
            }
    }
    // A10 / A11
    {
      ResTracker& t10 = find("A10").tr[0];
      ResTracker& t11 = find("A11").tr[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int m = 0; m < n; ++m)
            for (int nn = 0; nn < n; ++nn) {
              double v10 = 0.0, v11 = 0.0;
              for (int a = 0; a < n; ++a) {
                v10 += wt.Sv(a, j, m) * wt.Tv(i, a, nn) - ws.Sv(a, j, m) * ws.Tv(i, a, nn) -
                       (wt.omv(a, j, m) - ws.omv(a, j, m)) * ws.Tv(i, a, nn);
                v11 += wt.Sv(i, j, a) * wt.Tv(a, m, nn) - ws.Sv(i, j, a) * ws.Tv(a, m, nn) -
                       (wt.omv(i, j, a) - ws.omv(i, j, a)) * ws.Tv(a, m, nn);
              }
              t10.update(std::abs(v10), x, {i, j, m, nn});
              t11.update(std::abs(v11), x, {i, j, m, nn});
            }
    }
    // A12
    {
      Accum& a12 = find("A12");
      for (int rd = 0; rd < 2; ++rd) {
        if (opts.force_a12 && *opts.force_a12 != rd) continue;
        const Eigen::MatrixXd& ctr = rd == 0 ? ws.ctr_d : ws.ctr_plain;
        ResTracker& t = a12.tr[rd];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int m = 0; m < n; ++m)
              for (int nn = 0; nn < n; ++nn) {
                double rhs = -0.5 * (ws.sd(j, nn) * ws.Fv(i, m) + ws.sd(m, nn) * ws.Fv(i, j) +
                                     ws.sv(j) * ws.Fd1(i, m, nn) + ws.sv(m) * ws.Fd1(i, j, nn));
                if (i == m)
                  rhs += ctr(j, nn) / (n + 1.0) +
                         0.5 * (ws.nuv(nn) - e * ws.sv(nn)) * ws.sv(j) +
                         ws.sfblk(j, nn) / (2.0 * (n + 1.0)) +
                         ws.mf(nn) * ws.sv(j) / (2.0 * (n + 1.0));
                if (i == j)
                  rhs += ctr(m, nn) / (n + 1.0) +
                         0.5 * (ws.nuv(nn) - e * ws.sv(nn)) * ws.sv(m) +
                         ws.sfblk(m, nn) / (2.0 * (n + 1.0)) +
                         ws.mf(nn) * ws.sv(m) / (2.0 * (n + 1.0));
                t.update(std::abs(ws.omd(i, j, m, nn) - rhs), x, {i, j, m, nn});
              }
      }
    }
    // A13
    {
      ResTracker& t = find("A13").tr[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int m = 0; m < n; ++m)
            for (int nn = 0; nn < n; ++nn) {
              double lhs = wt.omd(i, j, m, nn) - ws.omd(i, j, m, nn);
              double rhs = wt.rho(i, j, m, nn) - ws.rho(i, j, m, nn);
              if (i == m) rhs += (wt.str_d(j, nn) - ws.str_d(j, nn)) / (n + 1.0);
              if (i == j) rhs += (wt.str_d(m, nn) - ws.str_d(m, nn)) / (n + 1.0);
              t.update(std::abs(lhs - rhs), x, {i, j, m, nn});
            }
    }
    // nu-hat variants used by A14..A18
    Eigen::MatrixXd nuh[2];
    for (int rd = 0; rd < 2; ++rd) {
      const Values& bsd = rd == 0 ? wt.sd : wt.sd_alt;
      const Values& bFd = rd == 0 ? wt.Fd1 : wt.Fd1_alt;
      Eigen::VectorXd bFdiv(n), bsf(n), bmfv(n);
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < n; ++a) v += bFd(a, j, a);
        bFdiv(j) = v;
      }
      Eigen::MatrixXd out(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          // barred half
          double v = -wt.str_d(i, j) / (n + 1.0);
          for (int b = 0; b < n; ++b) v += wt.Lv(b, i, j) * wt.ttr(b);
          v -= (wt.nuv(j) - e * wt.sv(j)) * wt.sv(i);
          double blk = bsd(i, j) * wt.Ftr;
          for (int a = 0; a < n; ++a) blk += bsd(a, j) * wt.Fv(a, i) + wt.sv(a) * bFd(a, i, j);
          v += blk / (2.0 * (n + 1.0));
          double mfb = wt.muv(j) * wt.Ftr;
          for (int a = 0; a < n; ++a) mfb += wt.muv(a) * wt.Fv(a, j);
          mfb -= bFdiv(j);
          v -= mfb * wt.sv(i) / (2.0 * (n + 1.0));
          // unbarred half, opposite signs
          v += ws.str_d(i, j) / (n + 1.0);
          for (int b = 0; b < n; ++b) v -= ws.Lv(b, i, j) * ws.ttr(b);
          v += (ws.nuv(j) - e * ws.sv(j)) * ws.sv(i);
          v -= ws.sfblk(i, j) / (2.0 * (n + 1.0));
          v += ws.mf(j) * ws.sv(i) / (2.0 * (n + 1.0));
          out(i, j) = v;
        }
      nuh[rd] = std::move(out);
    }
    // A14
    {
      Accum& a14 = find("A14");
      for (int rd = 0; rd < 2; ++rd) {
        if (opts.force_nu_hat && *opts.force_nu_hat != rd) continue;
        const Eigen::MatrixXd& nh = nuh[rd];
        const Values& bsd = rd == 0 ? wt.sd : wt.sd_alt;
        const Values& bFd = rd == 0 ? wt.Fd1 : wt.Fd1_alt;
        ResTracker& t = a14.tr[rd];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int m = 0; m < n; ++m)
              for (int nn = 0; nn < n; ++nn) {
                double rhs = ws.Sd(i, j, m, nn) + six(i, j, m, nn);
                if (i == m) rhs -= nh(j, nn);
                if (i == j) rhs -= nh(m, nn);
                rhs -= 0.5 * (bsd(j, nn) * wt.Fv(i, m) + bsd(m, nn) * wt.Fv(i, j) +
                              wt.sv(j) * bFd(i, m, nn) + wt.sv(m) * bFd(i, j, nn));
                rhs += 0.5 * (ws.sd(j, nn) * ws.Fv(i, m) + ws.sd(m, nn) * ws.Fv(i, j) +
                              ws.sv(j) * ws.Fd1(i, m, nn) + ws.sv(m) * ws.Fd1(i, j, nn));
                t.update(std::abs(wt.Sd(i, j, m, nn) - rhs), x, {i, j, m, nn});
              }
      }
    }
    const Values& Rsel_s = paper_selected ? ws.Rp : ws.Rs;
    const Values& Rsel_t = paper_selected ? wt.Rp : wt.Rs;
    const Eigen::MatrixXd& ric_s = paper_selected ? ws.ric_p : ws.ric_s;
    const Eigen::MatrixXd& ric_t = paper_selected ? wt.ric_p : wt.ric_s;
    // A15
    {
      Accum& a15 = find("A15");
      for (int rd = 0; rd < 2; ++rd) {
        if (opts.force_nu_hat && *opts.force_nu_hat != rd) continue;
        const Eigen::MatrixXd& nh = nuh[rd];
        ResTracker& t = a15.tr[rd];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int m = 0; m < n; ++m)
              for (int nn = 0; nn < n; ++nn) {
                double rhs = Rsel_s(i, j, m, nn) + ws.Fs(i, j, m, nn) - wt.Fs(i, j, m, nn);
                if (i == m) rhs -= nh(j, nn);
                if (i == nn) rhs += nh(j, m);
                if (i == j) rhs -= nh(m, nn) - nh(nn, m);
                t.update(std::abs(Rsel_t(i, j, m, nn) - rhs), x, {i, j, m, nn});
              }
      }
    }
    // A16
    {
      ResTracker& t = find("A16").tr[0];
      const Eigen::MatrixXd& nh = nuh[opts.force_nu_hat.value_or(0)];
      for (int j = 0; j < n; ++j)
        for (int m = 0; m < n; ++m) {
          double rhs = ric_s(j, m) + (n - 1.0) * nh(j, m) + (nh(j, m) - nh(m, j)) +
                       ws.ftr2(j, m) - wt.ftr2(j, m);
          t.update(std::abs(ric_t(j, m) - rhs), x, {j, m});
        }
    }
    // A17
    {
      ResTracker& t = find("A17").tr[0];
      const Eigen::MatrixXd& nh = nuh[opts.force_nu_hat.value_or(0)];
      for (int j = 0; j < n; ++j)
        for (int m = 0; m < n; ++m) {
          double lhs = (n + 1.0) * (nh(j, m) - nh(m, j));
          double rhs = (ric_t(j, m) - ric_t(m, j)) - (ric_s(j, m) - ric_s(m, j)) -
                       (ws.ftr2(j, m) - ws.ftr2(m, j)) + (wt.ftr2(j, m) - wt.ftr2(m, j));
          t.update(std::abs(lhs - rhs), x, {j, m});
        }
    }
    // A18
    {
      Accum& a18 = find("A18");
      const Eigen::MatrixXd& nh = nuh[opts.force_nu_hat.value_or(0)];
      for (int rd = 0; rd < 2; ++rd) {
        if (opts.force_a18 && *opts.force_a18 != rd) continue;
        ResTracker& t = a18.tr[rd];
        for (int j = 0; j < n; ++j)
          for (int m = 0; m < n; ++m) {
            double lhs = (static_cast<double>(n) * n - 1.0) * nh(j, m);
            double rhs = n * (ric_t(j, m) - ric_s(j, m)) + (ric_t(m, j) - ric_s(m, j));
            if (rd == 0) {
              rhs += n * (wt.ftr2(j, m) - ws.ftr2(j, m)) + (wt.ftr2(m, j) - ws.ftr2(m, j));
            } else {
              rhs += n * ((wt.ftr2(j, m) - wt.ftr2(m, j)) - (ws.ftr2(j, m) - ws.ftr2(m, j)));
              rhs += (wt.ftr2(m, j) - wt.ftr2(j, m)) - (ws.ftr2(m, j) - ws.ftr2(j, m));
            }
            t.update(std::abs(lhs - rhs), x, {j, m});
          }
      }
    }
    // Weyl combination from workspace pieces
    auto weyl_ws = [&](const SideWs& w, bool paper, int rd) {
      const Values& R = paper ? w.Rp : w.Rs;
      const Eigen::MatrixXd& ric = paper ? w.ric_p : w.ric_s;
      const double np1 = n + 1.0;
      const double n2m1 = static_cast<double>(n) * n - 1.0;
      Values out(std::vector<int>{n, n, n, n});
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int m = 0; m < n; ++m)
            for (int nn = 0; nn < n; ++nn) {
              double v = R(i, j, m, nn) + w.Fs(i, j, m, nn);
              if (i == j) {
                v += (ric(m, nn) - ric(nn, m)) / np1;
                v += (rd == 0 ? w.ftr2(m, nn) - w.ftr2(nn, m) : w.ftr2(m, nn)) / np1;
              }
              if (i == m) v += (n * ric(j, nn) + ric(nn, j) + n * w.ftr2(j, nn) + w.ftr2(nn, j)) / n2m1;
              if (i == nn) v -= (n * ric(j, m) + ric(m, j) + n * w.ftr2(j, m) + w.ftr2(m, j)) / n2m1;
              out(i, j, m, nn) = v;
            }
      return out;
    };
    // A19
    {
      Accum& a19 = find("A19");
      for (int rd = 0; rd < 2; ++rd) {
        if (opts.force_a19 && *opts.force_a19 != rd) continue;
        Values Wsrc = weyl_ws(ws, paper_selected, rd);
        Values Wtgt = weyl_ws(wt, paper_selected, rd);
        MaxAbs m = max_abs_diff(Wtgt, Wsrc);
        a19.tr[rd].update(m.value, x, m.index);
      }
    }
    // A20
    {
      ResTracker& t = find("A20").tr[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int m = 0; m < n; ++m)
            for (int nn = 0; nn < n; ++nn) {
              double quad = 0.0;
              for (int a = 0; a < n; ++a)
                quad += ws.Sv(a, j, m) * ws.Sv(i, a, nn) - ws.Sv(a, j, nn) * ws.Sv(i, a, m);
              double v = ws.Rp(i, j, m, nn) - ws.Rs(i, j, m, nn) - quad;
              t.update(std::abs(v), x, {i, j, m, nn});
            }
    }
    // A21: both curvature modes, best trace reading each; tr[0] = paper,
    // tr[1] = standard
    {
      Accum& a21 = find("A21");
      for (int mode_i = 0; mode_i < 2; ++mode_i) {
        const bool paper = mode_i == 0;
        double best = std::numeric_limits<double>::infinity();
        MaxAbs bm;
        for (int rd = 0; rd < 2; ++rd) {
          Values Wsrc = weyl_ws(ws, paper, rd);
          Values Wtgt = weyl_ws(wt, paper, rd);
          MaxAbs m = max_abs_diff(Wtgt, Wsrc);
          if (m.value < best) {
            best = m.value;
            bm = m;
          }
        }
        a21.tr[mode_i].update(best, x, bm.index);
      }
    }
  }

  // assemble the report
  AuditReport report;
  bool failed_before = false;
  for (Accum& a : acc) {
    IdentityCheck c;
    c.id = a.def.id;
    c.eq_ref = a.def.eq_ref;
    const double tol = a.def.algebraic ? opts.tol_algebraic : opts.tol_derivative;
    std::size_t pick = 0;
    if (a.tr.size() > 1 && c.id != "A21") {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < a.tr.size(); ++r) {
        if (a.tr[r].value < 0) continue;  // reading not evaluated (forced off)
        if (a.tr[r].residual() < best) {
          best = a.tr[r].residual();
          pick = r;
        }
      }
    }
    if (c.id == "A21") {
      c.residual = a.tr[0].residual();
      c.argmax_point = a.tr[0].at;
      c.argmax_index = a.tr[0].index;
      std::ostringstream os;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", a.tr[0].residual());
      os << "paper=" << buf;
      std::snprintf(buf, sizeof buf, "%.17g", a.tr[1].residual());
      os << " standard=" << buf;
      c.reading = os.str();
      c.pass = c.residual <= tol;
    } else {
      c.residual = a.tr[pick].residual();
      c.argmax_point = a.tr[pick].at;
      c.argmax_index = a.tr[pick].index;
      if (!a.def.readings.empty()) c.reading = a.def.readings[pick];
      c.pass = c.residual <= tol;
    }
    if (!c.pass && failed_before) c.inherited = true;
    if (!c.pass) failed_before = true;
    report.checks.push_back(std::move(c));
  }
  report.all_pass = true;
  for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
  const IdentityCheck* loc = localize_failure(report);
  if (loc == nullptr) {
    report.summary = "all pass";
  } else {
    std::ostringstream os;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", loc->residual);
    os << "first failure: " << loc->id << " (" << loc->eq_ref << "), residual " << buf;
    report.summary = os.str();
  }
  return report;
}

const IdentityCheck* localize_failure(const AuditReport& report) {
  for (const auto& c : report.checks)
    if (!c.pass) return &c;
  return nullptr;
}

}  // namespace agm
