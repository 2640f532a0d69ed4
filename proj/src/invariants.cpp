#include "agm/invariants.hpp"

#include <cmath>
#include <sstream>

namespace agm {

namespace {

TensorField sym_trace_field(const ConnectionField& L) {
  const int n = L.dim();
  Tensor<Expr> c(std::vector<int>{n});
  for (int j = 0; j < n; ++j) {
    Expr sum = Expr::constant(0.0);
    for (int a = 0; a < n; ++a) sum += L.sym().components()(a, j, a);
    c(j) = sum;
  }
  return TensorField(n, {0, 1}, std::move(c));
}

Expr affinor_trace(const TensorField& F) {
  Expr t = Expr::constant(0.0);
  for (int a = 0; a < F.dim(); ++a) t += F.components()(a, a);
  return t;
}

}  // namespace

TensorField omega_field(const ConnectionField& L, const MappingInstance& inst) {
  const int n = L.dim();
  const auto& sig = inst.sigma.components();
  const auto& F = inst.F.components();
  const auto& c = L.trace().components();
  const Expr half = Expr::constant(0.5);
  const Expr inv_np1 = Expr::constant(1.0 / (n + 1));
  const Expr inv_2np1 = Expr::constant(0.5 / (n + 1));
  Expr Ftr = affinor_trace(inst.F);
  std::vector<Expr> sigF(n);
  for (int j = 0; j < n; ++j) {
    Expr s = Expr::constant(0.0);
    for (int a = 0; a < n; ++a) s += sig(a) * F(a, j);
    sigF[j] = s;
  }
  Tensor<Expr> om(std::vector<int>{n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Expr v = -(half * (sig(j) * F(i, k) + sig(k) * F(i, j)));
        if (i == k) v += inv_np1 * c(j) + inv_2np1 * (sig(j) * Ftr + sigF[j]);
        if (i == j) v += inv_np1 * c(k) + inv_2np1 * (sig(k) * Ftr + sigF[k]);
        om(i, j, k) = v;
      }
  return TensorField(n, {1, 2}, std::move(om));
}

MappingSide make_side(ConnectionField L, MappingInstance inst) {
  MappingSide side;
  side.omega = omega_field(L, inst);
  const int n = L.dim();
  Tensor<Expr> th(std::vector<int>{n, n, n});
  Tensor<Expr> us(std::vector<int>{n, n, n});
  const Expr half = Expr::constant(0.5);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        th(i, j, k) = L.coeffs().components()(i, j, k) - side.omega.components()(i, j, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) us(i, j, k) = half * (th(i, j, k) + th(i, k, j));
  side.thomas = TensorField(n, {1, 2}, std::move(th));
  side.usym = TensorField(n, {1, 2}, std::move(us));
  side.sym_trace = sym_trace_field(L);
  side.L = std::move(L);
  side.inst = std::move(inst);
  return side;
}

Values omega(const ConnectionField& L, const MappingInstance& inst, const Point& x) {
  return omega_field(L, inst).eval(x);
}

Values thomas_pi2(const ConnectionField& L, const MappingInstance& inst, const Point& x) {
  EvalCache cache;
  Values om = omega_field(L, inst).eval(x, cache);
  Values Lv = L.coeffs().eval(x, cache);
  return Lv - om;
}

Values u_sym(const ConnectionField& L, const MappingInstance& inst, const Point& x) {
  Values th = thomas_pi2(L, inst, x);
  const int n = L.dim();
  Values out(std::vector<int>{n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j, k) = 0.5 * (th(i, j, k) + th(i, k, j));
  return out;
}

Values t1(const ConnectionField& L, const MappingInstance& inst, const Point& x) {
  const int n = L.dim();
  EvalCache cache;
  Values Sv = L.sym().eval(x, cache);
  Values Fv = inst.F.eval(x, cache);
  double Ftr = 0.0;
  for (int a = 0; a < n; ++a) Ftr += Fv(a, a);
  const double denom = inst.e - Ftr * Ftr;
  if (std::abs(denom) < 1e-12) {
    std::ostringstream os;
    os << "degenerate affinor: e - F^2 = " << denom << " at the evaluation point";
    throw DegenerateAffinorError(os.str());
  }
  Eigen::VectorXd s(n);
  for (int k = 0; k < n; ++k) {
    double v = 0.0;
    for (int a = 0; a < n; ++a) v += Sv(a, k, a);
    s(k) = v;
  }
  Eigen::VectorXd term(n);
  for (int k = 0; k < n; ++k) {
    double fs = 0.0;
    for (int a = 0; a < n; ++a) fs += Fv(a, k) * s(a);
    term(k) = Ftr * s(k) - fs;
  }
  Values out(std::vector<int>{n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        out(i, j, k) = Sv(i, j, k) - (term(k) * Fv(i, j) + term(j) * Fv(i, k)) / denom;
  return out;
}

Values t2hat(const ConnectionField& L, const MappingInstance& inst, const Point& x, DerivMode mode,
             T2Reading reading) {
  const int n = L.dim();
  EvalCache cache;
  Values Sv = L.sym().eval(x, cache);
  Values Tv = L.torsion().eval(x, cache);
  Values Fv = inst.F.eval(x, cache);
  Values Fd = covdiff(L, inst.F, 1, x, mode);
  const double e = inst.e;
  Eigen::VectorXd s(n);
  for (int k = 0; k < n; ++k) {
    double v = 0.0;
    for (int a = 0; a < n; ++a) v += Sv(a, k, a);
    s(k) = v;
  }
  // torsion-affinor block with the printed symmetrization scope applied to
  // the (second, free) index pair, or not at all
  auto tf = [&](int al, int be, int j) {
    double v = 0.0;
    for (int ga = 0; ga < n; ++ga) {
      v += Tv(al, ga, be) * Fv(ga, j);
      if (reading == T2Reading::SymmetrizePair) v += Tv(al, ga, j) * Fv(ga, be);
    }
    return v;
  };
  Values out(std::vector<int>{n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = Sv(i, j, k) - (s(j) * (i == k ? 1.0 : 0.0) + s(k) * (i == j ? 1.0 : 0.0)) / (n + 1.0);
        for (int a = 0; a < n; ++a) {
          double inner = Fd(a, j, k) + Fd(a, k, j);
          inner -= tf(a, k, j);  // pairs (k, j) symmetrized per reading
          v += e * Fv(i, a) * inner;
        }
        double corr_j = 0.0, corr_k = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            corr_j += Fv(b, a) * (Fd(a, b, j) - tf(a, b, j));
            corr_k += Fv(b, a) * (Fd(a, b, k) - tf(a, b, k));
          }
        if (i == k) v -= e / (1.0 + n) * corr_j;
        if (i == j) v -= e / (1.0 + n) * corr_k;
        out(i, j, k) = v;
      }
  return out;
}

Values f_script(const MappingSide& side, const Point& x, DerivMode mode) {
  const int n = side.L.dim();
  EvalCache cache;
  Values Lv = side.L.coeffs().eval(x, cache);
  Values Sv = side.L.sym().eval(x, cache);
  Values Tv = side.L.torsion().eval(x, cache);
  Values omv = side.omega.eval(x, cache);
  Values Fv = side.inst.F.eval(x, cache);
  Values sv = side.inst.sigma.eval(x, cache);
  Values Fd = covdiff(side.L, side.inst.F, 1, x, mode);
  Values sd = covdiff(side.L, side.inst.sigma, 1, x, mode);
  Values out(std::vector<int>{n, n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int nn = 0; nn < n; ++nn) {
          double v = 0.5 * (sd(j, nn) * Fv(i, m) + sd(m, nn) * Fv(i, j) + sv(j) * Fd(i, m, nn) +
                            sv(m) * Fd(i, j, nn));
          v -= 0.5 * (sd(j, m) * Fv(i, nn) + sd(nn, m) * Fv(i, j) + sv(j) * Fd(i, nn, m) +
                      sv(nn) * Fd(i, j, m));
          for (int a = 0; a < n; ++a) {
            v += -2.0 * Sv(i, a, nn) * Sv(a, j, m) + 2.0 * Sv(a, j, nn) * Sv(i, a, m);
            v += omv(a, j, m) * Lv(i, a, nn) + omv(i, a, nn) * Lv(a, j, m) -
                 omv(i, a, m) * Lv(a, j, nn) - omv(a, j, nn) * Lv(i, a, m);
            v -= 2.0 * omv(i, j, a) * Tv(a, m, nn);
          }
          out(i, j, m, nn) = v;
        }
  return out;
}

Eigen::MatrixXd f_trace(const Values& f) {
  if (f.rank() != 4) throw std::invalid_argument("f_trace expects a rank-4 array");
  const int n = f.shape()[0];
  Eigen::MatrixXd out(n, n);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m) {
      double v = 0.0;
      for (int a = 0; a < n; ++a) v += f(a, j, m, a);
      out(j, m) = v;
    }
  return out;
}

namespace {

// The half of nu-hat contributed by one space; the barred half enters with
// the opposite overall sign. deriv_conn selects the connection used for the
// sigma/F derivative blocks (the reading hook); the symmetric-trace block
// always differentiates in its own space.
Eigen::MatrixXd nu_hat_half(const MappingSide& side, const ConnectionField& deriv_conn,
                            const Point& x, DerivMode mode) {
  const int n = side.L.dim();
  EvalCache cache;
  Values Lv = side.L.coeffs().eval(x, cache);
  Values Tv = side.L.torsion().eval(x, cache);
  Values Fv = side.inst.F.eval(x, cache);
  Values sv = side.inst.sigma.eval(x, cache);
  Eigen::VectorXd mu = side.inst.mu.eval(x, mode);
  Eigen::VectorXd nu = side.inst.nu.eval(x, mode);
  Eigen::MatrixXd strace_d = formal_contraction_deriv(side.L, side.sym_trace, x, mode);
  Values sd = covdiff(deriv_conn, side.inst.sigma, 1, x, mode);
  Values Fd = covdiff(deriv_conn, side.inst.F, 1, x, mode);
  const double e = side.inst.e;
  double Ftr = 0.0;
  for (int a = 0; a < n; ++a) Ftr += Fv(a, a);
  Eigen::VectorXd ttr(n);
  for (int b = 0; b < n; ++b) {
    double v = 0.0;
    for (int a = 0; a < n; ++a) v += Tv(a, b, a);
    ttr(b) = v;
  }
  Eigen::VectorXd Fdiv(n);
  for (int j = 0; j < n; ++j) {
    double v = 0.0;
    for (int a = 0; a < n; ++a) v += Fd(a, j, a);
    Fdiv(j) = v;
  }
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = -strace_d(i, j) / (n + 1.0);
      for (int b = 0; b < n; ++b) v += Lv(b, i, j) * ttr(b);
      v -= (nu(j) - e * sv(j)) * sv(i);
      double blk = sd(i, j) * Ftr;
      for (int a = 0; a < n; ++a) blk += sd(a, j) * Fv(a, i) + sv(a) * Fd(a, i, j);
      v += blk / (2.0 * (n + 1.0));
      double mf = mu(j) * Ftr;
      for (int a = 0; a < n; ++a) mf += mu(a) * Fv(a, j);
      mf -= Fdiv(j);
      v -= mf * sv(i) / (2.0 * (n + 1.0));
      out(i, j) = v;
    }
  return out;
}

}  // namespace

Eigen::MatrixXd nu_hat(const MappingSide& src, const MappingSide& tgt, const Point& x,
                       DerivMode mode, NuHatReading reading) {
  const ConnectionField& barred_deriv_conn =
      reading == NuHatReading::BarredDerivatives ? tgt.L : src.L;
  return nu_hat_half(tgt, barred_deriv_conn, x, mode) - nu_hat_half(src, src.L, x, mode);
}

Values rho_hat(const MappingSide& side, const Point& x, DerivMode mode) {
  const int n = side.L.dim();
  EvalCache cache;
  Values Lv = side.L.coeffs().eval(x, cache);
  Values Tv = side.L.torsion().eval(x, cache);
  Values Fv = side.inst.F.eval(x, cache);
  Values sv = side.inst.sigma.eval(x, cache);
  Eigen::VectorXd mu = side.inst.mu.eval(x, mode);
  Eigen::VectorXd nu = side.inst.nu.eval(x, mode);
  Values sd = covdiff(side.L, side.inst.sigma, 1, x, mode);
  Values Fd = covdiff(side.L, side.inst.F, 1, x, mode);
  const double e = side.inst.e;
  double Ftr = 0.0;
  for (int a = 0; a < n; ++a) Ftr += Fv(a, a);
  Eigen::VectorXd ttr(n);
  for (int b = 0; b < n; ++b) {
    double v = 0.0;
    for (int a = 0; a < n; ++a) v += Tv(a, b, a);
    ttr(b) = v;
  }
  Eigen::VectorXd Fdiv(n);
  for (int j = 0; j < n; ++j) {
    double v = 0.0;
    for (int a = 0; a < n; ++a) v += Fd(a, j, a);
    Fdiv(j) = v;
  }
  // per-slot sigma/F derivative blocks, indexed by (slot j, derivative n)
  Eigen::MatrixXd sfblk(n, n);
  for (int j = 0; j < n; ++j)
    for (int nn = 0; nn < n; ++nn) {
      double v = sd(j, nn) * Ftr;
      for (int a = 0; a < n; ++a) v += sd(a, nn) * Fv(a, j) + sv(a) * Fd(a, j, nn);
      sfblk(j, nn) = v;
    }
  Eigen::VectorXd mf(n);
  for (int nn = 0; nn < n; ++nn) {
    double v = mu(nn) * Ftr;
    for (int a = 0; a < n; ++a) v += mu(a) * Fv(a, nn);
    mf(nn) = v - Fdiv(nn);
  }
  Values out(std::vector<int>{n, n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int nn = 0; nn < n; ++nn) {
          double v = -0.5 * (sd(j, nn) * Fv(i, m) + sd(m, nn) * Fv(i, j) + sv(j) * Fd(i, m, nn) +
                             sv(m) * Fd(i, j, nn));
          double lt_j = 0.0, lt_m = 0.0;
          for (int b = 0; b < n; ++b) {
            lt_j += Lv(b, j, nn) * ttr(b);
            lt_m += Lv(b, m, nn) * ttr(b);
          }
          if (i == m)
            v += -lt_j + 0.5 * (nu(nn) - e * sv(nn)) * sv(j) + sfblk(j, nn) / (2.0 * (n + 1.0)) +
                 mf(nn) * sv(j) / (2.0 * (n + 1.0));
          if (i == j)
            v += -lt_m + 0.5 * (nu(nn) - e * sv(nn)) * sv(m) + sfblk(m, nn) / (2.0 * (n + 1.0)) +
                 mf(nn) * sv(m) / (2.0 * (n + 1.0));
          out(i, j, m, nn) = v;
        }
  return out;
}

Values delta_hat(const MappingSide& src, const MappingSide& tgt, const Point& x, DerivMode mode) {
  Values a = covdiff(tgt.L, tgt.omega, 1, x, mode);
  Values b = covdiff(src.L, src.omega, 1, x, mode);
  return a - b;
}

Values weyl_pi2(const MappingSide& side, const Point& x, CurvatureMode cmode, DerivMode mode,
                WeylTraceReading reading) {
  const int n = side.L.dim();
  Values R = curvature(side.L, cmode, x, mode);
  Eigen::MatrixXd ric = ricci(R);
  Values Fs = f_script(side, x, mode);
  Eigen::MatrixXd Ft = f_trace(Fs);
  const double np1 = n + 1.0;
  const double n2m1 = static_cast<double>(n) * n - 1.0;
  Values out(std::vector<int>{n, n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int nn = 0; nn < n; ++nn) {
          double v = R(i, j, m, nn) + Fs(i, j, m, nn);
          if (i == j) {
            v += (ric(m, nn) - ric(nn, m)) / np1;
            v += (reading == WeylTraceReading::Alternated ? Ft(m, nn) - Ft(nn, m) : Ft(m, nn)) / np1;
          }
          if (i == m) {
            v += (n * ric(j, nn) + ric(nn, j)) / n2m1;
            v += (n * Ft(j, nn) + Ft(nn, j)) / n2m1;
          }
          if (i == nn) {
            v -= (n * ric(j, m) + ric(m, j)) / n2m1;
            v -= (n * Ft(j, m) + Ft(m, j)) / n2m1;
          }
          out(i, j, m, nn) = v;
        }
  return out;
}

}  // namespace agm
