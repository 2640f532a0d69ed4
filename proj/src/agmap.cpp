#include "agm/agmap.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Dense>

namespace agm {

namespace {

TensorField negate_field(const TensorField& f) {
  Tensor<Expr> out = f.components();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i];
  return TensorField(f.dim(), f.valence(), std::move(out));
}

Eigen::VectorXd eval_covector(const TensorField& f, const Point& x, EvalCache& cache) {
  Values v = f.eval(x, cache);
  Eigen::VectorXd out(f.dim());
  for (int j = 0; j < f.dim(); ++j) out(j) = v(j);
  return out;
}

}  // namespace

/// Shared state for pointwise least-squares realizations of (mu, nu).
class FitContext {
 public:
  FitContext(ConnectionField L, TensorField F, TensorField sigma, int e, int theta)
      : L_(std::move(L)), F_(std::move(F)), sigma_(std::move(sigma)), e_(e), theta_(theta) {}

  FitResult fit(const Point& x, DerivMode mode) const {
    Key key{std::vector<double>(x.data(), x.data() + x.size()),
            mode.is_exact() ? 0 : 1, mode.is_exact() ? 0.0 : mode.h};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    FitResult r = fit_mu_nu(L_, F_, sigma_, e_, theta_, x, mode);
    cache_.emplace(std::move(key), r);
    return r;
  }

 private:
  struct Key {
    std::vector<double> x;
    int kind;
    double h;
    bool operator<(const Key& o) const {
      if (x != o.x) return x < o.x;
      if (kind != o.kind) return kind < o.kind;
      return h < o.h;
    }
  };
  ConnectionField L_;
  TensorField F_, sigma_;
  int e_, theta_;
  mutable std::map<Key, FitResult> cache_;
};

CovectorProvider CovectorProvider::from_field(TensorField f) {
  CovectorProvider p;
  p.field_ = std::move(f);
  return p;
}

CovectorProvider CovectorProvider::fitted_mu(std::shared_ptr<const FitContext> ctx) {
  CovectorProvider p;
  p.ctx_ = std::move(ctx);
  p.want_mu_ = true;
  return p;
}

CovectorProvider CovectorProvider::fitted_nu(std::shared_ptr<const FitContext> ctx) {
  CovectorProvider p;
  p.ctx_ = std::move(ctx);
  p.want_mu_ = false;
  return p;
}

Eigen::VectorXd CovectorProvider::eval(const Point& x, DerivMode mode) const {
  if (ctx_) {
    FitResult r = ctx_->fit(x, mode);
    return want_mu_ ? r.mu : r.nu;
  }
  EvalCache cache;
  return eval_covector(field_, x, cache);
}

const TensorField& CovectorProvider::field() const {
  if (ctx_) throw std::logic_error("fitted covector has no expression components");
  return field_;
}

ConnectionField deform(const ConnectionField& L, const MappingInstance& inst) {
  const int n = L.dim();
  if (inst.dim() != n) throw std::invalid_argument("dimension mismatch");
  Tensor<Expr> out = L.coeffs().components();
  const auto& psi = inst.psi.components();
  const auto& sig = inst.sigma.components();
  const auto& F = inst.F.components();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Expr add = sig(j) * F(i, k) + sig(k) * F(i, j);
        if (i == k) add += psi(j);
        if (i == j) add += psi(k);
        out(i, j, k) += add;
      }
  return ConnectionField(TensorField(n, {1, 2}, std::move(out)));
}

double reciprocity_residual(const MappingInstance& inst, const Grid& grid) {
  const int n = inst.dim();
  double worst = 0.0;
  for (const Point& x : grid.points) {
    EvalCache cache;
    Values Fv = inst.F.eval(x, cache);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < n; ++a) v += Fv(i, a) * Fv(a, j);
        v -= inst.e * (i == j ? 1.0 : 0.0);
        worst = std::max(worst, std::abs(v));
      }
  }
  return worst;
}

namespace {

// Componentwise residual of the basic equations at one point; shared by
// basic_residual and fit_mu_nu's right-hand side assembly.
Values basic_lhs(const ConnectionField& L, const TensorField& F, int theta, const Point& x,
                 DerivMode mode) {
  const int n = L.dim();
  Values Fd = covdiff(L, F, theta, x, mode);
  Values out(std::vector<int>{n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j, k) = Fd(i, j, k) + Fd(i, k, j);
  return out;
}

}  // namespace

double basic_residual(const ConnectionField& L, const MappingInstance& inst, const Grid& grid,
                      DerivMode mode) {
  const int n = L.dim();
  double worst = 0.0;
  for (const Point& x : grid.points) {
    EvalCache cache;
    Values lhs = basic_lhs(L, inst.F, inst.theta, x, mode);
    Values Fv = inst.F.eval(x, cache);
    Eigen::VectorXd sig = eval_covector(inst.sigma, x, cache);
    Eigen::VectorXd mu = inst.mu.eval(x, mode);
    Eigen::VectorXd nu = inst.nu.eval(x, mode);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = lhs(i, j, k) - mu(j) * Fv(i, k) - mu(k) * Fv(i, j);
          if (i == k) v -= nu(j) - inst.e * sig(j);
          if (i == j) v -= nu(k) - inst.e * sig(k);
          worst = std::max(worst, std::abs(v));
        }
  }
  return worst;
}

namespace {

Expr trace_expr(const TensorField& F) {
  Expr t = Expr::constant(0.0);
  for (int a = 0; a < F.dim(); ++a) t += F.components()(a, a);
  return t;
}

}  // namespace

double contracted_residual(const ConnectionField& L, const MappingInstance& inst, const Grid& grid,
                           DerivMode mode) {
  const int n = L.dim();
  Expr Ftr = trace_expr(inst.F);
  std::vector<Expr> dFtr;
  for (int k = 1; k <= n; ++k) dFtr.push_back(Ftr.diff(k));
  double worst = 0.0;
  for (const Point& x : grid.points) {
    EvalCache cache;
    Values Fd = covdiff(L, inst.F, inst.theta, x, mode);
    Values Fv = inst.F.eval(x, cache);
    Eigen::VectorXd sig = eval_covector(inst.sigma, x, cache);
    Eigen::VectorXd mu = inst.mu.eval(x, mode);
    Eigen::VectorXd nu = inst.nu.eval(x, mode);
    double Ftrv = Ftr.eval(x, cache);
    for (int j = 0; j < n; ++j) {
      double dtr = mode.is_exact() ? dFtr[j].eval(x, cache) : diff_fd(Ftr, j + 1, x, mode.h);
      double v = dtr - mu(j) * Ftrv - (n + 1.0) * (nu(j) - inst.e * sig(j));
      for (int a = 0; a < n; ++a) v += -mu(a) * Fv(a, j) + Fd(a, j, a);
      worst = std::max(worst, std::abs(v));
    }
  }
  return worst;
}

double recover_psi(const ConnectionField& L, const ConnectionField& Lbar,
                   const MappingInstance& inst, const Grid& grid,
                   [[maybe_unused]] DerivMode mode) {
  const int n = L.dim();
  double worst = 0.0;
  for (const Point& x : grid.points) {
    EvalCache cache;
    Eigen::VectorXd c = eval_covector(L.trace(), x, cache);
    Eigen::VectorXd cb = eval_covector(Lbar.trace(), x, cache);
    Eigen::VectorXd sig = eval_covector(inst.sigma, x, cache);
    Eigen::VectorXd psi = eval_covector(inst.psi, x, cache);
    Values Fv = inst.F.eval(x, cache);
    double Ftrv = 0.0;
    for (int a = 0; a < n; ++a) Ftrv += Fv(a, a);
    for (int j = 0; j < n; ++j) {
      double sF = 0.0;
      for (int a = 0; a < n; ++a) sF += sig(a) * Fv(a, j);
      // barred data of the inverse mapping: sigma -> -sigma, F unchanged
      double barred = -sig(j) * Ftrv - sF;
      double unbarred = sig(j) * Ftrv + sF;
      double rhs = (cb(j) - c(j)) / (n + 1.0) + (barred - unbarred) / (2.0 * (n + 1.0));
      worst = std::max(worst, std::abs(psi(j) - rhs));
    }
  }
  return worst;
}

FitResult fit_mu_nu(const ConnectionField& L, const TensorField& F, const TensorField& sigma,
                    int e, int theta, const Point& x, DerivMode mode) {
  const int n = L.dim();
  EvalCache cache;
  Values lhs = basic_lhs(L, F, theta, x, mode);
  Values Fv = F.eval(x, cache);
  Eigen::VectorXd sig = eval_covector(sigma, x, cache);
  const int rows = n * n * (n + 1) / 2;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, 2 * n);
  Eigen::VectorXd b(rows);
  int r = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        b(r) = lhs(i, j, k) + e * (i == k ? sig(j) : 0.0) + e * (i == j ? sig(k) : 0.0);
        A(r, j) += Fv(i, k);
        A(r, k) += Fv(i, j);
        if (i == k) A(r, n + j) += 1.0;
        if (i == j) A(r, n + k) += 1.0;
        ++r;
      }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sol = svd.solve(b);
  FitResult out;
  out.mu = sol.head(n);
  out.nu = sol.tail(n);
  out.residual = (A * sol - b).cwiseAbs().maxCoeff();
  return out;
}

MappingInstance invert_instance(const ConnectionField& L, const MappingInstance& inst,
                                const Grid& grid, double tol) {
  ConnectionField Lbar = deform(L, inst);
  TensorField sigbar = negate_field(inst.sigma);
  auto ctx = std::make_shared<const FitContext>(Lbar, inst.F, sigbar, inst.e, inst.theta);
  MappingInstance inv;
  inv.psi = negate_field(inst.psi);
  inv.sigma = std::move(sigbar);
  inv.F = inst.F;
  inv.mu = CovectorProvider::fitted_mu(ctx);
  inv.nu = CovectorProvider::fitted_nu(ctx);
  inv.e = inst.e;
  inv.theta = inst.theta;
  double res = basic_residual(Lbar, inv, grid, DerivMode::exact());
  if (res > tol) {
    std::ostringstream os;
    os << "inverse-instance fit failed: barred basic-equation residual " << res
       << " exceeds tolerance " << tol;
    throw FitError(os.str(), res);
  }
  return inv;
}

Generated generate_instance(const GeneratorParams& params, const Grid& grid) {
  const int n = params.n;
  if (n < 2) throw GeneratorError("generator dimension must be >= 2");
  if (params.e != 0 && params.e != 1 && params.e != -1)
    throw GeneratorError("e must be one of 0, +1, -1");
  if (params.e == -1 && n % 2 != 0)
    throw GeneratorError("e = -1 requires an even dimension");
  if (params.F0.rows() != n || params.F0.cols() != n)
    throw GeneratorError("F0 must be an n-by-n matrix");
  Eigen::MatrixXd err = params.F0 * params.F0 - params.e * Eigen::MatrixXd::Identity(n, n);
  if (err.cwiseAbs().maxCoeff() > 1e-12) {
    std::ostringstream os;
    os << "F0*F0 differs from e*I by " << err.cwiseAbs().maxCoeff();
    throw GeneratorError(os.str());
  }
  auto parse_cov = [&](const std::vector<std::string>& texts, const char* name) {
    if (static_cast<int>(texts.size()) != n)
      throw GeneratorError(std::string(name) + " must have n components");
    Tensor<Expr> c(std::vector<int>{n});
    for (int j = 0; j < n; ++j) c(j) = parse(texts[j], n);
    return TensorField(n, {0, 1}, std::move(c));
  };
  TensorField p = parse_cov(params.p, "p");
  TensorField q = parse_cov(params.q, "q");
  TensorField sigma = parse_cov(params.sigma, "sigma");
  TensorField psi = parse_cov(params.psi, "psi");

  Tensor<Expr> Fc(std::vector<int>{n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Fc(i, j) = Expr::constant(params.F0(i, j));
  TensorField F(n, {1, 1}, std::move(Fc));

  Tensor<Expr> Lc(std::vector<int>{n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Expr v = Expr::constant(0.0);
        if (i == k) v += q.components()(j);
        if (i == j) v += q.components()(k);
        v += p.components()(j) * Expr::constant(params.F0(i, k));
        v -= p.components()(k) * Expr::constant(params.F0(i, j));
        Lc(i, j, k) = v;
      }
  ConnectionField L(TensorField(n, {1, 2}, std::move(Lc)));

  const Expr ee = Expr::constant(static_cast<double>(params.e));
  Tensor<Expr> muc(std::vector<int>{n});
  Tensor<Expr> nuc(std::vector<int>{n});
  for (int j = 0; j < n; ++j) {
    Expr pF = Expr::constant(0.0);
    Expr qF = Expr::constant(0.0);
    for (int a = 0; a < n; ++a) {
      pF += p.components()(a) * Expr::constant(params.F0(a, j));
      qF += q.components()(a) * Expr::constant(params.F0(a, j));
    }
    muc(j) = pF - q.components()(j);
    nuc(j) = ee * sigma.components()(j) + qF - ee * p.components()(j);
  }

  MappingInstance inst;
  inst.psi = std::move(psi);
  inst.sigma = std::move(sigma);
  inst.F = std::move(F);
  inst.mu = CovectorProvider::from_field(TensorField(n, {0, 1}, std::move(muc)));
  inst.nu = CovectorProvider::from_field(TensorField(n, {0, 1}, std::move(nuc)));
  inst.e = params.e;
  inst.theta = 1;

  double res = basic_residual(L, inst, grid, DerivMode::exact());
  if (res > 1e-10) {
    std::ostringstream os;
    os << "generated instance rejected: basic-equation residual " << res;
    throw GeneratorError(os.str());
  }
  return {std::move(L), std::move(inst)};
}

}  // namespace agm
