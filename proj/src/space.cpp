#include "agm/space.hpp"

#include <stdexcept>

namespace agm {

ConnectionField::ConnectionField(TensorField coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.valence() != Valence{1, 2})
    throw std::invalid_argument("connection coefficients must have valence (1,2)");
  if (coeffs_.dim() < 2) throw std::invalid_argument("connection dimension must be >= 2");
}

void ConnectionField::ensure_split() const {
  if (split_ready_) return;
  const int n = dim();
  Tensor<Expr> s(coeffs_.components().shape());
  Tensor<Expr> t(coeffs_.components().shape());
  const Expr half = Expr::constant(0.5);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Expr& a = coeffs_.components()(i, j, k);
        const Expr& b = coeffs_.components()(i, k, j);
        s(i, j, k) = half * (a + b);
        t(i, j, k) = half * (a - b);
      }
  sym_ = TensorField(n, {1, 2}, std::move(s));
  torsion_ = TensorField(n, {1, 2}, std::move(t));
  split_ready_ = true;
}

const TensorField& ConnectionField::sym() const {
  ensure_split();
  return sym_;
}

const TensorField& ConnectionField::torsion() const {
  ensure_split();
  return torsion_;
}

const TensorField& ConnectionField::trace() const {
  if (!trace_ready_) {
    const int n = dim();
    Tensor<Expr> c(std::vector<int>{n});
    for (int j = 0; j < n; ++j) {
      Expr sum = Expr::constant(0.0);
      for (int a = 0; a < n; ++a) sum += coeffs_.components()(a, j, a);
      c(j) = sum;
    }
    trace_ = TensorField(n, {0, 1}, std::move(c));
    trace_ready_ = true;
  }
  return trace_;
}

ConnectionField zero_connection(int dim) {
  return ConnectionField(TensorField(dim, {1, 2}));
}

ConnectionSplit split(const ConnectionField& L) {
  return {L.sym(), L.torsion()};
}

namespace {

void check_valence(const Valence& v) {
  const bool ok = (v == Valence{1, 0}) || (v == Valence{0, 1}) || (v == Valence{1, 1}) ||
                  (v == Valence{0, 2}) || (v == Valence{1, 2});
  if (!ok) throw std::invalid_argument("unsupported valence for covariant differentiation");
}

// Correction terms shared by covdiff and covdiff_assoc. Lv holds the
// connection values at the evaluation point. upper_first: contracted slot of
// L for upper indices comes first (kinds 1,3); lower_first: contracted slot
// for lower indices comes first (kinds 1,4).
Values covdiff_corrections(const Values& Lv, const Values& tv, const Valence& val, int dim,
                           bool upper_first, bool lower_first, Values partials) {
  Values out = std::move(partials);  // rank p+q+1, derivative index last
  std::vector<int> idx(val.rank() + 1);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::vector<int> full = out.unravel(flat);
    const int k = full.back();
    double corr = 0.0;
    std::vector<int> tidx(full.begin(), full.end() - 1);
    for (int slot = 0; slot < val.rank(); ++slot) {
      const int orig = tidx[slot];
      const bool upper = slot < val.p;
      for (int a = 0; a < dim; ++a) {
        tidx[slot] = a;
        const double tval = tv.at(tidx);
        if (upper) {
          corr += (upper_first ? Lv(orig, a, k) : Lv(orig, k, a)) * tval;
        } else {
          corr -= (lower_first ? Lv(a, orig, k) : Lv(a, k, orig)) * tval;
        }
      }
      tidx[slot] = orig;
    }
    out[flat] += corr;
  }
  return out;
}

std::vector<int> appended_shape(const Values& tv, int dim) {
  std::vector<int> s = tv.shape();
  s.push_back(dim);
  return s;
}

Values stack_partials(const TensorField& t, const Point& x, DerivMode mode) {
  const int n = t.dim();
  Values first = partial_tensor(t, 0, x, mode);
  Values out(appended_shape(first, n));
  for (int k = 0; k < n; ++k) {
    Values pk = (k == 0) ? first : partial_tensor(t, k, x, mode);
    for (std::size_t i = 0; i < pk.size(); ++i) {
      std::vector<int> idx = pk.unravel(i);
      idx.push_back(k);
      out.at(idx) = pk[i];
    }
  }
  return out;
}

}  // namespace

Values covdiff(const ConnectionField& L, const TensorField& t, int kind, const Point& x,
               DerivMode mode) {
  if (kind < 1 || kind > 4) throw std::invalid_argument("derivative kind must be 1..4");
  check_valence(t.valence());
  if (L.dim() != t.dim()) throw std::invalid_argument("dimension mismatch");
  EvalCache cache;
  Values Lv = L.coeffs().eval(x, cache);
  Values tv = t.eval(x, cache);
  const bool upper_first = (kind == 1 || kind == 3);
  const bool lower_first = (kind == 1 || kind == 4);
  return covdiff_corrections(Lv, tv, t.valence(), t.dim(), upper_first, lower_first,
                             stack_partials(t, x, mode));
}

Values covdiff_assoc(const TensorField& S, const TensorField& t, const Point& x, DerivMode mode) {
  check_valence(t.valence());
  if (S.dim() != t.dim()) throw std::invalid_argument("dimension mismatch");
  EvalCache cache;
  Values Sv = S.eval(x, cache);
  Values tv = t.eval(x, cache);
  return covdiff_corrections(Sv, tv, t.valence(), t.dim(), true, true,
                             stack_partials(t, x, mode));
}

Eigen::MatrixXd formal_contraction_deriv(const ConnectionField& L, const TensorField& covector,
                                         const Point& x, DerivMode mode) {
  if (covector.valence() != Valence{0, 1})
    throw std::invalid_argument("formal contraction derivative expects a covector");
  const int n = L.dim();
  EvalCache cache;
  Values Lv = L.coeffs().eval(x, cache);
  Values cv = covector.eval(x, cache);
  Eigen::MatrixXd out(n, n);
  for (int k = 0; k < n; ++k) {
    Values pk = partial_tensor(covector, k, x, mode);
    for (int j = 0; j < n; ++j) {
      double v = pk(j);
      for (int b = 0; b < n; ++b) v -= Lv(b, j, k) * cv(b);
      out(j, k) = v;
    }
  }
  return out;
}

Eigen::MatrixXd formal_contraction_deriv(const ConnectionField& L, const Point& x, DerivMode mode) {
  return formal_contraction_deriv(L, L.trace(), x, mode);
}

}  // namespace agm
