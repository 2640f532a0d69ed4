#include "agm/tensor.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace agm {

Values operator+(const Values& a, const Values& b) {
  if (!same_shape(a, b)) throw std::invalid_argument("tensor shape mismatch");
  Values r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Values operator-(const Values& a, const Values& b) {
  if (!same_shape(a, b)) throw std::invalid_argument("tensor shape mismatch");
  Values r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Values operator*(double s, const Values& a) {
  Values r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= s;
  return r;
}

namespace {

std::vector<int> cube_shape(int dim, int rank) {
  return std::vector<int>(static_cast<std::size_t>(rank), dim);
}

}  // namespace

TensorField::TensorField(int dim, Valence val)
    : dim_(dim), val_(val), comps_(cube_shape(dim, val.rank())) {}

TensorField::TensorField(int dim, Valence val, Tensor<Expr> components)
    : dim_(dim), val_(val), comps_(std::move(components)) {
  if (comps_.rank() != val.rank())
    throw std::invalid_argument("component rank does not match valence");
  for (int s : comps_.shape())
    if (s != dim) throw std::invalid_argument("component extent does not match dimension");
}

const Tensor<Expr>& TensorField::partial_exprs(int k) const {
  if (partials_.empty()) {
    partials_.assign(dim_, Tensor<Expr>());
    partial_ready_.assign(dim_, false);
  }
  if (!partial_ready_[k]) {
    Tensor<Expr> d(comps_.shape());
    for (std::size_t i = 0; i < comps_.size(); ++i) d[i] = comps_[i].diff(k + 1);
    partials_[k] = std::move(d);
    partial_ready_[k] = true;
  }
  return partials_[k];
}

Values TensorField::eval(const Point& x) const {
  EvalCache cache;
  return eval(x, cache);
}

Values TensorField::eval(const Point& x, EvalCache& cache) const {
  if (x.size() != dim_) throw std::invalid_argument("point dimension mismatch");
  Values out(comps_.shape());
  for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i].eval(x, cache);
  return out;
}

Values partial_tensor(const TensorField& t, int k, const Point& x, DerivMode mode) {
  if (k < 0 || k >= t.dim()) throw std::invalid_argument("derivative index out of range");
  if (mode.is_exact()) {
    EvalCache cache;
    const Tensor<Expr>& d = t.partial_exprs(k);
    Values out(d.shape());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i].eval(x, cache);
    return out;
  }
  Point xp = x, xm = x;
  xp(k) += mode.h;
  xm(k) -= mode.h;
  EvalCache cp, cm;
  Values vp = t.eval(xp, cp);
  Values vm = t.eval(xm, cm);
  Values out(vp.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (vp[i] - vm[i]) / (2.0 * mode.h);
  return out;
}

MaxAbs max_abs_diff(const Values& a, const Values& b) {
  if (!same_shape(a, b)) throw std::invalid_argument("tensor shape mismatch");
  MaxAbs m;
  m.index = a.unravel(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = std::abs(a[i] - b[i]);
    if (d > m.value) {
      m.value = d;
      m.index = a.unravel(i);
    }
  }
  return m;
}

MaxAbs max_abs(const Values& a) {
  Values zero(a.shape());
  return max_abs_diff(a, zero);
}

Eigen::MatrixX2d default_bounds(int dim, double lo, double hi) {
  Eigen::MatrixX2d b(dim, 2);
  for (int i = 0; i < dim; ++i) {
    b(i, 0) = lo;
    b(i, 1) = hi;
  }
  return b;
}

Grid make_grid(int dim, int count, std::uint64_t seed, const Eigen::MatrixX2d& bounds) {
  if (bounds.rows() != dim) throw std::invalid_argument("bounds row count must equal dimension");
  Grid g;
  g.seed = seed;
  g.bounds = bounds;
  g.points.reserve(count);
  // Explicit uint64 -> [0,1) mapping; distributions are implementation-defined
  // and would break bit-identical regeneration.
  std::mt19937_64 rng(seed);
  for (int p = 0; p < count; ++p) {
    Point x(dim);
    for (int i = 0; i < dim; ++i) {
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      x(i) = bounds(i, 0) + u * (bounds(i, 1) - bounds(i, 0));
    }
    g.points.push_back(std::move(x));
  }
  return g;
}

Grid make_grid(int dim, int count, std::uint64_t seed) {
  return make_grid(dim, count, seed, default_bounds(dim));
}

}  // namespace agm
