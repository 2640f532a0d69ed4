#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "agm/expr.hpp"

namespace agm {

using Point = Eigen::VectorXd;

/// Dense array with a small dynamic shape (rank <= 4 in practice, extents
/// all equal to the chart dimension). Templated on the scalar so the same
/// container holds symbolic components (Tensor<Expr>) and evaluated values
/// (Tensor<double>). Row-major.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, const T& fill = T())
      : shape_(std::move(shape)), data_(count(shape_), fill) {}

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  template <typename... I>
  T& operator()(I... idx) {
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <typename... I>
  const T& operator()(I... idx) const {
    return data_[offset({static_cast<int>(idx)...})];
  }

  T& at(std::span<const int> idx) { return data_[offset_span(idx)]; }
  const T& at(std::span<const int> idx) const { return data_[offset_span(idx)]; }

  /// Multi-index (0-based) of a flat offset.
  std::vector<int> unravel(std::size_t flat) const {
    std::vector<int> idx(shape_.size());
    for (int d = rank() - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(flat % shape_[d]);
      flat /= shape_[d];
    }
    return idx;
  }

  friend bool same_shape(const Tensor& a, const Tensor& b) { return a.shape_ == b.shape_; }

 private:
  static std::size_t count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return n;
  }
  std::size_t offset(std::initializer_list<int> idx) const {
    return offset_span(std::span<const int>(idx.begin(), idx.size()));
  }
  std::size_t offset_span(std::span<const int> idx) const {
    std::size_t off = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) off = off * shape_[d] + idx[d];
    return off;
  }

  std::vector<int> shape_;
  std::vector<T> data_;
};

using Values = Tensor<double>;

Values operator+(const Values& a, const Values& b);
Values operator-(const Values& a, const Values& b);
Values operator*(double s, const Values& a);

/// Valence of a tensor field: p contravariant slots then q covariant slots.
struct Valence {
  int p = 0;
  int q = 0;
  int rank() const { return p + q; }
  friend bool operator==(const Valence&, const Valence&) = default;
};

/// How partial derivatives are realized throughout the library: exact
/// symbolic differentiation or central finite differences with step h.
struct DerivMode {
  enum class Kind { Exact, Fd };
  Kind kind = Kind::Exact;
  double h = 1e-4;

  static DerivMode exact() { return {Kind::Exact, 0.0}; }
  static DerivMode fd(double h) { return {Kind::Fd, h}; }
  bool is_exact() const { return kind == Kind::Exact; }
};

/// A tensor field: N^(p+q) expression components, index order upper slots
/// first, then lower. Immutable after construction; exact partial-derivative
/// component tables are built on first use and memoized (not thread-safe
/// during that first differentiation).
class TensorField {
 public:
  TensorField() = default;
  TensorField(int dim, Valence val);
  TensorField(int dim, Valence val, Tensor<Expr> components);

  int dim() const { return dim_; }
  Valence valence() const { return val_; }
  const Tensor<Expr>& components() const { return comps_; }
  Tensor<Expr>& components() { return comps_; }

  /// Componentwise exact partials with respect to coordinate k (0-based).
  const Tensor<Expr>& partial_exprs(int k) const;

  Values eval(const Point& x) const;
  Values eval(const Point& x, EvalCache& cache) const;

 private:
  int dim_ = 0;
  Valence val_;
  Tensor<Expr> comps_;
  mutable std::vector<Tensor<Expr>> partials_;  // lazily filled, one per coordinate
  mutable std::vector<bool> partial_ready_;
};

inline Values eval_tensor(const TensorField& t, const Point& x) { return t.eval(x); }

/// Componentwise partial derivative of the whole field; k is 0-based.
Values partial_tensor(const TensorField& t, int k, const Point& x, DerivMode mode);

struct MaxAbs {
  double value = 0.0;
  std::vector<int> index;  // 0-based multi-index of the maximizer
};

/// max over components of |a-b| together with the argmax multi-index.
MaxAbs max_abs_diff(const Values& a, const Values& b);
MaxAbs max_abs(const Values& a);

/// Sample grid, reproducible from (dim, count, seed, bounds) bit-for-bit.
struct Grid {
  std::vector<Point> points;
  std::uint64_t seed = 0;
  Eigen::MatrixX2d bounds;  // row per coordinate: [lo, hi]
};

Eigen::MatrixX2d default_bounds(int dim, double lo = -0.9, double hi = 0.9);
Grid make_grid(int dim, int count, std::uint64_t seed, const Eigen::MatrixX2d& bounds);
Grid make_grid(int dim, int count = 50, std::uint64_t seed = 1);

}  // namespace agm
