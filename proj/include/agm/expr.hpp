#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include <Eigen/Core>

namespace agm {

/// Scalar functions admitted by the expression grammar.
enum class Fn { Sin, Cos, Exp };

class Expr;

/// Per-point evaluation cache keyed by node identity. Derived tensor
/// expressions share subtrees heavily; one cache per evaluation point keeps
/// the cost proportional to the number of distinct nodes.
class EvalCache {
 public:
  void clear() { values_.clear(); }

 private:
  friend class Expr;
  std::unordered_map<const void*, double> values_;
};

/// Immutable scalar expression over chart coordinates x1..xN.
///
/// Nodes are shared (shared_ptr) and never mutated, so expressions can be
/// copied and evaluated freely. Construction folds constants; semantic
/// equality is defined by evaluation, not by structure.
class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double value);
  static Expr coordinate(int index);  // 1-based
  static Expr pow(const Expr& base, int exponent);
  static Expr call(Fn fn, const Expr& arg);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  Expr operator-() const;

  Expr& operator+=(const Expr& other) { return *this = *this + other; }
  Expr& operator-=(const Expr& other) { return *this = *this - other; }
  Expr& operator*=(const Expr& other) { return *this = *this * other; }

  double eval(const Eigen::VectorXd& x) const;
  double eval(const Eigen::VectorXd& x, EvalCache& cache) const;

  /// Exact partial derivative with respect to coordinate k (1-based).
  Expr diff(int k) const;

  /// Renders the expression in the scenario grammar; parse(str()) evaluates
  /// identically to the original.
  std::string str() const;

  /// True when the node is literally the constant 0 (cheap structural test;
  /// expressions that merely evaluate to zero are not detected).
  bool is_zero() const;
  bool is_constant(double* value = nullptr) const;

  struct Node;  // opaque to users; defined in expr.cpp

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

inline Expr sin(const Expr& a) { return Expr::call(Fn::Sin, a); }
inline Expr cos(const Expr& a) { return Expr::call(Fn::Cos, a); }
inline Expr exp(const Expr& a) { return Expr::call(Fn::Exp, a); }

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), pos(position) {}
  std::size_t pos;
};

/// Parses the scenario expression grammar against chart dimension `dim`:
///   expr   := term (('+'|'-') term)*
///   term   := factor ('*' factor)*
///   factor := atom ('^' uint)?
///   atom   := number | 'x'uint | fn '(' expr ')' | '(' expr ')' | '-' atom
/// Whitespace insensitive. Coordinate indices must lie in 1..dim.
Expr parse(std::string_view text, int dim);

/// Central difference (f(x+h e_k) - f(x-h e_k)) / (2h), k 1-based.
double diff_fd(const Expr& e, int k, const Eigen::VectorXd& x, double h);

}  // namespace agm
