#include "agm/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace agm {

enum class Kind { Constant, Coordinate, Negate, Add, Sub, Mul, Pow, Call };

struct Expr::Node {
  Kind kind;
  double value = 0.0;   // Constant
  int index = 0;        // Coordinate (1-based)
  int exponent = 0;     // Pow
  Fn fn = Fn::Sin;      // Call
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

}  // namespace

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::coordinate(int index) {
  if (index < 1) throw std::invalid_argument("coordinate index must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Coordinate;
  n->index = index;
  return Expr(std::move(n));
}

bool Expr::is_zero() const {
  return node_->kind == Kind::Constant && node_->value == 0.0;
}

bool Expr::is_constant(double* value) const {
  if (node_->kind != Kind::Constant) return false;
  if (value) *value = node_->value;
  return true;
}

Expr operator+(const Expr& a, const Expr& b) {
  double ca, cb;
  if (a.is_constant(&ca) && b.is_constant(&cb)) return Expr::constant(ca + cb);
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  auto n = std::make_shared<Expr::Node>();
  n->kind = Kind::Add;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr operator-(const Expr& a, const Expr& b) {
  double ca, cb;
  if (a.is_constant(&ca) && b.is_constant(&cb)) return Expr::constant(ca - cb);
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  auto n = std::make_shared<Expr::Node>();
  n->kind = Kind::Sub;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr operator*(const Expr& a, const Expr& b) {
  double ca, cb;
  if (a.is_constant(&ca) && b.is_constant(&cb)) return Expr::constant(ca * cb);
  if (a.is_zero() || b.is_zero()) return Expr::constant(0.0);
  if (a.is_constant(&ca) && ca == 1.0) return b;
  if (b.is_constant(&cb) && cb == 1.0) return a;
  auto n = std::make_shared<Expr::Node>();
  n->kind = Kind::Mul;
  n->a = a.node_;
  n->b = b.node_;
  return Expr(std::move(n));
}

Expr Expr::operator-() const {
  double c;
  if (is_constant(&c)) return constant(-c);
  if (node_->kind == Kind::Negate) return Expr(node_->a);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->a = node_;
  return Expr(std::move(n));
}

Expr Expr::pow(const Expr& base, int exponent) {
  if (exponent < 0) throw std::invalid_argument("power exponent must be >= 0");
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return base;
  double c;
  if (base.is_constant(&c)) return constant(std::pow(c, exponent));
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pow;
  n->exponent = exponent;
  n->a = base.node_;
  return Expr(std::move(n));
}

Expr Expr::call(Fn fn, const Expr& arg) {
  double c;
  if (arg.is_constant(&c)) {
    switch (fn) {
      case Fn::Sin: return constant(std::sin(c));
      case Fn::Cos: return constant(std::cos(c));
      case Fn::Exp: return constant(std::exp(c));
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->fn = fn;
  n->a = arg.node_;
  return Expr(std::move(n));
}

namespace {

double eval_node(const Expr::Node* n, const Eigen::VectorXd& x,
                 std::unordered_map<const void*, double>* cache) {
  if (cache) {
    auto it = cache->find(n);
    if (it != cache->end()) return it->second;
  }
  double r = 0.0;
  switch (n->kind) {
    case Kind::Constant: r = n->value; break;
    case Kind::Coordinate: r = x(n->index - 1); break;
    case Kind::Negate: r = -eval_node(n->a.get(), x, cache); break;
    case Kind::Add:
      r = eval_node(n->a.get(), x, cache) + eval_node(n->b.get(), x, cache);
      break;
    case Kind::Sub:
      r = eval_node(n->a.get(), x, cache) - eval_node(n->b.get(), x, cache);
      break;
    case Kind::Mul:
      r = eval_node(n->a.get(), x, cache) * eval_node(n->b.get(), x, cache);
      break;
    case Kind::Pow:
      r = std::pow(eval_node(n->a.get(), x, cache), n->exponent);
      break;
    case Kind::Call: {
      double a = eval_node(n->a.get(), x, cache);
      switch (n->fn) {
        case Fn::Sin: r = std::sin(a); break;
        case Fn::Cos: r = std::cos(a); break;
        case Fn::Exp: r = std::exp(a); break;
      }
      break;
    }
  }
  if (cache) cache->emplace(n, r);
  return r;
}

}  // namespace

double Expr::eval(const Eigen::VectorXd& x) const {
  return eval_node(node_.get(), x, nullptr);
}

double Expr::eval(const Eigen::VectorXd& x, EvalCache& cache) const {
  return eval_node(node_.get(), x, &cache.values_);
}

Expr Expr::diff(int k) const {
  const Node* n = node_.get();
  switch (n->kind) {
    case Kind::Constant: return constant(0.0);
    case Kind::Coordinate: return constant(n->index == k ? 1.0 : 0.0);
    case Kind::Negate: return -Expr(n->a).diff(k);
    case Kind::Add: return Expr(n->a).diff(k) + Expr(n->b).diff(k);
    case Kind::Sub: return Expr(n->a).diff(k) - Expr(n->b).diff(k);
    case Kind::Mul: {
      Expr a(n->a), b(n->b);
      return a.diff(k) * b + a * b.diff(k);
    }
    case Kind::Pow: {
      Expr a(n->a);
      return constant(n->exponent) * pow(a, n->exponent - 1) * a.diff(k);
    }
    case Kind::Call: {
      Expr a(n->a);
      Expr inner = a.diff(k);
      switch (n->fn) {
        case Fn::Sin: return call(Fn::Cos, a) * inner;
        case Fn::Cos: return -(call(Fn::Sin, a) * inner);
        case Fn::Exp: return call(Fn::Exp, a) * inner;
      }
      break;
    }
  }
  throw std::logic_error("unreachable expression kind");
}

namespace {

// Precedence levels for printing: additive 1, multiplicative 2, power 3,
// atoms 4. A child is parenthesized when its level is below the context's.
int level(const Expr::Node* n) {
  switch (n->kind) {
    case Kind::Add:
    case Kind::Sub:
    case Kind::Negate: return 1;
    case Kind::Mul: return 2;
    case Kind::Pow: return 3;
    default: return 4;
  }
}

void print_node(const Expr::Node* n, int min_level, std::ostream& os) {
  const bool parens = level(n) < min_level;
  if (parens) os << '(';
  switch (n->kind) {
    case Kind::Constant: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n->value);
      if (n->value < 0) {
        os << '(' << buf << ')';
      } else {
        os << buf;
      }
      break;
    }
    case Kind::Coordinate: os << 'x' << n->index; break;
    case Kind::Negate:
      os << '-';
      print_node(n->a.get(), 4, os);
      break;
    case Kind::Add:
      print_node(n->a.get(), 1, os);
      os << " + ";
      print_node(n->b.get(), 2, os);
      break;
    case Kind::Sub:
      print_node(n->a.get(), 1, os);
      os << " - ";
      print_node(n->b.get(), 2, os);
      break;
    case Kind::Mul:
      print_node(n->a.get(), 2, os);
      os << '*';
      print_node(n->b.get(), 3, os);
      break;
    case Kind::Pow:
      print_node(n->a.get(), 4, os);
      os << '^' << n->exponent;
      break;
    case Kind::Call:
      switch (n->fn) {
        case Fn::Sin: os << "sin("; break;
        case Fn::Cos: os << "cos("; break;
        case Fn::Exp: os << "exp("; break;
      }
      print_node(n->a.get(), 1, os);
      os << ')';
      break;
  }
  if (parens) os << ')';
}

}  // namespace

std::string Expr::str() const {
  std::ostringstream os;
  print_node(node_.get(), 1, os);
  return os.str();
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at position " + std::to_string(pos_), pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = factor();
    while (accept('*')) e = e * factor();
    return e;
  }

  Expr factor() {
    Expr e = atom();
    if (accept('^')) return Expr::pow(e, uint_literal());
    return e;
  }

  Expr atom() {
    char c = peek();
    if (c == '-') {
      ++pos_;
      return -atom();
    }
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    fail("expected expression");
  }

  int uint_literal() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected unsigned integer");
    return std::stoi(std::string(text_.substr(start, pos_ - start)));
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // not an exponent after all
      }
    }
    return Expr::constant(std::stod(std::string(text_.substr(start, pos_ - start))));
  }

  Expr name() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string id(text_.substr(start, pos_ - start));
    if (id == "x") {
      std::size_t istart = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == istart) fail("expected coordinate index after 'x'");
      int idx = std::stoi(std::string(text_.substr(istart, pos_ - istart)));
      if (idx < 1 || idx > dim_) {
        pos_ = start;
        fail("coordinate x" + std::to_string(idx) + " out of range 1.." + std::to_string(dim_));
      }
      return Expr::coordinate(idx);
    }
    Fn fn;
    if (id == "sin") {
      fn = Fn::Sin;
    } else if (id == "cos") {
      fn = Fn::Cos;
    } else if (id == "exp") {
      fn = Fn::Exp;
    } else {
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    if (!accept('(')) fail("expected '(' after function name");
    Expr arg = expr();
    if (!accept(')')) fail("expected ')'");
    return Expr::call(fn, arg);
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, int dim) {
  if (dim < 1) throw std::invalid_argument("chart dimension must be >= 1");
  return Parser(text, dim).run();
}

double diff_fd(const Expr& e, int k, const Eigen::VectorXd& x, double h) {
  if (h <= 0) throw std::invalid_argument("finite-difference step must be > 0");
  Eigen::VectorXd xp = x, xm = x;
  xp(k - 1) += h;
  xm(k - 1) -= h;
  return (e.eval(xp) - e.eval(xm)) / (2.0 * h);
}

}  // namespace agm
