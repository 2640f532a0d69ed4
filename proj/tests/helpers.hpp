#pragma once

#include <random>
#include <string>
#include <vector>

#include "agm/invariants.hpp"

namespace agm::test {

/// Random expression over x1..xN: small polynomials with occasional sin/cos/
/// exp factors, magnitudes kept mild so grids in [-0.9, 0.9]^N stay tame.
inline Expr random_expr(std::mt19937_64& rng, int dim, int depth = 0) {
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  const int pick = static_cast<int>(rng() % (depth >= 3 ? 2 : 7));
  switch (pick) {
    case 0: return Expr::constant(std::round(uni(-1.5, 1.5) * 4.0) / 4.0);
    case 1: return Expr::coordinate(1 + static_cast<int>(rng() % dim));
    case 2: return random_expr(rng, dim, depth + 1) + random_expr(rng, dim, depth + 1);
    case 3: return random_expr(rng, dim, depth + 1) * random_expr(rng, dim, depth + 1);
    case 4: return random_expr(rng, dim, depth + 1) - random_expr(rng, dim, depth + 1);
    case 5: return Expr::pow(Expr::coordinate(1 + static_cast<int>(rng() % dim)),
                             2 + static_cast<int>(rng() % 2));
    default: {
      Expr arg = Expr::coordinate(1 + static_cast<int>(rng() % dim));
      switch (rng() % 3) {
        case 0: return sin(arg);
        case 1: return cos(arg);
        default: return exp(Expr::constant(0.5) * arg);
      }
    }
  }
}

inline TensorField random_field(std::mt19937_64& rng, int dim, Valence v) {
  TensorField f(dim, v);
  for (std::size_t i = 0; i < f.components().size(); ++i)
    f.components()[i] = random_expr(rng, dim);
  return f;
}

inline ConnectionField random_connection(std::mt19937_64& rng, int dim) {
  return ConnectionField(random_field(rng, dim, {1, 2}));
}

/// Involutive / nilpotent affinor matrices for each admissible e.
inline Eigen::MatrixXd affinor_for(int n, int e) {
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
  if (e == 1) {
    for (int i = 0; i < n; ++i) F(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
  } else if (e == -1) {
    for (int i = 0; i + 1 < n; i += 2) {
      F(i, i + 1) = 1.0;
      F(i + 1, i) = -1.0;
    }
  } else {
    F(0, 1) = 1.0;  // single nilpotent block
  }
  return F;
}

inline std::vector<std::string> take(std::initializer_list<const char*> xs, int n) {
  std::vector<std::string> out;
  int i = 0;
  for (const char* s : xs) {
    if (i++ >= n) break;
    out.emplace_back(s);
  }
  return out;
}

/// A generic generated-instance parameter set: nonzero sigma and a torsion
/// profile with nonvanishing trace contraction.
inline GeneratorParams generic_params(int n, int e) {
  GeneratorParams g;
  g.n = n;
  g.e = e;
  g.F0 = affinor_for(n, e);
  g.p = take({"x2", "x1", "0.3", "0.1*x1"}, n);
  g.q = take({"0", "x1", "0.2*x3", "0.1"}, n);
  g.sigma = take({"x1", "x2", "0.1", "0.2*x2"}, n);
  g.psi = take({"1", "0", "x3", "0.05"}, n);
  return g;
}

/// sigma = 0 and a torsion profile whose trace contraction vanishes; the
/// whole printed derivation chain closes on these.
inline GeneratorParams clean_params_n3() {
  GeneratorParams g;
  g.n = 3;
  g.e = 1;
  g.F0 = affinor_for(3, 1);
  g.p = {"x2", "0", "0.3"};
  g.q = {"0", "x1", "0.2*x3"};
  g.sigma = {"0", "0", "0"};
  g.psi = {"1", "0", "x3"};
  return g;
}

inline Generated make_generated(int n, int e, const Grid& grid) {
  return generate_instance(generic_params(n, e), grid);
}

}  // namespace agm::test
