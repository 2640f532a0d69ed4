#include <doctest.h>

#include "helpers.hpp"

using namespace agm;

namespace {

MappingInstance zero_instance(int n) {
  MappingInstance inst;
  inst.psi = TensorField(n, {0, 1});
  inst.sigma = TensorField(n, {0, 1});
  inst.F = TensorField(n, {1, 1});
  inst.mu = CovectorProvider::from_field(TensorField(n, {0, 1}));
  inst.nu = CovectorProvider::from_field(TensorField(n, {0, 1}));
  inst.e = 0;
  inst.theta = 1;
  return inst;
}

GeneratorParams spec_example_params() {
  GeneratorParams g;
  g.n = 2;
  g.e = 1;
  g.F0 = Eigen::MatrixXd(2, 2);
  g.F0 << 1, 0, 0, -1;
  g.p = {"x2", "0"};
  g.q = {"0", "x1"};
  g.sigma = {"x1", "x2"};
  g.psi = {"1", "0"};
  return g;
}

}  // namespace

TEST_CASE("deform with zero data is the identity") {
  std::mt19937_64 rng(71);
  const int n = 2;
  ConnectionField L = test::random_connection(rng, n);
  ConnectionField Lbar = deform(L, zero_instance(n));
  Grid g = make_grid(n, 5, 73);
  for (const Point& x : g.points)
    CHECK(max_abs_diff(Lbar.coeffs().eval(x), L.coeffs().eval(x)).value == 0.0);
}

TEST_CASE("deformation preserves torsion") {
  std::mt19937_64 rng(79);
  const int n = 3;
  Grid g = make_grid(n, 8, 83);
  Generated gen = test::make_generated(n, 1, g);
  ConnectionField Lbar = deform(gen.L, gen.inst);
  for (const Point& x : g.points)
    CHECK(max_abs_diff(Lbar.torsion().eval(x), gen.L.torsion().eval(x)).value <= 1e-14);
}

TEST_CASE("sigma = 0 gives the geodesic-shaped deformation") {
  const int n = 2;
  ConnectionField L0 = zero_connection(n);
  MappingInstance inst = zero_instance(n);
  inst.psi.components()(0) = parse("x2", n);
  ConnectionField Lbar = deform(L0, inst);
  Point x(2);
  x << 0.5, 0.25;
  Values v = Lbar.coeffs().eval(x);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double expect = (i == k && j == 0 ? 0.25 : 0.0) + (i == j && k == 0 ? 0.25 : 0.0);
        CHECK(v(i, j, k) == doctest::Approx(expect));
      }
}

TEST_CASE("reciprocity residual for involutive and nilpotent affinors") {
  const int n = 2;
  Grid g = make_grid(n, 5, 89);
  MappingInstance inst = zero_instance(n);
  inst.F.components()(0, 1) = Expr::constant(1.0);
  inst.F.components()(1, 0) = Expr::constant(1.0);
  inst.e = 1;
  CHECK(reciprocity_residual(inst, g) == 0.0);
  inst.F.components()(1, 0) = Expr::constant(-1.0);
  inst.e = -1;
  CHECK(reciprocity_residual(inst, g) == 0.0);
  inst.e = 1;
  CHECK(reciprocity_residual(inst, g) == doctest::Approx(2.0));
}

TEST_CASE("generated instances satisfy the basic equations") {
  Grid g2 = make_grid(2, 20, 97);
  Generated gen = generate_instance(spec_example_params(), g2);
  CHECK(reciprocity_residual(gen.inst, g2) == 0.0);
  CHECK(basic_residual(gen.L, gen.inst, g2, DerivMode::exact()) <= 1e-10);
  CHECK(contracted_residual(gen.L, gen.inst, g2, DerivMode::exact()) <= 1e-10);
  CHECK(recover_psi(gen.L, deform(gen.L, gen.inst), gen.inst, g2, DerivMode::exact()) <= 1e-12);

  // fd mode stays within the O(h^2) band
  CHECK(basic_residual(gen.L, gen.inst, g2, DerivMode::fd(1e-4)) <= 1e-6);
}

TEST_CASE("constant F with zero data is basic-flat") {
  const int n = 2;
  MappingInstance inst = zero_instance(n);
  inst.F.components()(0, 0) = Expr::constant(2.0);
  inst.F.components()(1, 1) = Expr::constant(2.0);
  Grid g = make_grid(n, 5, 101);
  CHECK(basic_residual(zero_connection(n), inst, g, DerivMode::exact()) == 0.0);
  CHECK(contracted_residual(zero_connection(n), inst, g, DerivMode::exact()) == 0.0);
}

TEST_CASE("the basic residual does not depend on psi") {
  Grid g = make_grid(2, 15, 102);
  Generated gen = generate_instance(spec_example_params(), g);
  MappingInstance other = gen.inst;
  other.psi = TensorField(2, {0, 1});
  other.psi.components()(0) = parse("sin(x1)", 2);
  other.psi.components()(1) = parse("3*x2", 2);
  CHECK(basic_residual(gen.L, other, g, DerivMode::exact()) ==
        basic_residual(gen.L, gen.inst, g, DerivMode::exact()));
}

TEST_CASE("perturbing mu is detected with at least the expected magnitude") {
  Grid g = make_grid(2, 20, 103);
  Generated gen = generate_instance(spec_example_params(), g);
  MappingInstance bad = gen.inst;
  TensorField mu = gen.inst.mu.field();
  for (int j = 0; j < 2; ++j) mu.components()(j) += Expr::constant(0.1);
  bad.mu = CovectorProvider::from_field(mu);
  // residual >= 0.1 * max |F| on the grid (here max |F^i_j| = 1)
  CHECK(basic_residual(gen.L, bad, g, DerivMode::exact()) >= 0.1);
}

TEST_CASE("fit_mu_nu recovers the generator coefficients") {
  Grid g = make_grid(2, 12, 107);
  Generated gen = generate_instance(spec_example_params(), g);
  for (const Point& x : g.points) {
    FitResult fr = fit_mu_nu(gen.L, gen.inst.F, gen.inst.sigma, gen.inst.e, 1, x,
                             DerivMode::exact());
    CHECK(fr.residual <= 1e-10);
    Eigen::VectorXd mu = gen.inst.mu.eval(x, DerivMode::exact());
    Eigen::VectorXd nu = gen.inst.nu.eval(x, DerivMode::exact());
    CHECK((fr.mu - mu).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((fr.nu - nu).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("fit_mu_nu on zero data and on inconsistent data") {
  const int n = 2;
  Point x(2);
  x << 0.2, 0.3;
  MappingInstance z = zero_instance(n);
  FitResult fr = fit_mu_nu(zero_connection(n), z.F, z.sigma, 0, 1, x, DerivMode::exact());
  CHECK(fr.mu.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fr.nu.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fr.residual == 0.0);

  std::mt19937_64 rng(109);
  ConnectionField L = test::random_connection(rng, n);
  TensorField F = test::random_field(rng, n, {1, 1});
  TensorField sigma = test::random_field(rng, n, {0, 1});
  FitResult bad = fit_mu_nu(L, F, sigma, 1, 1, x, DerivMode::exact());
  CHECK(bad.residual > 0.0);  // least squares reports, never throws
}

TEST_CASE("instance inversion realizes reciprocity") {
  Grid g = make_grid(2, 20, 113);
  Generated gen = generate_instance(spec_example_params(), g);
  MappingInstance inv = invert_instance(gen.L, gen.inst, g);
  ConnectionField Lbar = deform(gen.L, gen.inst);

  // deforming back yields the original connection
  ConnectionField Lback = deform(Lbar, inv);
  for (const Point& x : g.points)
    CHECK(max_abs_diff(Lback.coeffs().eval(x), gen.L.coeffs().eval(x)).value <= 1e-12);

  // F is carried over unchanged, the barred residual is tiny
  for (const Point& x : g.points)
    CHECK(max_abs_diff(inv.F.eval(x), gen.inst.F.eval(x)).value == 0.0);
  CHECK(basic_residual(Lbar, inv, g, DerivMode::exact()) <= 1e-10);

  // double inversion: psi, sigma, F exactly, mu and nu within 1e-9
  MappingInstance inv2 = invert_instance(Lbar, inv, g);
  for (const Point& x : g.points) {
    CHECK(max_abs_diff(inv2.psi.eval(x), gen.inst.psi.eval(x)).value == 0.0);
    CHECK(max_abs_diff(inv2.sigma.eval(x), gen.inst.sigma.eval(x)).value == 0.0);
    Eigen::VectorXd dmu =
        inv2.mu.eval(x, DerivMode::exact()) - gen.inst.mu.eval(x, DerivMode::exact());
    Eigen::VectorXd dnu =
        inv2.nu.eval(x, DerivMode::exact()) - gen.inst.nu.eval(x, DerivMode::exact());
    CHECK(dmu.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(dnu.cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("generator across e and dimensions, including the nilpotent case") {
  for (auto [n, e] : std::vector<std::pair<int, int>>{{2, 0}, {3, 0}, {4, 0},
                                                      {2, 1}, {3, 1}, {4, 1},
                                                      {2, -1}, {4, -1}}) {
    Grid g = make_grid(n, 10, 127 + n + e);
    Generated gen = test::make_generated(n, e, g);
    CHECK(reciprocity_residual(gen.inst, g) <= 1e-14);
    CHECK(basic_residual(gen.L, gen.inst, g, DerivMode::exact()) <= 1e-10);
  }
}

TEST_CASE("generator rejects bad input") {
  Grid g = make_grid(2, 5, 131);
  GeneratorParams bad = spec_example_params();
  bad.F0(0, 0) = 2.0;  // F0^2 != e I
  CHECK_THROWS_AS(generate_instance(bad, g), GeneratorError);

  GeneratorParams odd;
  odd.n = 3;
  odd.e = -1;
  odd.F0 = Eigen::MatrixXd::Zero(3, 3);
  odd.p = odd.q = odd.sigma = odd.psi = {"0", "0", "0"};
  Grid g3 = make_grid(3, 5, 137);
  CHECK_THROWS_AS(generate_instance(odd, g3), GeneratorError);
}
