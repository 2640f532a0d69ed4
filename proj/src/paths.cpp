#include "agm/paths.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace agm {

namespace {

Eigen::VectorXd geodesic_rhs(const ConnectionField& L, const Point& x,
                             const Eigen::VectorXd& lam) {
  const int n = L.dim();
  EvalCache cache;
  Values Lv = L.coeffs().eval(x, cache);
  Eigen::VectorXd dl(n);
  for (int i = 0; i < n; ++i) {
    double v = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) v += Lv(i, a, b) * lam(a) * lam(b);
    dl(i) = -v;
  }
  return dl;
}

bool inside(const Eigen::MatrixX2d& bounds, const Point& x) {
  for (int i = 0; i < x.size(); ++i)
    if (x(i) < bounds(i, 0) || x(i) > bounds(i, 1)) return false;
  return true;
}

// Covariant directional derivative term of kind theta for a contravariant
// vector v along direction lam: +L^i_{a b} v^a lam^b (kind 1) or
// +L^i_{b a} v^a lam^b (kind 2), b the differentiation slot.
Eigen::VectorXd connection_term(const Values& Lv, const Eigen::VectorXd& v,
                                const Eigen::VectorXd& lam, int theta) {
  const int n = static_cast<int>(v.size());
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        s += (theta == 1 ? Lv(i, a, b) : Lv(i, b, a)) * v(a) * lam(b);
    out(i) = s;
  }
  return out;
}

}  // namespace

std::vector<CurveSample> integrate_geodesic(const ConnectionField& L, const Point& x0,
                                            const Eigen::VectorXd& l0, double t_end, int steps,
                                            const Eigen::MatrixX2d& bounds) {
  if (steps < 16) throw std::invalid_argument("geodesic integration needs at least 16 steps");
  if (l0.norm() == 0.0) throw std::invalid_argument("initial tangent must be nonzero");
  const double h = t_end / steps;
  Point x = x0;
  Eigen::VectorXd lam = l0;
  std::vector<CurveSample> out;
  out.reserve(steps + 1);
  out.push_back({0.0, x, lam});
  for (int s = 0; s < steps; ++s) {
    auto f = [&](const Point& xx, const Eigen::VectorXd& ll) {
      return std::pair<Eigen::VectorXd, Eigen::VectorXd>(ll, geodesic_rhs(L, xx, ll));
    };
    auto [k1x, k1l] = f(x, lam);
    auto [k2x, k2l] = f(x + 0.5 * h * k1x, lam + 0.5 * h * k1l);
    auto [k3x, k3l] = f(x + 0.5 * h * k2x, lam + 0.5 * h * k2l);
    auto [k4x, k4l] = f(x + h * k3x, lam + h * k3l);
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    lam += h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
    const double t = (s + 1) * h;
    if (!inside(bounds, x)) {
      std::ostringstream os;
      os << "geodesic left the chart bounds at t = " << t;
      throw ChartExitError(os.str(), t);
    }
    out.push_back({t, x, lam});
  }
  return out;
}

DefectResult ag_defect(const ConnectionField& Lbar, const std::vector<CurveSample>& samples,
                       int theta, double column_zero_tol) {
  if (theta != 1 && theta != 2) throw std::invalid_argument("theta must be 1 or 2");
  if (samples.size() < 5) throw std::invalid_argument("need at least 5 curve samples");
  const int n = Lbar.dim();
  const std::size_t m = samples.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DefectResult result;
  result.defect.assign(m, nan);
  if (n < 3) {
    // any three vectors in dimension <= 2 are linearly dependent
    result.vacuous = true;
    for (std::size_t k = 2; k + 2 < m; ++k) result.defect[k] = 0.0;
    return result;
  }
  const double dt = samples[1].t - samples[0].t;
  std::vector<Eigen::VectorXd> lam1(m);
  std::vector<Values> Lvals(m);
  for (std::size_t k = 0; k < m; ++k) {
    EvalCache cache;
    Lvals[k] = Lbar.coeffs().eval(samples[k].x, cache);
  }
  for (std::size_t k = 1; k + 1 < m; ++k) {
    Eigen::VectorXd dl = (samples[k + 1].lambda - samples[k - 1].lambda) / (2.0 * dt);
    lam1[k] = dl + connection_term(Lvals[k], samples[k].lambda, samples[k].lambda, theta);
  }
  for (std::size_t k = 2; k + 2 < m; ++k) {
    Eigen::VectorXd dl1 = (lam1[k + 1] - lam1[k - 1]) / (2.0 * dt);
    Eigen::VectorXd lam2 = dl1 + connection_term(Lvals[k], lam1[k], samples[k].lambda, theta);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, 3);
    const Eigen::VectorXd* cols[3] = {&samples[k].lambda, &lam1[k], &lam2};
    for (int c = 0; c < 3; ++c) {
      const double norm = cols[c]->norm();
      if (norm > column_zero_tol) M.col(c) = *cols[c] / norm;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    result.defect[k] = svd.singularValues().tail(1)(0);
  }
  return result;
}

}  // namespace agm
