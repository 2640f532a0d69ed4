#include "agm/curvature.hpp"

#include <stdexcept>

namespace agm {

Values curvature_std(const TensorField& S, const Point& x, DerivMode mode) {
  const int n = S.dim();
  EvalCache cache;
  Values Sv = S.eval(x, cache);
  std::vector<Values> dS;
  dS.reserve(n);
  for (int k = 0; k < n; ++k) dS.push_back(partial_tensor(S, k, x, mode));
  Values R(std::vector<int>{n, n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int nn = 0; nn < n; ++nn) {
          double v = dS[nn](i, j, m) - dS[m](i, j, nn);
          for (int a = 0; a < n; ++a)
            v += Sv(a, j, m) * Sv(i, a, nn) - Sv(a, j, nn) * Sv(i, a, m);
          R(i, j, m, nn) = v;
        }
  return R;
}

Values curvature_std(const ConnectionField& L, const Point& x, DerivMode mode) {
  return curvature_std(L.sym(), x, mode);
}

Values curvature_paper(const ConnectionField& L, const Point& x, DerivMode mode) {
  const int n = L.dim();
  EvalCache cache;
  Values Sv = L.sym().eval(x, cache);
  Values Tv = L.torsion().eval(x, cache);
  Values Sd = covdiff(L, L.sym(), 1, x, mode);  // S~^i_{jm|1n}, (i,j,m,n)
  Values R(std::vector<int>{n, n, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        for (int nn = 0; nn < n; ++nn) {
          double v = Sd(i, j, m, nn) - Sd(i, j, nn, m);
          for (int a = 0; a < n; ++a) {
            v += -Tv(i, a, nn) * Sv(a, j, m) - Tv(a, j, m) * Sv(i, a, nn) +
                 Tv(a, j, nn) * Sv(i, a, m) + Tv(i, a, m) * Sv(a, j, nn) +
                 2.0 * Tv(a, m, nn) * Sv(i, j, a);
          }
          R(i, j, m, nn) = v;
        }
  return R;
}

Values curvature(const ConnectionField& L, CurvatureMode cmode, const Point& x, DerivMode mode) {
  return cmode == CurvatureMode::Paper ? curvature_paper(L, x, mode) : curvature_std(L, x, mode);
}

Eigen::MatrixXd ricci(const Values& R) {
  if (R.rank() != 4) throw std::invalid_argument("ricci expects a rank-4 array");
  const int n = R.shape()[0];
  Eigen::MatrixXd out(n, n);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m) {
      double v = 0.0;
      for (int a = 0; a < n; ++a) v += R(a, j, m, a);
      out(j, m) = v;
    }
  return out;
}

}  // namespace agm
