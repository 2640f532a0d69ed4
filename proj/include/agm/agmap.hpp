#pragma once

#include <memory>
#include <string>
#include <vector>

#include "agm/space.hpp"

namespace agm {

class FitContext;

/// A covector-valued coefficient of the basic equations. Either backed by
/// expression components, or realized pointwise as the least-squares solution
/// of the basic equations (used for the mu/nu of an inverted mapping, which
/// have no closed form in general). Fitted evaluations are memoized per point.
class CovectorProvider {
 public:
  CovectorProvider() = default;
  static CovectorProvider from_field(TensorField f);
  static CovectorProvider fitted_mu(std::shared_ptr<const FitContext> ctx);
  static CovectorProvider fitted_nu(std::shared_ptr<const FitContext> ctx);

  Eigen::VectorXd eval(const Point& x, DerivMode mode) const;
  bool symbolic() const { return ctx_ == nullptr; }
  const TensorField& field() const;  // throws for fitted providers

 private:
  TensorField field_;
  std::shared_ptr<const FitContext> ctx_;
  bool want_mu_ = true;
};

/// Deformation data (psi, sigma, F, mu, nu, e, theta) of an equitorsion
/// second-type almost geodesic mapping. xi vanishes identically for the
/// equitorsion class handled here.
struct MappingInstance {
  TensorField psi;    // covector
  TensorField sigma;  // covector
  TensorField F;      // (1,1) affinor
  CovectorProvider mu;
  CovectorProvider nu;
  int e = 0;      // F^i_a F^a_j = e delta^i_j, e in {0, +1, -1}
  int theta = 1;  // derivative kind used by the basic equations

  int dim() const { return F.dim(); }
};

struct FitError : std::runtime_error {
  FitError(const std::string& what, double res) : std::runtime_error(what), residual(res) {}
  double residual;
};

struct GeneratorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lbar^i_{jk} = L^i_{jk} + psi_j d^i_k + psi_k d^i_j + sigma_j F^i_k
/// + sigma_k F^i_j, materialized symbolically. Torsion is preserved.
ConnectionField deform(const ConnectionField& L, const MappingInstance& inst);

/// max over the grid of |F^i_a F^a_j - e d^i_j|.
double reciprocity_residual(const MappingInstance& inst, const Grid& grid);

/// max over grid and (i,j,k) of the basic-equation residual
/// F^i_{j|tk} + F^i_{k|tj} - mu_j F^i_k - mu_k F^i_j
///   - (nu_j - e sigma_j) d^i_k - (nu_k - e sigma_k) d^i_j.
double basic_residual(const ConnectionField& L, const MappingInstance& inst, const Grid& grid,
                      DerivMode mode);

/// Residual of the trace of the basic equation:
/// F_{,j} - mu_j F - mu_a F^a_j - (N+1)(nu_j - e sigma_j) + F^a_{j|ta},
/// F being the trace scalar (its covariant derivative reduces to the plain
/// partial).
double contracted_residual(const ConnectionField& L, const MappingInstance& inst, const Grid& grid,
                           DerivMode mode);

/// Max deviation of the stored psi from its algebraic recovery out of the
/// connection traces and (sigma, F), with the barred data taken as
/// (-sigma, F).
double recover_psi(const ConnectionField& L, const ConnectionField& Lbar,
                   const MappingInstance& inst, const Grid& grid, DerivMode mode);

struct FitResult {
  Eigen::VectorXd mu;
  Eigen::VectorXd nu;
  double residual = 0.0;  // max-abs residual of the flattened basic equations
};

/// Least-squares solve of the basic equations for (mu, nu) at a point, over
/// all component equations (i, j<=k). Rank deficiency (possible for e=0 or
/// special F) is absorbed by the minimal-norm solution; the residual tells
/// the caller whether the data was consistent.
FitResult fit_mu_nu(const ConnectionField& L, const TensorField& F, const TensorField& sigma,
                    int e, int theta, const Point& x, DerivMode mode);

/// Inverse mapping data: psi -> -psi, sigma -> -sigma, F unchanged; mu and nu
/// are refitted against the deformed connection. Throws FitError when the
/// refit residual exceeds `tol` on the grid.
MappingInstance invert_instance(const ConnectionField& L, const MappingInstance& inst,
                                const Grid& grid, double tol = 1e-8);

struct GeneratorParams {
  int n = 2;
  int e = 1;
  Eigen::MatrixXd F0;          // constant affinor with F0*F0 = e*I
  std::vector<std::string> p;  // covector expressions, torsion profile
  std::vector<std::string> q;  // covector expressions, symmetric profile
  std::vector<std::string> sigma;
  std::vector<std::string> psi;
};

struct Generated {
  ConnectionField L;
  MappingInstance inst;
};

/// Builds a connection and instance satisfying the reciprocity relation and
/// the theta=1 basic equations exactly:
///   S~^i_{jk} = q_j d^i_k + q_k d^i_j,  T~^i_{jk} = p_j F0^i_k - p_k F0^i_j,
///   mu_j = (p F0)_j - q_j,              nu_j = e sigma_j + (q F0)_j - e p_j.
/// The construction is validated against basic_residual on `grid` before
/// being returned.
Generated generate_instance(const GeneratorParams& params, const Grid& grid);

}  // namespace agm
