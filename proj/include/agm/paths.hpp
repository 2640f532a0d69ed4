#pragma once

#include "agm/space.hpp"

namespace agm {

struct CurveSample {
  double t = 0.0;
  Point x;
  Eigen::VectorXd lambda;  // tangent d l^i / dt
};

struct ChartExitError : std::runtime_error {
  ChartExitError(const std::string& what, double t) : std::runtime_error(what), exit_time(t) {}
  double exit_time;
};

/// Classical fixed-step RK4 integration of the geodesic system
///   dx/dt = lambda,  d lambda^i/dt = -L^i_{ab} lambda^a lambda^b.
/// The torsion part of L annihilates the symmetric lambda-lambda contraction,
/// so only the symmetric part of the connection steers the curve. Throws
/// ChartExitError when the trajectory leaves `bounds`.
std::vector<CurveSample> integrate_geodesic(const ConnectionField& L, const Point& x0,
                                            const Eigen::VectorXd& l0, double t_end, int steps,
                                            const Eigen::MatrixX2d& bounds);

struct DefectResult {
  /// Smallest singular value of the normalized [lambda | lambda_1 | lambda_2]
  /// column matrix, per sample; quiet NaN on the first/last two samples where
  /// the centered-difference stencils do not exist.
  std::vector<double> defect;
  /// True for dimension < 3, where any three vectors are dependent and the
  /// span condition holds vacuously (defects reported as zero).
  bool vacuous = false;
};

/// Tests the almost-geodesic span condition along a sampled curve, against
/// the connection Lbar and derivative kind theta: lambda_1 and lambda_2 are
/// the first and second covariant tangent derivatives, with the d/dt parts
/// realized by centered differences over neighboring samples. Columns with
/// norm below column_zero_tol are treated as exactly zero; they would
/// otherwise normalize integration noise into a fictitious direction.
DefectResult ag_defect(const ConnectionField& Lbar, const std::vector<CurveSample>& samples,
                       int theta, double column_zero_tol = 1e-6);

}  // namespace agm
