#pragma once

#include "agm/space.hpp"

namespace agm {

/// Two readings of the curvature of the associated space. Standard is the
/// coordinate curvature of the symmetric part; Paper expands the associated
/// covariant derivative formally and carries a doubled quadratic term:
///   paper - standard = S~^a_{jm} S~^i_{an} - S~^a_{jn} S~^i_{am}.
enum class CurvatureMode { Paper, Standard };

/// R^i_{jmn} = S_{jm,n} - S_{jn,m} + S^a_{jm} S^i_{an} - S^a_{jn} S^i_{am}
/// for a symmetric connection field S. Index order (i,j,m,n).
Values curvature_std(const TensorField& S, const Point& x, DerivMode mode);
Values curvature_std(const ConnectionField& L, const Point& x, DerivMode mode);

/// The formal-expansion curvature built from kind-1 derivatives of the
/// symmetric part with respect to the full connection plus torsion cross
/// terms; equals standard plus the quadratic difference above.
Values curvature_paper(const ConnectionField& L, const Point& x, DerivMode mode);

Values curvature(const ConnectionField& L, CurvatureMode cmode, const Point& x, DerivMode mode);

/// Ricci contraction R_{jm} = R^a_{jma} (first and last index).
Eigen::MatrixXd ricci(const Values& R);

}  // namespace agm
