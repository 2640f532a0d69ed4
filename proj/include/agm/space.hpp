#pragma once

#include "agm/tensor.hpp"

namespace agm {

struct ConnectionSplit;

/// Coefficients L^i_{jk} of a (generally non-symmetric) affine connection,
/// stored as a (1,2) expression field. The symmetric part, torsion and the
/// contraction covector L^a_{ja} are materialized on first use so exact
/// differentiation flows through every derived object.
class ConnectionField {
 public:
  ConnectionField() = default;
  explicit ConnectionField(TensorField coeffs);

  int dim() const { return coeffs_.dim(); }
  const TensorField& coeffs() const { return coeffs_; }

  const TensorField& sym() const;      // S~^i_{jk} = (L^i_{jk}+L^i_{kj})/2
  const TensorField& torsion() const;  // T~^i_{jk} = (L^i_{jk}-L^i_{kj})/2
  const TensorField& trace() const;    // covector c_j = L^a_{ja}

 private:
  void ensure_split() const;
  TensorField coeffs_;
  mutable bool split_ready_ = false;
  mutable TensorField sym_, torsion_;
  mutable bool trace_ready_ = false;
  mutable TensorField trace_;
};

ConnectionField zero_connection(int dim);

struct ConnectionSplit {
  TensorField sym;
  TensorField torsion;
};

ConnectionSplit split(const ConnectionField& L);

/// Covariant derivative of kind 1..4 of a tensor field with respect to L,
/// extended per index slot: every upper slot picks up +L^i_{ak} (kinds 1,3)
/// or +L^i_{ka} (kinds 2,4), every lower slot -L^a_{jk} (kinds 1,4) or
/// -L^a_{kj} (kinds 2,3), k being the differentiation index. The result has
/// rank p+q+1 with the derivative index appended last. Supported valences:
/// (1,0), (0,1), (1,1), (0,2), (1,2).
Values covdiff(const ConnectionField& L, const TensorField& t, int kind, const Point& x,
               DerivMode mode);

/// Covariant derivative with respect to a symmetric connection field S; all
/// four kinds coincide with this one when the torsion vanishes.
Values covdiff_assoc(const TensorField& S, const TensorField& t, const Point& x, DerivMode mode);

/// Kind-1 covariant derivative of a formally-covector contraction c_j
/// (such as L^a_{ja} or S~^a_{ja}): c_{j,n} - L^b_{jn} c_b, returned as an
/// (j,n) matrix. The contraction is not a tensor; the covector rule is applied
/// formally.
Eigen::MatrixXd formal_contraction_deriv(const ConnectionField& L, const TensorField& covector,
                                         const Point& x, DerivMode mode);

/// Convenience overload for the connection's own trace L^a_{ja}.
Eigen::MatrixXd formal_contraction_deriv(const ConnectionField& L, const Point& x, DerivMode mode);

}  // namespace agm
