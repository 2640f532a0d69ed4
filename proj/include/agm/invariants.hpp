#pragma once

#include "agm/agmap.hpp"
#include "agm/curvature.hpp"

namespace agm {

/// A connection together with the mapping data living on it and the derived
/// fields materialized symbolically, so exact derivatives remain available
/// all the way up the chain. The barred side of a mapping is just another
/// MappingSide built from (deform(L, inst), invert_instance(...)).
struct MappingSide {
  ConnectionField L;
  MappingInstance inst;
  TensorField omega;      // (1,2), symmetric in the lower pair
  TensorField thomas;     // L - omega
  TensorField usym;       // symmetrized thomas
  TensorField sym_trace;  // covector S~^a_{ja}
};

MappingSide make_side(ConnectionField L, MappingInstance inst);

TensorField omega_field(const ConnectionField& L, const MappingInstance& inst);

Values omega(const ConnectionField& L, const MappingInstance& inst, const Point& x);
Values thomas_pi2(const ConnectionField& L, const MappingInstance& inst, const Point& x);
Values u_sym(const ConnectionField& L, const MappingInstance& inst, const Point& x);

struct DegenerateAffinorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Prior invariant of the canonical mappings; requires e - F^2 != 0 at x
/// (F the affinor trace). Throws DegenerateAffinorError inside the guard.
Values t1(const ConnectionField& L, const MappingInstance& inst, const Point& x);

/// Scope of the printed symmetrization in the torsion-affinor terms of the
/// second prior invariant; both readings are computed and reported, never
/// silently chosen.
enum class T2Reading { SymmetrizePair, NoSymmetrize };

Values t2hat(const ConnectionField& L, const MappingInstance& inst, const Point& x, DerivMode mode,
             T2Reading reading);

/// Curvature-level deformation tensor (i,j,m,n); kind-1 derivatives
/// throughout.
Values f_script(const MappingSide& side, const Point& x, DerivMode mode);

/// F_{jm} = F^a_{jma}.
Eigen::MatrixXd f_trace(const Values& f);

/// Whether the derivative blocks of the barred half use the barred
/// connection (default) or the source connection.
enum class NuHatReading { BarredDerivatives, SourceDerivatives };

Eigen::MatrixXd nu_hat(const MappingSide& src, const MappingSide& tgt, const Point& x,
                       DerivMode mode, NuHatReading reading);

Values rho_hat(const MappingSide& side, const Point& x, DerivMode mode);

/// omega-bar_{jm||1n} - omega_{jm|1n}, each differentiated in its own space.
Values delta_hat(const MappingSide& src, const MappingSide& tgt, const Point& x, DerivMode mode);

/// Whether the rank-2 deformation traces entering the Weyl combination are
/// alternated like the Ricci traces (default) or taken plain.
enum class WeylTraceReading { Alternated, Plain };

/// The Weyl-type combination of the curvature, its Ricci traces, the
/// deformation tensor and its traces; brackets alternate without division.
Values weyl_pi2(const MappingSide& side, const Point& x, CurvatureMode cmode, DerivMode mode,
                WeylTraceReading reading = WeylTraceReading::Alternated);

}  // namespace agm
