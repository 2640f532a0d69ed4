#pragma once

#include <optional>

#include "agm/invariants.hpp"

namespace agm {

struct AuditOptions {
  DerivMode mode = DerivMode::exact();
  CurvatureMode curvature = CurvatureMode::Paper;
  // Exact-mode defaults; the FD defaults are 1e-6 / 1e-4 (see default_tolerances).
  double tol_algebraic = 1e-10;
  double tol_derivative = 1e-8;
  // Forced readings; when unset every enumerated reading is evaluated and the
  // minimal-residual one is reported.
  std::optional<int> force_a12;     // 0 contracted-covector, 1 plain-partial
  std::optional<int> force_nu_hat;  // 0 barred-derivatives, 1 source-derivatives
  std::optional<int> force_a18;     // 0 plain-trace, 1 alternated-trace
  std::optional<int> force_a19;     // 0 alternated-trace, 1 plain-trace
};

/// Layer tolerances per mode: algebraic checks 1e-10 exact / 1e-6 fd,
/// derivative-chain checks 1e-8 exact / 1e-4 fd.
std::pair<double, double> default_tolerances(DerivMode mode);

struct IdentityCheck {
  std::string id;      // A1..A21
  std::string eq_ref;  // short description of the relation checked
  double residual = 0.0;
  Point argmax_point;
  std::vector<int> argmax_index;  // 0-based; reports render 1-based
  bool pass = false;
  bool inherited = false;  // some earlier check in the chain already failed
  std::string reading;     // chosen reading, empty when none is enumerated
};

struct AuditReport {
  std::vector<IdentityCheck> checks;
  bool all_pass = false;
  std::string summary;  // "all pass" or the first failing check
};

/// Runs every identity of the derivation chain over the grid. LHS and RHS of
/// each identity are evaluated through separate routes that share only the
/// primitive layers, so a check cannot pass tautologically. Failures are
/// recorded, never thrown; an invalid instance simply fails early and the
/// later checks carry the inherited flag.
AuditReport run_audit(const ConnectionField& L, const MappingInstance& inst, const Grid& grid,
                      const AuditOptions& opts);

/// First failing check in dependency order, or nullptr when all pass.
const IdentityCheck* localize_failure(const AuditReport& report);

}  // namespace agm
