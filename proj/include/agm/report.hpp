#pragma once

#include <string>

#include "agm/scenario.hpp"

namespace agm {

/// Metadata embedded in every report so a run is reproducible from the
/// report alone.
struct ReportMeta {
  std::string command;
  std::string scenario_digest;
  DerivMode mode;
  CurvatureMode curvature = CurvatureMode::Paper;
  int theta = 1;
  double tol_algebraic = 0.0;
  double tol_derivative = 0.0;
};

/// All numbers are rendered as 17-significant-digit decimal strings; the
/// byte stream is a deterministic function of the inputs.
std::string format_real(double v);

std::string render_audit_report(const ReportMeta& meta, const AuditReport& report);

struct InvariantsRequest {
  std::vector<Point> points;
  bool include_priors = false;  // t1 / t2hat
  WeylTraceReading weyl_reading = WeylTraceReading::Alternated;
};

std::string render_invariants_report(const ReportMeta& meta, const MappingSide& side,
                                     const InvariantsRequest& req, DerivMode mode,
                                     CurvatureMode cmode);

std::string render_check_report(const ReportMeta& meta, double reciprocity, double basic,
                                double contracted, double tol);

/// CSV rows t, x^1..x^N, lambda^1..lambda^N, defect (empty where undefined).
std::string render_path_csv(const std::vector<CurveSample>& samples,
                            const DefectResult& defects);

std::string render_explicit_scenario(const Scenario& s, const ConnectionField& L,
                                     const MappingInstance& inst);

}  // namespace agm
