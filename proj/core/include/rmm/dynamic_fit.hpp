#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rmm/dispersion_curves.hpp"
#include "rmm/rmm_dispersion.hpp"
#include "rmm/tensors.hpp"

namespace rmm {

enum class DynParam { LambdaM2, MuM2, MuStarM2, MuC2, CurvInertia };
std::string to_string(DynParam p);
DynParam parse_dyn_param(const std::string& s);
double get(const RmmDynamicParams& d, DynParam p);
void set(RmmDynamicParams& d, DynParam p, double v);

struct DynamicFitProblem {
  RmmStaticParams statics;
  double rho = 0.0;
  double l = 0.0;
  /// m1/c1 block (already identified) plus start values of the free
  /// parameters and fixed values of the others.
  RmmDynamicParams start;
  /// One curve set per incidence angle (0°, optionally 45°).
  std::vector<DispersionCurveSet> references;
  /// false: RRMM, both curvature terms removed.
  bool curvature = true;
  std::vector<DynParam> free{DynParam::LambdaM2, DynParam::MuM2, DynParam::MuStarM2,
                             DynParam::MuC2, DynParam::CurvInertia};
  double acoustic_weight = 2.0;
  double optic_weight = 1.0;
  std::vector<double> k_fractions{0.2, 0.4, 0.6, 0.8, 1.0};
  int starts = 16;
  std::uint64_t seed = 3;
  int max_iterations = 200;
};

struct BranchResidual {
  double angle = 0.0;
  double k = 0.0;
  WaveType type = WaveType::Pressure;
  int branch = 0;  // ascending index within the type
  double model = 0.0;
  double reference = 0.0;
  double weight = 0.0;
};

struct DynamicFitReport {
  RmmDynamicParams fitted;
  std::vector<DynParam> free;
  bool curvature = true;
  int directions = 1;
  double cost = 0.0;
  std::vector<std::pair<double, double>> cost_by_angle;  // (angle, cost)
  std::vector<double> cost_trace;  // best start, accepted iterates
  std::vector<BranchResidual> residuals;
  /// (cost, free values) of every converged start, ascending.
  std::vector<std::pair<double, std::vector<double>>> minima;
  /// Directions in the free parameters along which the cost is flat.
  std::vector<std::vector<double>> unidentifiable;
  std::vector<std::string> notes;
};

/// Pairs model and reference branches of the same type by ascending ω at one
/// sample. Returns (model index, reference index) pairs. Throws
/// ValidationError when the per-type counts differ.
std::vector<std::pair<int, int>> pair_branches(const DispersionSample& model,
                                               const DispersionSample& reference);

/// Σ [r_i(ω_i(k_j) − ω_ref)]² over the problem's angles and k_j for the
/// given parameters (RRMM substitution applied when curvature is off).
double dynamic_cost(const DynamicFitProblem& problem, const RmmDynamicParams& params);

DynamicFitReport fit_one_direction(const DynamicFitProblem& problem);
DynamicFitReport fit_two_directions(const DynamicFitProblem& problem);

std::string to_json(const DynamicFitReport& report);
/// angle_deg,k,type,branch,model_omega,reference_omega,weight
void write_overlay_csv(std::ostream& os, const DynamicFitReport& report);

}  // namespace rmm
