#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmm/elasticity.hpp"
#include "rmm/error.hpp"
#include "rmm/rmm_solver.hpp"
#include "rmm/tensors.hpp"

namespace rmm {

/// Energy model of the fit: Π for every (load, size) case and its
/// derivatives with respect to the five unknowns.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;
  virtual std::size_t case_count() const = 0;
  /// Energies, and the case_count × 5 Jacobian when `jacobian` is non-null.
  virtual Eigen::VectorXd evaluate(const StaticUnknowns& x, Eigen::MatrixXd* jacobian) = 0;
};

/// RMM finite-element energies of homogeneous n×n specimens. Cases are
/// ordered by n, then by load, as in reference_energies.
class FemEnergyModel final : public EnergyModel {
 public:
  FemEnergyModel(double l, std::vector<int> n_list, std::vector<AffineLoadCase> loads,
                 int resolution, const TetragonalElasticity& c_macro, RmmOptions options = {});
  ~FemEnergyModel() override;
  std::size_t case_count() const override { return n_list_.size() * loads_.size(); }
  Eigen::VectorXd evaluate(const StaticUnknowns& x, Eigen::MatrixXd* jacobian) override;
  /// Number of parameter sets evaluated so far.
  int evaluations() const { return evaluations_; }

 private:
  std::vector<int> n_list_;
  std::vector<AffineLoadCase> loads_;
  TetragonalElasticity c_macro_;
  std::vector<std::unique_ptr<RmmProblem>> problems_;
  int evaluations_ = 0;
};

/// Raised when the scaled sensitivity matrix has a null space.
class RankDeficientError : public NumericError {
 public:
  RankDeficientError(const std::string& what, std::vector<Vector5d> null_space)
      : NumericError(what), null_space_(std::move(null_space)) {}
  const std::vector<Vector5d>& null_space() const { return null_space_; }

 private:
  std::vector<Vector5d> null_space_;
};

using FreeMask = std::array<bool, 5>;

/// Gauss–Newton increment ΔΛ = (DᵀD)⁻¹Dᵀ(a_het − a_RMM) over the free
/// parameters, solved by column-pivoted QR on D with columns scaled by
/// `scale`. Fixed parameters get zero increment.
Vector5d gauss_newton_step(const Eigen::MatrixXd& d, const Eigen::VectorXd& residual,
                           const FreeMask& free, const Vector5d& scale);

/// Minimum-norm increment (scaled) that tolerates rank deficiency.
Vector5d minimum_norm_step(const Eigen::MatrixXd& d, const Eigen::VectorXd& residual,
                           const FreeMask& free, const Vector5d& scale);

/// Largest admissible step fraction with h(x) = x for x > 0 else 1. Active
/// candidates are shrunk by the factor 1 − 1e-9.
double beta_max(const StaticUnknowns& x, const Vector5d& dx, const TetragonalElasticity& c_macro);

/// argmin of r2 on [0, β_max] by Brent's method (tolerance about 1e-3·β_max).
/// Both ends are always evaluated so a monotone profile returns an end point.
double line_search(const std::function<double(double)>& r2, double beta_max);

struct StaticFitProblem {
  Eigen::VectorXd targets;
  TetragonalElasticity c_macro;
  StaticUnknowns start;
  /// When set, μ_c is fixed to this value and removed from the update.
  std::optional<double> mu_c_pin;
  int max_iterations = 200;
  double relative_change_tolerance = 1e-8;
  /// Labels of the cases for the report, e.g. "shear,n=2".
  std::vector<std::string> case_labels;
};

struct IterationRecord {
  int iteration = 0;
  double r2 = 0.0;
  double beta_max = 0.0;
  double beta = 0.0;
  Vector5d x = Vector5d::Zero();
  std::string frozen;  // parameters frozen at a bound for this step
};

struct FitReport {
  StaticUnknowns result;
  TetragonalElasticity c_macro;
  std::vector<IterationRecord> history;
  std::vector<std::string> constraint_log;
  Eigen::VectorXd targets;
  Eigen::VectorXd energies;
  std::vector<std::string> case_labels;
  double r2 = 0.0;
  double r2_relative = 0.0;  // r² / Σ target²
  double average_error = 0.0;
  bool converged = false;
  std::string stop_reason;
  /// Unidentifiable directions: from a rank-deficient step, or scaled
  /// singular values below 1e-6 of the largest at the result.
  std::vector<Vector5d> null_space;
  int evaluations = 0;
};

FitReport fit_static(const StaticFitProblem& problem, EnergyModel& model);

/// Names of the five unknowns in report order.
const std::array<const char*, 5>& static_unknown_names();

void write_iteration_csv(std::ostream& os, const FitReport& report);
/// Deterministic JSON (fixed float formatting).
std::string to_json(const FitReport& report);

}  // namespace rmm
