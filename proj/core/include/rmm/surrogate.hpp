#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmm/elasticity.hpp"
#include "rmm/mlp.hpp"
#include "rmm/rmm_solver.hpp"
#include "rmm/static_fit.hpp"

namespace rmm {

/// Box of the five unknowns (μ_micro, μ*_micro, λ_micro, μ_c, μL_c²).
struct ParameterRanges {
  Vector5d lo = Vector5d::Zero();
  Vector5d hi = Vector5d::Zero();
  /// μ_micro ∈ [μ_macro, μ_matrix], μ*_micro ∈ [μ*_macro, 10μ*_matrix],
  /// λ_micro ∈ [λ_macro, λ_matrix], μ_c ∈ [0, μ_macro],
  /// μL_c² ∈ [0.1 N, 5μ_macro l²].
  static ParameterRanges standard(const TetragonalElasticity& c_macro,
                                  const TetragonalElasticity& matrix, double l);
};

struct SurrogateSpec {
  double l = 1e-3;
  TetragonalElasticity c_macro;
  ParameterRanges ranges;
  std::array<int, 5> counts{5, 5, 5, 5, 5};
  int resolution = 4;
  std::vector<int> n_list{1, 2};
  double amplitude = 0.01;
  RmmOptions options;
};

struct TrainingRow {
  Vector5d x = Vector5d::Zero();
  int case_index = 0;  // index into loads × n_list (n-major)
  LoadMode mode = LoadMode::Volumetric;
  int n = 1;
  double energy = 0.0;
};

struct TrainingDataset {
  SurrogateSpec spec;
  std::vector<TrainingRow> rows;
  std::vector<std::string> skipped;  // grid points rejected at a bound
  std::size_t case_count() const { return spec.n_list.size() * 3; }
};

/// Equally spaced grid over the ranges (a count of 1 takes the midpoint);
/// every admissible point is solved for the three standard loads and each n.
TrainingDataset generate_dataset(const SurrogateSpec& spec);

void write_dataset_csv(std::ostream& os, const TrainingDataset& data);

struct TrainOptions {
  std::vector<int> hidden{128, 128, 128};
  /// ln x features for the strictly positive, wide-range inputs.
  std::array<bool, 5> log_input{true, true, true, false, true};
  AdamOptions adam;
  double validation_fraction = 0.1;
  std::uint64_t split_seed = 11;
};

struct NetworkSummary {
  std::string label;
  double validation_r2 = 0.0;  // energy scale
  double train_r2 = 0.0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  std::vector<double> loss_trace;
};

/// One network per (n, load) case on standardised inputs and a
/// log-transformed, standardised energy.
class SurrogateModel final : public EnergyModel {
 public:
  struct Net {
    std::string label;
    Mlp mlp;
    /// Inputs flagged here enter through ln x before standardisation.
    std::array<bool, 5> log_input{};
    Vector5d x_mean = Vector5d::Zero();
    Vector5d x_std = Vector5d::Ones();

    /// Standardised network input and dz_j/dx_j.
    Eigen::VectorXd features(const Vector5d& x, Vector5d* dzdx = nullptr) const;
    double y_mean = 0.0;
    double y_std = 1.0;
  };

  SurrogateModel() = default;
  explicit SurrogateModel(std::vector<Net> nets) : nets_(std::move(nets)) {}

  std::size_t case_count() const override { return nets_.size(); }
  Eigen::VectorXd evaluate(const StaticUnknowns& x, Eigen::MatrixXd* jacobian) override;
  double predict(std::size_t case_index, const Vector5d& x) const;

  const std::vector<Net>& nets() const { return nets_; }

  void save(std::ostream& os, const std::string& notes = {}) const;
  static SurrogateModel load(std::istream& is);

 private:
  std::vector<Net> nets_;
};

struct TrainResult {
  SurrogateModel model;
  std::vector<NetworkSummary> networks;
  double min_validation_r2 = 0.0;
};

TrainResult train(const TrainingDataset& data, const TrainOptions& options);

/// Generic single-network fit used by train(): rows of x (N × 5), targets y.
/// Returns the trained net and fills the summary.
SurrogateModel::Net train_network(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  bool log_target, const TrainOptions& options,
                                  NetworkSummary* summary);

struct StartPrediction {
  StaticUnknowns best;
  double best_r2 = 0.0;
  int feasible_starts = 0;
  std::vector<std::pair<double, Vector5d>> ranked;  // (r², Λ) ascending
};

/// Runs the static-fit loop on the surrogate from seeded random starts inside
/// the ranges and returns the lowest-cost result.
StartPrediction predict_start(SurrogateModel& model, const Eigen::VectorXd& targets,
                              const TetragonalElasticity& c_macro, int n_starts,
                              const ParameterRanges& ranges, std::uint64_t seed,
                              std::optional<double> mu_c_pin = std::nullopt);

}  // namespace rmm
