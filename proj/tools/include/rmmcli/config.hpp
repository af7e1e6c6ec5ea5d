#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmm/geometry.hpp"
#include "rmm/rmm_dispersion.hpp"
#include "rmm/rmm_solver.hpp"
#include "rmm/tensors.hpp"

namespace rmmcli {

inline constexpr int kSchemaVersion = 1;

enum class Stage { Homogenize, Bloch, RmmDisp, FitStatic, TrainSurrogate, FitDynamic };
inline constexpr std::array<Stage, 6> kStageOrder{Stage::Homogenize,     Stage::Bloch,
                                                  Stage::RmmDisp,        Stage::FitStatic,
                                                  Stage::TrainSurrogate, Stage::FitDynamic};
std::string stage_key(Stage s);  // "fit_static", ...
std::string stage_command(Stage s);  // "fit-static", ...

struct HomogenizeOptions {
  int resolution = 20;
};

struct BlochOptions {
  int resolution = 20;
  std::vector<double> angles{0.0};  // rad
  int k_count = 21;
  int branches = 8;
};

struct FitStaticOptions {
  int resolution = 20;
  std::vector<int> n_list{1, 2, 3};
  double amplitude = 0.01;
  std::optional<rmm::StaticUnknowns> start;
  std::optional<double> mu_c_pin;
  int max_iterations = 200;
};

struct SurrogateOptions {
  std::array<int, 5> counts{5, 5, 5, 5, 5};
  int resolution = 4;
  std::vector<int> n_list{1, 2};
  double amplitude = 0.01;
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::vector<int> hidden{128, 128, 128};
  int starts = 16;
  std::uint64_t seed = 7;
  std::uint64_t split_seed = 11;
  std::uint64_t start_seed = 5;
};

struct RmmDispOptions {
  std::vector<double> angles{0.0};
  int k_count = 21;
};

struct FitDynamicOptions {
  /// Each combination of curvature flag and direction count is fitted.
  std::vector<bool> curvature{true, false};
  std::vector<int> directions{1};
  int starts = 16;
  std::uint64_t seed = 3;
  double acoustic_weight = 2.0;
  double optic_weight = 1.0;
  std::vector<double> k_fractions{0.2, 0.4, 0.6, 0.8, 1.0};
  std::optional<std::filesystem::path> curves;  // reference CSV instead of the bloch stage
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::filesystem::path output_dir = "rmmid-out";
  rmm::UnitCellGeometry geometry;
  rmm::BaseMaterial material;
  std::vector<Stage> stages;  // as toggled, in canonical order
  /// Explicit inputs that replace upstream stages.
  std::optional<rmm::TetragonalElasticity> c_macro;
  std::optional<double> rho;
  std::optional<rmm::StaticUnknowns> statics;
  std::optional<rmm::RmmDynamicParams> dynamics;
  HomogenizeOptions homogenize;
  BlochOptions bloch;
  RmmDispOptions rmm_disp;
  FitStaticOptions fit_static;
  SurrogateOptions surrogate;
  FitDynamicOptions fit_dynamic;

  bool enabled(Stage s) const;
  /// Canonical JSON text of the parsed configuration (SI values); the
  /// manifest hash is taken over it.
  std::string canonical() const;
};

/// Parses "51.08 GPa", "1 mm", "2700 kg/m3", "1089.6 N", "4.6e6 rad/s" to
/// SI. `expected` is the unit family ("Pa", "m", "kg/m3", "N", "rad/s",
/// "kg/m", "kg*m", "rad") and `path` prefixes error messages.
double parse_quantity(const std::string& text, const std::string& expected,
                      const std::string& path);

/// Applies "a.b.c=value" overrides to the JSON text; the value is read as
/// JSON when it parses and as a string otherwise.
std::string apply_overrides(const std::string& json_text, const std::vector<std::string>& sets);

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);

/// Throws ValidationError naming the first missing prerequisite.
void validate_prerequisites(const RunConfig& c);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace rmmcli
