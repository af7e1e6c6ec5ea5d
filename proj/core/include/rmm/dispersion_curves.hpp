#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace rmm {

enum class WaveType { Pressure, Shear, Mixed };
std::string to_string(WaveType t);

/// One wavenumber sample: frequencies ascending with their labels.
struct DispersionSample {
  double k = 0.0;                 // rad/m
  std::vector<double> omega;      // rad/s, ascending
  std::vector<WaveType> type;     // per branch
  std::vector<char> acoustic;     // per branch, lowest branch of its type
};

/// Sampled branches ω_i(k) for one incidence angle.
struct DispersionCurveSet {
  double angle = 0.0;  // rad
  std::vector<DispersionSample> samples;

  int branch_count() const;
  /// Frequencies of the given type at sample s, ascending.
  std::vector<double> typed(std::size_t s, WaveType t) const;
  /// Linear interpolation in k of the j-th branch of type t (ascending within
  /// the type). Returns nullopt outside the sampled range or when a sample
  /// has fewer than j+1 branches of that type.
  std::optional<double> typed_at(double k, WaveType t, std::size_t j) const;
  /// Sorts omegas in every sample and recomputes acoustic flags.
  void normalise();
};

/// Writes angle_deg,k,branch_index,omega,type_label. type_label is
/// "<pressure|shear|mixed>-<acoustic|optic>".
void write_curves_csv(std::ostream& os, const std::vector<DispersionCurveSet>& sets);
/// Reads the format above back, one curve set per distinct angle.
std::vector<DispersionCurveSet> read_curves_csv(std::istream& is);

/// The four optic frequencies at k = 0, in the order
/// (ω̄_s¹, ω̄_s², ω̄_p¹, ω̄_p²) = (rotation, μ*-shear, deviatoric, volumetric).
struct Cutoffs {
  double shear1 = 0.0;
  double shear2 = 0.0;
  double pressure1 = 0.0;
  double pressure2 = 0.0;
};

struct CutoffExtraction {
  std::optional<Cutoffs> cutoffs;
  /// Non-zero k = 0 frequencies that were examined.
  std::vector<double> candidates;
  /// Largest relative disagreement of the k = 0 spectra of the two angles.
  double angle_mismatch = 0.0;
  std::string note;
};

/// Classifies the lowest non-degenerate optic frequencies at k = 0. With a
/// 0° and a 45° set each frequency is assigned by its pair of labels:
/// (shear, shear) rotation, (shear, pressure) μ*-shear, (pressure, shear)
/// deviatoric, (pressure, pressure) volumetric. With only the 0° set the two
/// lowest of each type are taken in ascending order. When fewer than four
/// are available `cutoffs` is empty and `note` says why.
CutoffExtraction extract_cutoffs(const DispersionCurveSet& at_0,
                                 const DispersionCurveSet* at_45 = nullptr,
                                 double zero_tolerance = 1e-6);

/// Maximal frequency intervals not covered by any branch over the sampled
/// zone. Coverage is taken per wave type; only frequencies below the lowest
/// per-sample maximum are resolved.
std::vector<std::pair<double, double>> band_gap(const DispersionCurveSet& curves);
std::vector<std::pair<double, double>> band_gap(const std::vector<DispersionCurveSet>& sets);

}  // namespace rmm
