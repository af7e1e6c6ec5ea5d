#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "rmm/dispersion_curves.hpp"
#include "rmmcli/config.hpp"

namespace rmmcli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs the enabled stages in dependency order, writing every artifact and
/// a manifest.json into the output directory. The manifest is written even
/// when a stage throws; the exception is then rethrown.
void run_pipeline(const RunConfig& config, std::ostream& log);

struct OverlaySource {
  std::string name;
  std::vector<rmm::DispersionCurveSet> sets;
};

/// One CSV with columns source, angle, k, branch, type, omega, resampled.
/// Sets are matched by angle; a set whose k-grid differs from the first
/// source's grid at that angle is linearly interpolated onto it and its rows
/// are flagged. Samples outside a set's k-range are dropped.
void export_overlay(std::ostream& os, const std::vector<OverlaySource>& sources);

}  // namespace rmmcli
