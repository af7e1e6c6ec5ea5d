#include "rmm/dispersion_curves.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rmm/error.hpp"

namespace rmm {

std::string to_string(WaveType t) {
  switch (t) {
    case WaveType::Pressure: return "pressure";
    case WaveType::Shear: return "shear";
    case WaveType::Mixed: return "mixed";
  }
  return "mixed";
}

int DispersionCurveSet::branch_count() const {
  int n = 0;
  for (const auto& s : samples) n = std::max(n, static_cast<int>(s.omega.size()));
  return n;
}

std::vector<double> DispersionCurveSet::typed(std::size_t s, WaveType t) const {
  std::vector<double> out;
  const auto& sm = samples.at(s);
  for (std::size_t b = 0; b < sm.omega.size(); ++b) {
    if (sm.type[b] == t) out.push_back(sm.omega[b]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<double> DispersionCurveSet::typed_at(double k, WaveType t, std::size_t j) const {
  if (samples.empty()) return std::nullopt;
  const double scale = std::max(1.0, std::abs(k));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (std::abs(samples[s].k - k) <= 1e-12 * scale) {
      const auto v = typed(s, t);
      if (v.size() <= j) return std::nullopt;
      return v[j];
    }
  }
  for (std::size_t s = 0; s + 1 < samples.size(); ++s) {
    const double k0 = samples[s].k;
    const double k1 = samples[s + 1].k;
    if ((k - k0) * (k - k1) > 0.0 || k0 == k1) continue;
    const auto a = typed(s, t);
    const auto b = typed(s + 1, t);
    if (a.size() <= j || b.size() <= j) return std::nullopt;
    const double w = (k - k0) / (k1 - k0);
    return (1.0 - w) * a[j] + w * b[j];
  }
  return std::nullopt;
}

void DispersionCurveSet::normalise() {
  for (auto& s : samples) {
    std::vector<std::size_t> idx(s.omega.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return s.omega[a] < s.omega[b]; });
    std::vector<double> om;
    std::vector<WaveType> ty;
    for (auto i : idx) {
      om.push_back(s.omega[i]);
      ty.push_back(i < s.type.size() ? s.type[i] : WaveType::Mixed);
    }
    s.omega = std::move(om);
    s.type = std::move(ty);
    s.acoustic.assign(s.omega.size(), 0);
    bool seen_p = false;
    bool seen_s = false;
    for (std::size_t b = 0; b < s.omega.size(); ++b) {
      if (s.type[b] == WaveType::Pressure && !seen_p) {
        s.acoustic[b] = 1;
        seen_p = true;
      } else if (s.type[b] == WaveType::Shear && !seen_s) {
        s.acoustic[b] = 1;
        seen_s = true;
      }
    }
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const auto& a, const auto& b) { return a.k < b.k; });
}

void write_curves_csv(std::ostream& os, const std::vector<DispersionCurveSet>& sets) {
  os << "angle_deg,k,branch_index,omega,type_label\n" << std::setprecision(15);
  for (const auto& set : sets) {
    const double deg = set.angle * 180.0 / std::numbers::pi;
    for (const auto& s : set.samples) {
      for (std::size_t b = 0; b < s.omega.size(); ++b) {
        os << deg << ',' << s.k << ',' << b << ',' << s.omega[b] << ',' << to_string(s.type[b])
           << '-' << (s.acoustic[b] ? "acoustic" : "optic") << '\n';
      }
    }
  }
}

namespace {
WaveType parse_type(const std::string& label) {
  const auto head = label.substr(0, label.find('-'));
  if (head == "pressure") return WaveType::Pressure;
  if (head == "shear") return WaveType::Shear;
  if (head == "mixed") return WaveType::Mixed;
  throw ValidationError("curves csv: unknown type label '" + label + "'");
}
}  // namespace

std::vector<DispersionCurveSet> read_curves_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("curves csv: empty input");
  if (line.rfind("angle_deg,k,branch_index,omega,type_label", 0) != 0) {
    throw ValidationError("curves csv: unexpected header '" + line + "'");
  }
  // angle → k → (branch → (omega, type))
  std::map<double, std::map<double, std::map<int, std::pair<double, WaveType>>>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[5];
    for (auto& x : f) {
      if (!std::getline(ss, x, ',')) {
        throw ValidationError("curves csv: line " + std::to_string(lineno) + " has too few fields");
      }
    }
    try {
      rows[std::stod(f[0])][std::stod(f[1])][std::stoi(f[2])] = {std::stod(f[3]),
                                                                  parse_type(f[4])};
    } catch (const std::invalid_argument&) {
      throw ValidationError("curves csv: line " + std::to_string(lineno) + " is not numeric");
    }
  }
  std::vector<DispersionCurveSet> out;
  for (const auto& [deg, ks] : rows) {
    DispersionCurveSet set;
    set.angle = deg * std::numbers::pi / 180.0;
    for (const auto& [k, branches] : ks) {
      DispersionSample s;
      s.k = k;
      for (const auto& [b, v] : branches) {
        s.omega.push_back(v.first);
        s.type.push_back(v.second);
      }
      set.samples.push_back(std::move(s));
    }
    set.normalise();
    out.push_back(std::move(set));
  }
  return out;
}

namespace {

const DispersionSample* k_zero(const DispersionCurveSet& set) {
  for (const auto& s : set.samples) {
    if (s.k == 0.0) return &s;
  }
  return nullptr;
}

struct Level {
  double omega;
  WaveType type;
  int multiplicity;
};

/// Non-zero k = 0 levels with degenerate clusters merged.
std::vector<Level> levels(const DispersionSample& s, double zero_tol) {
  const double top = s.omega.empty() ? 0.0 : s.omega.back();
  std::vector<Level> out;
  for (std::size_t b = 0; b < s.omega.size(); ++b) {
    if (s.omega[b] <= zero_tol * top) continue;
    if (!out.empty() && std::abs(s.omega[b] - out.back().omega) <= 1e-6 * s.omega[b]) {
      ++out.back().multiplicity;
      continue;
    }
    out.push_back({s.omega[b], s.type[b], 1});
  }
  return out;
}

}  // namespace

CutoffExtraction extract_cutoffs(const DispersionCurveSet& at_0, const DispersionCurveSet* at_45,
                                 double zero_tol) {
  CutoffExtraction out;
  const auto* s0 = k_zero(at_0);
  if (!s0) throw ValidationError("extract_cutoffs: curves have no k = 0 sample");
  const auto l0 = levels(*s0, zero_tol);
  for (const auto& l : l0) out.candidates.push_back(l.omega);

  std::optional<double> slot[4];  // s1, s2, p1, p2
  if (at_45) {
    const auto* s45 = k_zero(*at_45);
    if (!s45) throw ValidationError("extract_cutoffs: 45° curves have no k = 0 sample");
    const auto l45 = levels(*s45, zero_tol);
    for (const auto& a : l0) {
      if (a.multiplicity != 1) continue;
      const Level* match = nullptr;
      for (const auto& b : l45) {
        if (std::abs(a.omega - b.omega) <= 1e-4 * a.omega) match = &b;
      }
      if (!match) continue;
      out.angle_mismatch = std::max(out.angle_mismatch, std::abs(a.omega - match->omega) / a.omega);
      if (match->multiplicity != 1) continue;
      const bool s_0 = a.type == WaveType::Shear;
      const bool s_45 = match->type == WaveType::Shear;
      if (a.type == WaveType::Mixed || match->type == WaveType::Mixed) continue;
      const int idx = s_0 ? (s_45 ? 0 : 1) : (s_45 ? 2 : 3);
      if (!slot[idx]) slot[idx] = a.omega;
    }
  } else {
    std::vector<double> sh, pr;
    for (const auto& a : l0) {
      if (a.multiplicity != 1) continue;
      if (a.type == WaveType::Shear) sh.push_back(a.omega);
      if (a.type == WaveType::Pressure) pr.push_back(a.omega);
    }
    if (sh.size() >= 1) slot[0] = sh[0];
    if (sh.size() >= 2) slot[1] = sh[1];
    if (pr.size() >= 1) slot[2] = pr[0];
    if (pr.size() >= 2) slot[3] = pr[1];
  }
  if (slot[0] && slot[1] && slot[2] && slot[3]) {
    out.cutoffs = Cutoffs{*slot[0], *slot[1], *slot[2], *slot[3]};
  } else if (l0.empty()) {
    out.note = "no optic branch at k = 0 below the computed band count";
  } else {
    out.note = "fewer than four classified cut-offs below the computed band count";
  }
  return out;
}

std::vector<std::pair<double, double>> band_gap(const std::vector<DispersionCurveSet>& sets) {
  // Branches of one symmetry type do not cross, so each typed branch covers
  // [min, max] over k without gaps. Sorting all branches together would open
  // spurious gaps at unsampled crossings of different types.
  std::vector<std::pair<double, double>> ranges;
  double ceiling = INFINITY;  // above this some sample lacks branches
  for (const auto& set : sets) {
    for (const auto& s : set.samples) {
      if (s.omega.empty()) continue;
      ceiling = std::min(ceiling, *std::max_element(s.omega.begin(), s.omega.end()));
    }
    for (auto t : {WaveType::Pressure, WaveType::Shear, WaveType::Mixed}) {
      for (std::size_t j = 0;; ++j) {
        double lo = INFINITY;
        double hi = -INFINITY;
        for (std::size_t i = 0; i < set.samples.size(); ++i) {
          const auto w = set.typed(i, t);
          if (j >= w.size()) continue;
          lo = std::min(lo, w[j]);
          hi = std::max(hi, w[j]);
        }
        if (!(lo <= hi)) break;
        ranges.emplace_back(lo, hi);
      }
    }
  }
  std::sort(ranges.begin(), ranges.end());
  std::vector<std::pair<double, double>> gaps;
  if (ranges.empty()) return gaps;
  double covered = ranges.front().second;
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].first > ceiling) break;
    if (ranges[i].first > covered) gaps.emplace_back(covered, ranges[i].first);
    covered = std::max(covered, ranges[i].second);
  }
  return gaps;
}

std::vector<std::pair<double, double>> band_gap(const DispersionCurveSet& curves) {
  return band_gap(std::vector<DispersionCurveSet>{curves});
}

}  // namespace rmm
