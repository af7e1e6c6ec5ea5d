#include "rmm/dynamic_fit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "rmm/bloch.hpp"
#include "rmm/error.hpp"
#include "rmm/parallel.hpp"

namespace rmm {

std::string to_string(DynParam p) {
  switch (p) {
    case DynParam::LambdaM2: return "lambda_m2";
    case DynParam::MuM2: return "mu_m2";
    case DynParam::MuStarM2: return "mu_star_m2";
    case DynParam::MuC2: return "mu_c2";
    case DynParam::CurvInertia: return "curv_inertia";
  }
  return "?";
}

DynParam parse_dyn_param(const std::string& s) {
  for (auto p : {DynParam::LambdaM2, DynParam::MuM2, DynParam::MuStarM2, DynParam::MuC2,
                 DynParam::CurvInertia}) {
    if (to_string(p) == s) return p;
  }
  throw ValidationError("unknown dynamic parameter '" + s + "'");
}

double get(const RmmDynamicParams& d, DynParam p) {
  switch (p) {
    case DynParam::LambdaM2: return d.lambda_m2;
    case DynParam::MuM2: return d.mu_m2;
    case DynParam::MuStarM2: return d.mu_star_m2;
    case DynParam::MuC2: return d.mu_c2;
    case DynParam::CurvInertia: return d.curv_inertia;
  }
  return 0.0;
}

void set(RmmDynamicParams& d, DynParam p, double v) {
  switch (p) {
    case DynParam::LambdaM2: d.lambda_m2 = v; break;
    case DynParam::MuM2: d.mu_m2 = v; break;
    case DynParam::MuStarM2: d.mu_star_m2 = v; break;
    case DynParam::MuC2: d.mu_c2 = v; break;
    case DynParam::CurvInertia: d.curv_inertia = v; break;
  }
}

std::vector<std::pair<int, int>> pair_branches(const DispersionSample& model,
                                               const DispersionSample& reference) {
  std::vector<std::pair<int, int>> out;
  for (auto t : {WaveType::Pressure, WaveType::Shear, WaveType::Mixed}) {
    std::vector<int> a, b;
    for (std::size_t i = 0; i < model.omega.size(); ++i)
      if (model.type[i] == t) a.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < reference.omega.size(); ++i)
      if (reference.type[i] == t) b.push_back(static_cast<int>(i));
    if (a.size() != b.size()) {
      throw ValidationError("pair_branches: " + to_string(t) + " branch counts differ (" +
                            std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    auto by_omega = [](const DispersionSample& s) {
      return [&s](int x, int y) { return s.omega[x] < s.omega[y]; };
    };
    std::stable_sort(a.begin(), a.end(), by_omega(model));
    std::stable_sort(b.begin(), b.end(), by_omega(reference));
    for (std::size_t i = 0; i < a.size(); ++i) out.emplace_back(a[i], b[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct Target {
  double angle;
  double k;
  WaveType type;
  int branch;
  double omega;
  double weight;
};

/// Reference values at the fit wavenumbers; three branches per type.
std::vector<Target> targets(const DynamicFitProblem& pb) {
  std::vector<Target> out;
  for (const auto& set : pb.references) {
    const double km = brillouin_k_max(set.angle, pb.l);
    for (double f : pb.k_fractions) {
      const double k = f * km;
      for (auto t : {WaveType::Pressure, WaveType::Shear}) {
        for (int j = 0; j < 3; ++j) {
          const auto w = set.typed_at(k, t, static_cast<std::size_t>(j));
          if (!w) {
            throw ValidationError("dynamic fit: reference curves lack " + to_string(t) +
                                  " branch " + std::to_string(j) + " at k = " +
                                  std::to_string(k));
          }
          out.push_back({set.angle, k, t, j, *w, j == 0 ? pb.acoustic_weight : pb.optic_weight});
        }
      }
    }
  }
  return out;
}

RmmStaticParams model_statics(const DynamicFitProblem& pb) {
  RmmStaticParams s = pb.statics;
  if (!pb.curvature) s.mu_lc2 = 0.0;
  return s;
}

RmmDynamicParams model_dynamics(const DynamicFitProblem& pb, RmmDynamicParams d) {
  if (!pb.curvature) d.curv_inertia = 0.0;
  return d;
}

/// Model ω at every target; empty when the parameters are infeasible.
std::vector<double> model_values(const DynamicFitProblem& pb, const std::vector<Target>& tg,
                                 const RmmDynamicParams& d0) {
  const RmmStaticParams s = model_statics(pb);
  const RmmDynamicParams d = model_dynamics(pb, d0);
  if (d.lambda_m2 + d.mu_m2 <= 0.0 || d.mu_m2 < 0.0 || d.mu_star_m2 < 0.0 || d.mu_c2 < 0.0 ||
      d.curv_inertia < 0.0) {
    return {};
  }
  std::vector<double> out(tg.size());
  std::size_t i = 0;
  while (i < tg.size()) {
    const double angle = tg[i].angle;
    const double k = tg[i].k;
    BlockEigenvalues be;
    try {
      be = decoupled_eigenvalues(assemble_system(s, d, pb.rho, k, angle), angle);
    } catch (const NumericError&) {
      return {};
    }
    const double top = std::max(be.pressure.maxCoeff(), be.shear.maxCoeff());
    if (std::min(be.pressure.minCoeff(), be.shear.minCoeff()) < -1e-8 * top) return {};
    for (; i < tg.size() && tg[i].angle == angle && tg[i].k == k; ++i) {
      const auto& v = tg[i].type == WaveType::Pressure ? be.pressure : be.shear;
      out[i] = std::sqrt(std::max(v[tg[i].branch], 0.0));
    }
  }
  return out;
}

struct Subproblem {
  std::vector<DynParam> free;
  std::vector<std::size_t> rows;  // target indices in the cost
};

struct LmResult {
  std::vector<double> z;  // free values
  double cost = INFINITY;
  std::vector<double> trace;
};

class Lm {
 public:
  Lm(const DynamicFitProblem& pb, const std::vector<Target>& tg, const Subproblem& sp,
     RmmDynamicParams base, double omega_scale)
      : pb_(pb), tg_(tg), sp_(sp), base_(base), scale_(omega_scale) {}

  RmmDynamicParams params(const std::vector<double>& z) const {
    RmmDynamicParams d = base_;
    for (std::size_t j = 0; j < z.size(); ++j) set(d, sp_.free[j], z[j]);
    return d;
  }

  /// Weighted residuals in units of omega_scale; empty when infeasible.
  Eigen::VectorXd residual(const std::vector<double>& z) const {
    const auto w = model_values(pb_, tg_, params(z));
    if (w.empty()) return {};
    Eigen::VectorXd r(static_cast<Eigen::Index>(sp_.rows.size()));
    for (std::size_t i = 0; i < sp_.rows.size(); ++i) {
      const auto& t = tg_[sp_.rows[i]];
      r[static_cast<Eigen::Index>(i)] = t.weight * (w[sp_.rows[i]] - t.omega) / scale_;
    }
    return r;
  }

  bool admissible(const std::vector<double>& z) const {
    const RmmDynamicParams d = params(z);
    return d.mu_m2 >= 0.0 && d.mu_star_m2 >= 0.0 && d.mu_c2 >= 0.0 && d.curv_inertia >= 0.0 &&
           d.lambda_m2 + d.mu_m2 > 0.0;
  }

  /// Clips to the simple bounds, then backtracks toward `from` for the
  /// combined Λ + M > 0 condition.
  std::vector<double> project(const std::vector<double>& from, std::vector<double> z) const {
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (sp_.free[j] != DynParam::LambdaM2) z[j] = std::max(z[j], 0.0);
    }
    for (int t = 0; t < 60 && !admissible(z); ++t) {
      for (std::size_t j = 0; j < z.size(); ++j) z[j] = 0.5 * (z[j] + from[j]);
    }
    return z;
  }

  Eigen::MatrixXd jacobian(const std::vector<double>& z, const Eigen::VectorXd& r0,
                           const std::vector<double>& typical) const {
    Eigen::MatrixXd j(r0.size(), static_cast<Eigen::Index>(z.size()));
    for (std::size_t c = 0; c < z.size(); ++c) {
      const double h = 1e-6 * std::max(std::abs(z[c]), typical[c]);
      auto zp = z;
      auto zm = z;
      zp[c] += h;
      zm[c] -= h;
      Eigen::VectorXd rp = admissible(zp) ? residual(zp) : Eigen::VectorXd();
      Eigen::VectorXd rm = admissible(zm) ? residual(zm) : Eigen::VectorXd();
      if (rp.size() && rm.size()) {
        j.col(static_cast<Eigen::Index>(c)) = (rp - rm) / (2.0 * h);
      } else if (rp.size()) {
        j.col(static_cast<Eigen::Index>(c)) = (rp - r0) / h;
      } else if (rm.size()) {
        j.col(static_cast<Eigen::Index>(c)) = (r0 - rm) / h;
      } else {
        j.col(static_cast<Eigen::Index>(c)).setZero();
      }
    }
    return j;
  }

  LmResult run(std::vector<double> z, const std::vector<double>& typical, int max_it) const {
    LmResult out;
    Eigen::VectorXd r = residual(z);
    if (!r.size()) return out;
    double cost = r.squaredNorm();
    out.trace.push_back(cost);
    double mu = 1e-3;
    int stalls = 0;
    for (int it = 0; it < max_it && cost > 0.0; ++it) {
      const Eigen::MatrixXd jm = jacobian(z, r, typical);
      // Columns scaled to typical magnitudes.
      Eigen::VectorXd s(static_cast<Eigen::Index>(z.size()));
      for (std::size_t c = 0; c < z.size(); ++c) s[static_cast<Eigen::Index>(c)] = std::max(std::abs(z[c]), typical[c]);
      const Eigen::MatrixXd js = jm * s.asDiagonal();
      const Eigen::MatrixXd a = js.transpose() * js;
      const Eigen::VectorXd g = js.transpose() * r;
      bool accepted = false;
      for (int tries = 0; tries < 30; ++tries) {
        Eigen::MatrixXd damped = a;
        damped.diagonal() += mu * (a.diagonal().array() + 1e-12 * a.diagonal().maxCoeff()).matrix();
        const Eigen::VectorXd step = -damped.ldlt().solve(g).cwiseProduct(s);
        std::vector<double> zn(z.size());
        for (std::size_t c = 0; c < z.size(); ++c) zn[c] = z[c] + step[static_cast<Eigen::Index>(c)];
        zn = project(z, zn);
        const Eigen::VectorXd rn = admissible(zn) ? residual(zn) : Eigen::VectorXd();
        if (rn.size() && rn.squaredNorm() < cost) {
          const double rel = (cost - rn.squaredNorm()) / cost;
          z = zn;
          r = rn;
          cost = rn.squaredNorm();
          out.trace.push_back(cost);
          mu = std::max(mu / 3.0, 1e-12);
          accepted = true;
          stalls = rel < 1e-12 ? stalls + 1 : 0;
          break;
        }
        mu *= 4.0;
      }
      if (!accepted || stalls >= 3) break;
    }
    out.z = z;
    out.cost = cost;
    return out;
  }

 private:
  const DynamicFitProblem& pb_;
  const std::vector<Target>& tg_;
  const Subproblem& sp_;
  RmmDynamicParams base_;
  double scale_;
};

DynamicFitReport run_fit(const DynamicFitProblem& pb, int directions) {
  if (!(pb.rho > 0.0) || !(pb.l > 0.0)) throw ValidationError("dynamic fit: rho and l must be > 0");
  if (!(pb.start.mu_m1 > 0.0 && pb.start.mu_star_m1 > 0.0 && pb.start.mu_c1 > 0.0 &&
        pb.start.lambda_m1 + pb.start.mu_m1 > 0.0)) {
    throw ValidationError("dynamic fit: the m1/c1 inertia block must be identified first");
  }
  if (pb.free.empty()) throw ValidationError("dynamic fit: no free parameter");
  if (pb.starts < 1) throw ValidationError("dynamic fit: need at least one start");
  std::vector<DynParam> free;
  for (auto p : pb.free) {
    if (p == DynParam::CurvInertia && !pb.curvature) continue;
    if (std::find(free.begin(), free.end(), p) == free.end()) free.push_back(p);
  }
  const auto tg = targets(pb);
  double omega_scale = 0.0;
  for (const auto& t : tg) omega_scale = std::max(omega_scale, t.omega);
  if (!(omega_scale > 0.0)) throw ValidationError("dynamic fit: reference frequencies are zero");

  // Without curvature at one angle the pressure and shear costs separate.
  std::vector<Subproblem> subs;
  if (!pb.curvature && directions == 1) {
    for (auto t : {WaveType::Pressure, WaveType::Shear}) {
      Subproblem sp;
      for (auto p : free) {
        const bool pressure_param = p == DynParam::LambdaM2 || p == DynParam::MuM2;
        if (pressure_param == (t == WaveType::Pressure)) sp.free.push_back(p);
      }
      for (std::size_t i = 0; i < tg.size(); ++i)
        if (tg[i].type == t) sp.rows.push_back(i);
      if (!sp.free.empty()) subs.push_back(std::move(sp));
    }
  } else {
    Subproblem sp;
    sp.free = free;
    for (std::size_t i = 0; i < tg.size(); ++i) sp.rows.push_back(i);
    subs.push_back(std::move(sp));
  }

  DynamicFitReport rep;
  rep.curvature = pb.curvature;
  rep.directions = directions;
  rep.free = free;
  RmmDynamicParams best = model_dynamics(pb, pb.start);
  const double ref_inertia = std::max({pb.start.mu_m1, pb.start.mu_star_m1, pb.start.mu_c1});

  std::vector<std::pair<double, std::vector<double>>> all_minima;
  for (const auto& sp : subs) {
    const Lm lm(pb, tg, sp, best, omega_scale);
    std::vector<double> z0, typical;
    for (auto p : sp.free) {
      const double v = get(pb.start, p);
      z0.push_back(v);
      const double fallback = p == DynParam::CurvInertia ? ref_inertia * pb.l * pb.l : ref_inertia;
      typical.push_back(std::abs(v) > 0.0 ? std::abs(v) : 1e-3 * fallback);
    }
    std::mt19937_64 rng(pb.seed);
    std::normal_distribution<double> nd(0.0, 0.5);
    std::vector<std::vector<double>> starts{z0};
    for (int s = 1; s < pb.starts; ++s) {
      std::vector<double> z = z0;
      for (std::size_t c = 0; c < z.size(); ++c) {
        const double base = std::abs(z[c]) > 0.0 ? z[c] : typical[c];
        z[c] = base * std::exp(nd(rng));
      }
      starts.push_back(lm.project(z0, z));
    }
    std::vector<LmResult> results(starts.size());
    parallel_for(starts.size(), [&](std::size_t s) {
      if (lm.admissible(starts[s])) results[s] = lm.run(starts[s], typical, pb.max_iterations);
    });
    std::size_t ib = results.size();
    for (std::size_t s = 0; s < results.size(); ++s) {
      if (!std::isfinite(results[s].cost)) continue;
      if (ib == results.size() || results[s].cost < results[ib].cost) ib = s;
    }
    if (ib == results.size()) throw NumericError("dynamic fit: every start was infeasible");
    for (const auto& r : results) {
      if (std::isfinite(r.cost)) all_minima.emplace_back(r.cost * omega_scale * omega_scale, r.z);
    }
    best = lm.params(results[ib].z);
    for (double c : results[ib].trace) rep.cost_trace.push_back(c * omega_scale * omega_scale);

    // Flat directions of the scaled Jacobian at the optimum.
    const Eigen::VectorXd r = lm.residual(results[ib].z);
    if (r.size()) {
      const Eigen::MatrixXd jm = lm.jacobian(results[ib].z, r, typical);
      Eigen::VectorXd s(static_cast<Eigen::Index>(sp.free.size()));
      for (std::size_t c = 0; c < sp.free.size(); ++c)
        s[static_cast<Eigen::Index>(c)] = std::max(std::abs(results[ib].z[c]), typical[c]);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(jm * s.asDiagonal(), Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(sp.free.size()); ++c) {
        const double v = c < sv.size() ? sv[c] : 0.0;
        if (sv.size() && v <= 1e-6 * sv[0]) {
          std::vector<double> dir(free.size(), 0.0);
          for (std::size_t q = 0; q < sp.free.size(); ++q) {
            const auto pos = std::find(free.begin(), free.end(), sp.free[q]) - free.begin();
            dir[static_cast<std::size_t>(pos)] = svd.matrixV()(static_cast<Eigen::Index>(q), c);
          }
          rep.unidentifiable.push_back(dir);
        }
      }
    }
  }
  std::stable_sort(all_minima.begin(), all_minima.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  rep.minima = std::move(all_minima);
  rep.fitted = model_dynamics(pb, best);

  const auto w = model_values(pb, tg, rep.fitted);
  rep.cost = 0.0;
  for (std::size_t i = 0; i < tg.size(); ++i) {
    const double m = w.empty() ? NAN : w[i];
    rep.residuals.push_back({tg[i].angle, tg[i].k, tg[i].type, tg[i].branch, m, tg[i].omega,
                             tg[i].weight});
    const double c = std::pow(tg[i].weight * (m - tg[i].omega), 2);
    rep.cost += c;
    auto it = std::find_if(rep.cost_by_angle.begin(), rep.cost_by_angle.end(),
                           [&](const auto& p) { return p.first == tg[i].angle; });
    if (it == rep.cost_by_angle.end()) {
      rep.cost_by_angle.emplace_back(tg[i].angle, c);
    } else {
      it->second += c;
    }
  }
  if (!rep.unidentifiable.empty()) {
    rep.notes.push_back("cost is flat along the listed directions; only combinations are identified");
  }
  if (!pb.curvature) rep.notes.push_back("curvature off: mu_lc2 and curv_inertia set to 0");
  return rep;
}

}  // namespace

double dynamic_cost(const DynamicFitProblem& pb, const RmmDynamicParams& params) {
  const auto tg = targets(pb);
  const auto w = model_values(pb, tg, params);
  if (w.empty()) return INFINITY;
  double c = 0.0;
  for (std::size_t i = 0; i < tg.size(); ++i) c += std::pow(tg[i].weight * (w[i] - tg[i].omega), 2);
  return c;
}

DynamicFitReport fit_one_direction(const DynamicFitProblem& pb) {
  if (pb.references.size() != 1) throw ValidationError("fit_one_direction: need one curve set");
  return run_fit(pb, 1);
}

DynamicFitReport fit_two_directions(const DynamicFitProblem& pb) {
  if (pb.references.size() != 2) throw ValidationError("fit_two_directions: need two curve sets");
  return run_fit(pb, 2);
}

std::string to_json(const DynamicFitReport& r) {
  nlohmann::ordered_json j;
  j["curvature"] = r.curvature;
  j["directions"] = r.directions;
  nlohmann::ordered_json f;
  f["lambda_m1"] = r.fitted.lambda_m1;
  f["mu_m1"] = r.fitted.mu_m1;
  f["mu_star_m1"] = r.fitted.mu_star_m1;
  f["mu_c1"] = r.fitted.mu_c1;
  f["lambda_m2"] = r.fitted.lambda_m2;
  f["mu_m2"] = r.fitted.mu_m2;
  f["mu_star_m2"] = r.fitted.mu_star_m2;
  f["mu_c2"] = r.fitted.mu_c2;
  f["curv_inertia"] = r.fitted.curv_inertia;
  j["parameters_si"] = f;
  std::vector<std::string> names;
  for (auto p : r.free) names.push_back(to_string(p));
  j["free"] = names;
  j["cost"] = r.cost;
  nlohmann::ordered_json by = nlohmann::ordered_json::array();
  for (const auto& [a, c] : r.cost_by_angle) {
    by.push_back({{"angle_deg", a * 180.0 / std::numbers::pi}, {"cost", c}});
  }
  j["cost_by_angle"] = by;
  j["cost_trace"] = r.cost_trace;
  nlohmann::ordered_json mins = nlohmann::ordered_json::array();
  for (const auto& [c, z] : r.minima) mins.push_back({{"cost", c}, {"free_values", z}});
  j["minima"] = mins;
  j["unidentifiable_directions"] = r.unidentifiable;
  j["notes"] = r.notes;
  return j.dump(2);
}

void write_overlay_csv(std::ostream& os, const DynamicFitReport& r) {
  os << "angle_deg,k,type,branch,model_omega,reference_omega,weight\n" << std::setprecision(15);
  for (const auto& b : r.residuals) {
    os << b.angle * 180.0 / std::numbers::pi << ',' << b.k << ',' << to_string(b.type) << ','
       << b.branch << ',' << b.model << ',' << b.reference << ',' << b.weight << '\n';
  }
}

}  // namespace rmm
