// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset. Exit status is non-zero when a gating criterion
// fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rmm/bloch.hpp"
#include "rmm/dispersion_curves.hpp"
#include "rmm/dynamic_fit.hpp"
#include "rmm/geometry.hpp"
#include "rmm/homogenization.hpp"
#include "rmm/mesh.hpp"
#include "rmm/rmm_dispersion.hpp"
#include "rmm/rmm_solver.hpp"
#include "rmm/static_fit.hpp"
#include "rmm/surrogate.hpp"
#include "rmm/tensors.hpp"

using namespace rmm;

namespace {

constexpr double kGPa = 1e9;
constexpr double kL = 1e-3;
// Apparent density of the reference cell (aluminium × solid fraction 0.55).
constexpr double kRho = 2700.0 * 0.55;

const TetragonalElasticity kMacro{5.9 * kGPa, 0.627 * kGPa, 1.748 * kGPa};
const TetragonalElasticity kMicroSS2{11.41 * kGPa, 7.5 * kGPa, 356.2 * kGPa};

RmmStaticParams ss2() {
  return RmmStaticParams::from_micro(kMicroSS2, kMacro, 0.1 * kGPa, 1089.6);
}

RmmDynamicParams table2() {
  RmmDynamicParams d;
  d.mu_c1 = 4.567e-6;
  d.mu_star_m1 = 1.3e-3;
  d.mu_m1 = 1.287e-4;
  d.lambda_m1 = 1.0443e-4 - 1.287e-4;
  return d;
}

// m2/c2 block and curvature inertia of the one-direction fit with curvature.
RmmDynamicParams planted_dynamics() {
  RmmDynamicParams d = table2();
  d.mu_m2 = 2.71e-5;
  d.lambda_m2 = 2.71e-5;
  d.mu_c2 = 2.036e-5;
  d.mu_star_m2 = 2.036e-5;
  d.curv_inertia = 1.545e-10;
  return d;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ce = e_from_micro_macro(kMicroSS2, kMacro);
  const auto back = macro_from_micro_e(kMicroSS2, ce);
  const double err = relative_difference(back, kMacro);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {err < 1e-10 && dt < 1e-3,
          "relative error " + fmt("%.3e", err) + ", C_e = (" + fmt("%.6g", ce.lambda / kGPa) +
              ", " + fmt("%.6g", ce.mu / kGPa) + ", " + fmt("%.6g", ce.mu_star / kGPa) +
              ") GPa, " + fmt("%.1f", dt * 1e6) + " us"};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = ss2();
  const auto truth = table2();
  const Cutoffs c = cutoffs(s, truth, kRho);
  const auto back = identify_j1(s, kRho, c);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double err = 0.0;
  err = std::max(err, rel(back.mu_c1, truth.mu_c1));
  err = std::max(err, rel(back.mu_star_m1, truth.mu_star_m1));
  err = std::max(err, rel(back.mu_m1, truth.mu_m1));
  err = std::max(err, rel(back.lambda_m1 + back.mu_m1, truth.lambda_m1 + truth.mu_m1));
  std::ostringstream os;
  os << "inertia error " << fmt("%.3e", err) << "; forward cut-offs (rad/s) "
     << fmt("%.5e", c.shear1) << " " << fmt("%.5e", c.shear2) << " "
     << fmt("%.5e", c.pressure1) << " " << fmt("%.5e", c.pressure2) << ", "
     << fmt("%.1f", dt * 1e6) << " us";
  // The listed forward values are reported; they agree to four digits.
  const double fwd = std::max({rel(c.shear1, 4.679e6), rel(c.shear2, 1.659e7),
                               rel(c.pressure1, 7.974e6), rel(c.pressure2, 1.663e7)});
  os << ", max deviation from listed values " << fmt("%.2e", fwd);
  return {err < 1e-10 && dt < 1e-3, os.str()};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = ss2();
  const auto d = planted_dynamics();
  double worst = 0.0;
  for (double angle : {0.0, std::numbers::pi / 4}) {
    for (double k : k_grid(angle, kL, 20)) {
      const auto sys = assemble_system(s, d, kRho, k, angle);
      const Eigen::VectorXd full = generalized_eigenvalues(sys.k, sys.m);
      const auto blocks = decoupled_eigenvalues(sys, angle);
      std::vector<double> u(blocks.pressure.data(), blocks.pressure.data() + 3);
      u.insert(u.end(), blocks.shear.data(), blocks.shear.data() + 3);
      std::sort(u.begin(), u.end());
      const double scale = full.cwiseAbs().maxCoeff();
      for (int i = 0; i < 6; ++i) {
        // Relative per eigenvalue; the double-zero pair at k = 0 is judged
        // against the largest eigenvalue.
        const double denom = std::max(std::abs(full[i]), 1e-6 * scale);
        worst = std::max(worst, std::abs(u[i] - full[i]) / denom);
      }
    }
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-9 && dt < 1.0,
          "max relative mismatch " + fmt("%.3e", worst) + ", " + fmt("%.3f", dt) + " s"};
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = ss2();
  const auto d = planted_dynamics();
  const auto set = branches(s, d, kRho, 0.0, {0.0, 1.0});
  const auto p = set.typed(1, WaveType::Pressure);
  const auto sh = set.typed(1, WaveType::Shear);
  const auto p0 = set.typed(0, WaveType::Pressure);
  const auto s0 = set.typed(0, WaveType::Shear);
  const double cp = std::sqrt((kMacro.lambda + 2 * kMacro.mu) / kRho);
  const double cs = std::sqrt(kMacro.mu_star / kRho);
  const double slope_p = (p[0] - p0[0]) / 1.0;
  const double slope_s = (sh[0] - s0[0]) / 1.0;
  const double e = std::max(rel(slope_p, cp), rel(slope_s, cs));
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {e < 1e-5 && dt < 1.0, "slopes " + fmt("%.6f", slope_p) + " / " +
                                    fmt("%.6f", slope_s) + " m/s vs " + fmt("%.6f", cp) +
                                    " / " + fmt("%.6f", cs) + ", max rel " + fmt("%.2e", e)};
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mesh = build_mesh(UnitCellGeometry::all_solid(kL), 1, 20);
  const double scale = kMacro.mu * kL * kL;
  RmmProblem plain(mesh, {2, false});
  RmmProblem consistent(mesh, {2, true});
  double soft_err = 0.0, stiff_err = 0.0;
  bool bounded = true;
  for (auto mode : {LoadMode::Volumetric, LoadMode::Deviatoric, LoadMode::Shear}) {
    const auto load = AffineLoadCase::of(mode, 0.01);
    const double e_macro = solve_elasticity(mesh, {kMacro}, load).energy;
    const double e_micro = solve_elasticity(mesh, {kMicroSS2}, load).energy;
    auto params = [&](double f) {
      return RmmStaticParams::from_micro(kMicroSS2, kMacro, 0.1 * kGPa, f * scale);
    };
    soft_err = std::max(soft_err, rel(plain.solve(params(1e-12), load).energy, e_macro));
    stiff_err = std::max(stiff_err, rel(consistent.solve(params(1e6), load).energy, e_micro));
    for (double f : {1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
      const double e = consistent.solve(params(f), load).energy;
      bounded = bounded && e_macro <= e * (1 + 1e-12) && e <= e_micro * (1 + 1e-12);
    }
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {soft_err < 0.01 && stiff_err < 0.01 && bounded && dt < 60.0,
          "soft limit " + fmt("%.2e", soft_err) + ", stiff limit " + fmt("%.2e", stiff_err) +
              ", bounds " + (bounded ? "hold" : "VIOLATED") + ", " + fmt("%.1f", dt) + " s"};
}

StaticUnknowns planted_static() { return {2.0 * kGPa, 5.0 * kGPa, 8.0 * kGPa, 0.1 * kGPa, 627.0}; }

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto loads = AffineLoadCase::standard_set(0.01);
  FemEnergyModel model(kL, {1, 2, 3}, loads, 20, kMacro);
  const StaticUnknowns truth = planted_static();
  StaticFitProblem pb;
  pb.targets = model.evaluate(truth, nullptr);
  pb.c_macro = kMacro;
  pb.start = StaticUnknowns::from(1.5 * truth.vec());
  const FitReport r = fit_static(pb, model);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Vector5d a = r.result.vec(), b = truth.vec();
  double worst = 0.0;
  for (int i : {0, 1, 2, 4}) worst = std::max(worst, rel(a[i], b[i]));
  std::ostringstream os;
  os << "max parameter error " << fmt("%.2e", worst) << " (mu_c " << fmt("%.2e", rel(a[3], b[3]))
     << "), r2 " << fmt("%.3e", r.r2) << " J^2, relative " << fmt("%.3e", r.r2_relative) << ", "
     << r.history.size() << " iterations (" << r.stop_reason << "), " << fmt("%.1f", dt) << " s";
  return {worst < 0.02 && r.r2_relative < 1e-8 && dt < 1200.0, os.str()};
}

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mesh = build_mesh(UnitCellGeometry::all_solid(kL), 1, 8);
  RmmProblem problem(mesh);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto loads = AffineLoadCase::standard_set(0.01);
  double worst = 0.0;
  for (int p = 0; p < 10; ++p) {
    StaticUnknowns x{kMacro.mu * (1.5 + 10 * u(rng)), kMacro.mu_star * (1.5 + 10 * u(rng)),
                     kMacro.lambda * (1.2 + 2 * u(rng)), kMacro.mu * u(rng),
                     kMacro.mu * kL * kL * (0.05 + 2 * u(rng))};
    const auto& load = loads[p % 3];
    const Vector5d an = energy_sensitivities(problem, x, kMacro, load);
    Vector5d xv = x.vec();
    const double e0 = problem.solve(x.params(kMacro), load).energy;
    for (int i = 0; i < 5; ++i) {
      const double h = 1e-4 * xv[i];
      Vector5d xp = xv, xm = xv;
      xp[i] += h;
      xm[i] -= h;
      const double ep = problem.solve(StaticUnknowns::from(xp).params(kMacro), load).energy;
      const double em = problem.solve(StaticUnknowns::from(xm).params(kMacro), load).energy;
      const double fd = (ep - em) / (2 * h);
      // Components that are zero by symmetry are judged against Π/x_i.
      const double denom = std::max({std::abs(an[i]), std::abs(fd), 1e-6 * e0 / xv[i]});
      worst = std::max(worst, std::abs(fd - an[i]) / denom);
    }
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-4 && dt < 300.0,
          "max relative deviation " + fmt("%.2e", worst) + ", " + fmt("%.1f", dt) + " s"};
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto base = aluminium();
  const double cs = std::sqrt(base.mu / base.rho);
  const double cp = std::sqrt((base.lambda + 2 * base.mu) / base.rho);
  const double kmax = std::numbers::pi / (2 * kL);
  std::vector<double> ks;
  for (int i = 1; i <= 4; ++i) ks.push_back(kmax * i / 4.0);
  const auto set = bloch_bands(UnitCellGeometry::all_solid(kL), base, 0.0, ks, 4, 20);
  double worst = 0.0;
  for (std::size_t s = 0; s < set.samples.size(); ++s) {
    const double k = set.samples[s].k;
    worst = std::max(worst, rel(set.typed(s, WaveType::Shear).at(0), cs * k));
    worst = std::max(worst, rel(set.typed(s, WaveType::Pressure).at(0), cp * k));
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 0.01 && dt < 120.0, "c = " + fmt("%.1f", cs) + " / " + fmt("%.1f", cp) +
                                           " m/s, max relative deviation " + fmt("%.2e", worst) +
                                           ", " + fmt("%.1f", dt) + " s"};
}

// One planted round trip of the dynamic fit.
struct DynCase {
  bool curvature;
  int directions;
  std::vector<DynParam> free;
};

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto statics = ss2();
  const std::vector<DynCase> cases{
      {false, 1, {DynParam::MuM2, DynParam::MuC2}},
      {true, 1, {DynParam::MuM2, DynParam::MuC2, DynParam::CurvInertia}},
      {false, 2, {DynParam::MuM2, DynParam::MuStarM2, DynParam::MuC2}},
      {true, 2, {DynParam::MuM2, DynParam::MuStarM2, DynParam::MuC2, DynParam::CurvInertia}},
  };
  bool pass = true;
  std::ostringstream os;
  for (const auto& c : cases) {
    RmmDynamicParams truth = planted_dynamics();
    RmmStaticParams model_statics = statics;
    if (!c.curvature) {
      truth.curv_inertia = 0.0;
      model_statics.mu_lc2 = 0.0;
    }
    DynamicFitProblem pb;
    pb.statics = statics;
    pb.rho = kRho;
    pb.l = kL;
    pb.curvature = c.curvature;
    pb.free = c.free;
    std::vector<double> angles{0.0};
    if (c.directions == 2) angles.push_back(std::numbers::pi / 4);
    for (double a : angles) {
      std::vector<double> ks;
      for (double f : pb.k_fractions) ks.push_back(f * brillouin_k_max(a, kL));
      pb.references.push_back(branches(model_statics, truth, kRho, a, ks));
    }
    pb.start = truth;
    for (auto p : c.free) set(pb.start, p, 2.0 * get(truth, p));
    const auto r = c.directions == 1 ? fit_one_direction(pb) : fit_two_directions(pb);
    double worst = 0.0;
    for (auto p : c.free) worst = std::max(worst, rel(get(r.fitted, p), get(truth, p)));
    pass = pass && worst < 0.01;
    os << (c.curvature ? "curl" : "rrmm") << "/" << c.directions << "dir "
       << fmt("%.1e", worst) << "; ";
  }
  // Full free set in two directions: the cost is flat along one direction,
  // which the report must flag.
  {
    RmmDynamicParams truth = planted_dynamics();
    DynamicFitProblem pb;
    pb.statics = statics;
    pb.rho = kRho;
    pb.l = kL;
    for (double a : {0.0, std::numbers::pi / 4}) {
      std::vector<double> ks;
      for (double f : pb.k_fractions) ks.push_back(f * brillouin_k_max(a, kL));
      pb.references.push_back(branches(statics, truth, kRho, a, ks));
    }
    pb.start = truth;
    for (auto p : pb.free) set(pb.start, p, 2.0 * get(truth, p));
    const auto r = fit_two_directions(pb);
    const bool flagged = !r.unidentifiable.empty();
    // Identifiable combinations seen by the two directions.
    const auto g = [](const RmmDynamicParams& d) {
      return std::array<double, 4>{d.lambda_m2 + 2 * d.mu_m2, d.mu_star_m2 + d.mu_c2,
                                   d.lambda_m2 + d.mu_m2 + d.mu_star_m2, d.mu_m2 + d.mu_c2};
    };
    const auto gf = g(r.fitted), gt = g(truth);
    double worst = rel(r.fitted.curv_inertia, truth.curv_inertia);
    for (int i = 0; i < 4; ++i) worst = std::max(worst, rel(gf[i], gt[i]));
    pass = pass && flagged && worst < 0.01;
    os << "full set: combinations " << fmt("%.1e", worst) << ", null direction "
       << (flagged ? "flagged" : "NOT flagged") << "; ";
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  os << fmt("%.1f", dt) << " s";
  return {pass && dt < 600.0, os.str()};
}

Outcome criterion10() {
  const auto t0 = std::chrono::steady_clock::now();
  SurrogateSpec spec;
  spec.l = kL;
  spec.c_macro = kMacro;
  spec.ranges = ParameterRanges::standard(kMacro, aluminium().elasticity(), kL);
  spec.counts = {8, 8, 8, 8, 8};
  spec.resolution = 4;
  spec.n_list = {1, 2};
  const auto data = generate_dataset(spec);
  const std::size_t points = data.rows.size() / data.case_count();
  const double t_data =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  TrainOptions opt;
  const auto trained = train(data, opt);
  auto model = trained.model;

  // Interior planted point: the lowest grid layer sits on the admissibility
  // bound and is skipped, so points near it are extrapolation.
  const StaticUnknowns truth{7.5 * kGPa, 60.0 * kGPa, 11.41 * kGPa, 0.1 * kGPa, 1089.6};
  FemEnergyModel fem(kL, spec.n_list, AffineLoadCase::standard_set(spec.amplitude),
                     spec.resolution, kMacro);
  const Eigen::VectorXd targets = fem.evaluate(truth, nullptr);
  const auto start = predict_start(model, targets, kMacro, 100, spec.ranges, 5);
  // All five components are graded. mu_c is the weak one (scaled energy
  // sensitivity ~2e-3 of the leading one), so the count without it is
  // reported as well.
  auto error = [&](const Vector5d& a, bool with_mu_c) {
    double w = 0.0;
    for (int i = 0; i < 5; ++i) {
      if (i != 3 || with_mu_c) w = std::max(w, rel(a[i], truth.vec()[i]));
    }
    return w;
  };
  int landed = 0, landed4 = 0;
  double closest = INFINITY;
  for (const auto& [r2, x] : start.ranked) {
    const double e = error(x, true);
    closest = std::min(closest, e);
    landed += e < 0.10;
    landed4 += error(x, false) < 0.10;
  }
  const double best = error(start.best.vec(), true);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream os;
  os << points << " parameter points (" << data.rows.size() << " energies, "
     << fmt("%.0f", t_data) << " s), min validation R2 " << fmt("%.5f", trained.min_validation_r2)
     << ", " << landed << "/" << start.ranked.size() << " starts within 10% ("
     << landed4 << " without mu_c; closest " << fmt("%.2e", closest) << ", lowest-cost "
     << fmt("%.2e", best) << "), " << fmt("%.0f", dt) << " s";
  return {points >= 10000 && trained.min_validation_r2 >= 0.99 && landed >= 1 && dt < 1800.0,
          os.str()};
}

// Informational comparison with the reference cell numbers.
Outcome criterion11() {
  const auto geo = UnitCellGeometry::cross_void(kL, 0.9 * kL, 0.3 * kL);
  const auto id = homogenize_periodic(geo, aluminium(), 40);
  const auto& c = id.c_macro;
  std::ostringstream os;
  os << "C_macro (" << fmt("%.4g", c.lambda / kGPa) << ", " << fmt("%.4g", c.mu / kGPa) << ", "
     << fmt("%.4g", c.mu_star / kGPa) << ") GPa vs (5.9, 0.627, 1.748); deviations "
     << fmt("%.1f%%", 100 * rel(c.lambda, kMacro.lambda)) << " "
     << fmt("%.1f%%", 100 * rel(c.mu, kMacro.mu)) << " "
     << fmt("%.1f%%", 100 * rel(c.mu_star, kMacro.mu_star)) << "; apparent density "
     << fmt("%.1f", id.apparent_rho) << " kg/m^3";
  return {true, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> all{
      criterion1, criterion2, criterion3, criterion4, criterion5, criterion6,
      criterion7, criterion8, criterion9, criterion10, criterion11};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    try {
      o = all[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool gating = id != 11;
    const char* tag = o.pass ? (gating ? "PASS" : "PASS (informational)") : "FAIL";
    std::cout << "criterion " << id << ": " << tag << "  " << o.detail << std::endl;
    if (gating && !o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
