#include "rmmcli/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rmm/bloch.hpp"
#include "rmm/dynamic_fit.hpp"
#include "rmm/error.hpp"
#include "rmm/homogenization.hpp"
#include "rmm/rmm_dispersion.hpp"
#include "rmm/static_fit.hpp"
#include "rmm/surrogate.hpp"

namespace rmmcli {

using ojson = nlohmann::ordered_json;

namespace {

constexpr double kAngleMatch = 1e-9;

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

ojson tensor_json(const rmm::TetragonalElasticity& t) {
  return {{"lambda", t.lambda}, {"mu", t.mu}, {"mu_star", t.mu_star}};
}

ojson statics_json(const rmm::StaticUnknowns& s) {
  return {{"mu_micro", s.mu_micro},   {"mu_star_micro", s.mu_star_micro},
          {"lambda_micro", s.lambda_micro}, {"mu_c", s.mu_c},
          {"mu_lc2", s.mu_lc2}};
}

ojson cutoffs_json(const rmm::Cutoffs& c) {
  return {{"shear1", c.shear1}, {"shear2", c.shear2}, {"pressure1", c.pressure1},
          {"pressure2", c.pressure2}};
}

const rmm::DispersionCurveSet* find_angle(const std::vector<rmm::DispersionCurveSet>& sets,
                                          double angle) {
  for (const auto& s : sets) {
    if (std::abs(s.angle - angle) < kAngleMatch) return &s;
  }
  return nullptr;
}

/// Pipeline state shared between stages.
struct State {
  const RunConfig& cfg;
  std::ostream& log;
  std::vector<std::string> outputs;
  std::optional<rmm::TetragonalElasticity> c_macro;
  std::optional<double> rho;
  std::optional<rmm::StaticUnknowns> statics;
  std::optional<rmm::RmmDynamicParams> dynamics;
  std::vector<rmm::DispersionCurveSet> bloch;
  std::optional<rmm::SurrogateModel> surrogate;
  std::optional<rmm::ParameterRanges> ranges;

  void write(const std::string& name, const std::string& text) {
    std::ofstream os(cfg.output_dir / name, std::ios::binary);
    if (!os) throw rmm::ValidationError("cannot write " + (cfg.output_dir / name).string());
    os << text;
    outputs.push_back(name);
  }
  template <class Fn>
  void write_with(const std::string& name, Fn&& fn) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    fn(os);
    write(name, os.str());
  }
};

std::vector<rmm::AffineLoadCase> loads(double amplitude) {
  return rmm::AffineLoadCase::standard_set(amplitude);
}

Eigen::VectorXd reference_targets(State& st, const std::vector<int>& n_list, double amplitude,
                                  int resolution, std::vector<std::string>* labels) {
  const auto table = rmm::reference_energies(st.cfg.geometry, st.cfg.material, n_list,
                                             loads(amplitude), resolution, st.c_macro);
  Eigen::VectorXd t(static_cast<Eigen::Index>(table.size()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    t[static_cast<Eigen::Index>(i)] = table[i].energy;
    if (labels) labels->push_back(rmm::to_string(table[i].mode) + ",n=" + std::to_string(table[i].n));
  }
  if (labels) {
    st.write_with("reference_energies.csv", [&](std::ostream& os) { rmm::write_energy_csv(os, table); });
  }
  return t;
}

void stage_homogenize(State& st) {
  const auto& c = st.cfg;
  const auto mi = rmm::homogenize_periodic(c.geometry, c.material, c.homogenize.resolution);
  st.c_macro = mi.c_macro;
  st.rho = mi.apparent_rho;
  ojson j;
  j["geometry"] = c.geometry.name;
  j["resolution"] = c.homogenize.resolution;
  j["c_macro"] = tensor_json(mi.c_macro);
  ojson v = ojson::array();
  for (int r = 0; r < 3; ++r) v.push_back({mi.voigt(r, 0), mi.voigt(r, 1), mi.voigt(r, 2)});
  j["voigt"] = v;
  j["solid_fraction"] = mi.solid_fraction;
  j["apparent_rho"] = mi.apparent_rho;
  st.write("homogenize.json", j.dump(2) + "\n");
  st.log << "homogenize: lambda " << mi.c_macro.lambda << " Pa, mu " << mi.c_macro.mu
         << " Pa, mu* " << mi.c_macro.mu_star << " Pa\n";
}

void stage_bloch(State& st) {
  const auto& c = st.cfg;
  st.bloch.clear();
  for (double a : c.bloch.angles) {
    st.bloch.push_back(rmm::bloch_bands(c.geometry, c.material, a,
                                        rmm::k_grid(a, c.geometry.l, c.bloch.k_count),
                                        c.bloch.branches, c.bloch.resolution));
  }
  st.write_with("bloch_curves.csv", [&](std::ostream& os) { rmm::write_curves_csv(os, st.bloch); });
  ojson j;
  ojson gaps = ojson::array();
  for (const auto& [lo, hi] : rmm::band_gap(st.bloch)) gaps.push_back({lo, hi});
  j["band_gaps"] = gaps;
  if (const auto* at0 = find_angle(st.bloch, 0.0)) {
    const auto ex = rmm::extract_cutoffs(*at0, find_angle(st.bloch, std::numbers::pi / 4));
    ojson e;
    e["cutoffs"] = ex.cutoffs ? cutoffs_json(*ex.cutoffs) : ojson(nullptr);
    e["candidates"] = ex.candidates;
    e["angle_mismatch"] = ex.angle_mismatch;
    e["note"] = ex.note;
    j["cutoff_extraction"] = e;
  }
  st.write("bloch.json", j.dump(2) + "\n");
  st.log << "bloch: " << st.bloch.size() << " angle(s)\n";
}

void stage_train_surrogate(State& st) {
  const auto& c = st.cfg;
  const auto& o = c.surrogate;
  rmm::SurrogateSpec spec;
  spec.l = c.geometry.l;
  spec.c_macro = *st.c_macro;
  spec.ranges = rmm::ParameterRanges::standard(*st.c_macro, c.material.elasticity(), c.geometry.l);
  spec.counts = o.counts;
  spec.resolution = o.resolution;
  spec.n_list = o.n_list;
  spec.amplitude = o.amplitude;
  const auto data = rmm::generate_dataset(spec);
  rmm::TrainOptions t;
  t.hidden = o.hidden;
  t.adam.epochs = o.epochs;
  t.adam.batch_size = o.batch_size;
  t.adam.learning_rate = o.learning_rate;
  t.adam.seed = o.seed;
  t.split_seed = o.split_seed;
  const auto res = rmm::train(data, t);
  std::ostringstream notes;
  notes << "Adam on mean squared error of the standardised log energy; epochs " << o.epochs
        << ", batch " << o.batch_size << ", learning rate " << o.learning_rate
        << " with cosine decay to " << t.adam.final_lr_fraction << "; seed " << o.seed
        << ", split seed " << o.split_seed << ", validation fraction " << t.validation_fraction;
  st.write_with("surrogate_model.json", [&](std::ostream& os) { res.model.save(os, notes.str()); });
  ojson j;
  j["rows"] = data.rows.size();
  j["skipped_points"] = data.skipped.size();
  j["min_validation_r2"] = res.min_validation_r2;
  ojson nets = ojson::array();
  for (const auto& n : res.networks) {
    nets.push_back({{"label", n.label},
                    {"validation_r2", n.validation_r2},
                    {"train_r2", n.train_r2},
                    {"train_rows", n.train_rows},
                    {"validation_rows", n.validation_rows},
                    {"final_loss", n.loss_trace.empty() ? 0.0 : n.loss_trace.back()}});
  }
  j["networks"] = nets;
  st.write("surrogate.json", j.dump(2) + "\n");
  st.surrogate = res.model;
  st.ranges = spec.ranges;
  st.log << "train-surrogate: " << data.rows.size() << " rows, min validation R2 "
         << res.min_validation_r2 << "\n";
}

void stage_fit_static(State& st) {
  const auto& c = st.cfg;
  const auto& o = c.fit_static;
  rmm::StaticFitProblem pb;
  pb.c_macro = *st.c_macro;
  pb.mu_c_pin = o.mu_c_pin;
  pb.max_iterations = o.max_iterations;
  pb.targets = reference_targets(st, o.n_list, o.amplitude, o.resolution, &pb.case_labels);
  if (o.start) {
    pb.start = *o.start;
  } else {
    const auto& s = c.surrogate;
    const Eigen::VectorXd t = reference_targets(st, s.n_list, s.amplitude, o.resolution, nullptr);
    const auto pred = rmm::predict_start(*st.surrogate, t, *st.c_macro, s.starts, *st.ranges,
                                         s.start_seed, o.mu_c_pin);
    pb.start = pred.best;
    ojson j;
    j["best"] = statics_json(pred.best);
    j["best_r2"] = pred.best_r2;
    j["feasible_starts"] = pred.feasible_starts;
    ojson ranked = ojson::array();
    for (const auto& [r2, x] : pred.ranked) {
      ranked.push_back({{"r2", r2}, {"x", statics_json(rmm::StaticUnknowns::from(x))}});
    }
    j["ranked"] = ranked;
    st.write("surrogate_start.json", j.dump(2) + "\n");
  }
  rmm::FemEnergyModel model(c.geometry.l, o.n_list, loads(o.amplitude), o.resolution, *st.c_macro);
  const auto rep = rmm::fit_static(pb, model);
  st.write("fit_static.json", rmm::to_json(rep) + "\n");
  st.write_with("fit_static_iterations.csv", [&](std::ostream& os) { rmm::write_iteration_csv(os, rep); });
  st.statics = rep.result;
  st.log << "fit-static: r2 " << rep.r2 << " (" << rep.stop_reason << ")\n";
}

void stage_fit_dynamic(State& st) {
  const auto& c = st.cfg;
  const auto& o = c.fit_dynamic;
  std::vector<rmm::DispersionCurveSet> refs;
  if (o.curves) {
    std::ifstream is(*o.curves);
    if (!is) throw rmm::ValidationError("config: fit_dynamic.curves: cannot open " + o.curves->string());
    refs = rmm::read_curves_csv(is);
  } else {
    refs = st.bloch;
  }
  const auto* at0 = find_angle(refs, 0.0);
  const auto* at45 = find_angle(refs, std::numbers::pi / 4);
  if (!at0) throw rmm::ValidationError("fit_dynamic: reference curves have no 0 rad set");
  const auto statics = st.statics->params(*st.c_macro);

  rmm::RmmDynamicParams start = *c.dynamics;
  ojson j;
  const auto ex = rmm::extract_cutoffs(*at0, at45);
  if (ex.cutoffs && statics.mu_c > 0.0) {
    rmm::set_j1(start, rmm::identify_j1(statics, *st.rho, *ex.cutoffs));
    j["level1_source"] = "cut-offs of the reference curves";
    j["cutoffs"] = cutoffs_json(*ex.cutoffs);
  } else {
    j["level1_source"] = "dynamics block";
    j["cutoff_note"] = ex.cutoffs ? "mu_c is zero" : ex.note;
    if (start.lambda_m1 == 0.0 && start.mu_m1 == 0.0 && start.mu_star_m1 == 0.0 && start.mu_c1 == 0.0)
      throw rmm::ValidationError(
          "fit_dynamic: no level-1 inertias (" + j["cutoff_note"].get<std::string>() +
          "); set dynamics.lambda_m1, dynamics.mu_m1, dynamics.mu_star_m1 and dynamics.mu_c1");
  }
  ojson fits = ojson::array();
  std::optional<rmm::RmmDynamicParams> chosen;
  int chosen_rank = -1;
  for (int dirs : o.directions) {
    for (bool curv : o.curvature) {
      rmm::DynamicFitProblem pb;
      pb.statics = statics;
      pb.rho = *st.rho;
      pb.l = c.geometry.l;
      pb.start = start;
      pb.curvature = curv;
      pb.acoustic_weight = o.acoustic_weight;
      pb.optic_weight = o.optic_weight;
      pb.k_fractions = o.k_fractions;
      pb.starts = o.starts;
      pb.seed = o.seed;
      if (dirs == 2) {
        if (!at45) throw rmm::ValidationError("fit_dynamic: two-direction fit needs a 45 deg set");
        pb.references = {*at0, *at45};
      } else {
        pb.references = {*at0};
      }
      const auto rep = dirs == 2 ? rmm::fit_two_directions(pb) : rmm::fit_one_direction(pb);
      const std::string tag = std::to_string(dirs) + "dir_" + (curv ? "rmm" : "rrmm");
      st.write_with("overlay_" + tag + ".csv", [&](std::ostream& os) { rmm::write_overlay_csv(os, rep); });
      ojson f = ojson::parse(rmm::to_json(rep));
      f["tag"] = tag;
      fits.push_back(f);
      st.log << "fit-dynamic " << tag << ": cost " << rep.cost << "\n";
      // rmm-disp plots the curvature-on fit with the most directions.
      const int rank = 2 * dirs + (curv ? 4 : 0);
      if (rank > chosen_rank) {
        chosen_rank = rank;
        chosen = rep.fitted;
      }
    }
  }
  j["fits"] = fits;
  st.write("fit_dynamic.json", j.dump(2) + "\n");
  st.dynamics = chosen;
}

void stage_rmm_disp(State& st) {
  const auto& c = st.cfg;
  const auto statics = st.statics->params(*st.c_macro);
  std::vector<rmm::DispersionCurveSet> sets;
  ojson j;
  for (double a : c.rmm_disp.angles) {
    sets.push_back(rmm::branches(statics, *st.dynamics, *st.rho, a,
                                 rmm::k_grid(a, c.geometry.l, c.rmm_disp.k_count)));
  }
  st.write_with("rmm_curves.csv", [&](std::ostream& os) { rmm::write_curves_csv(os, sets); });
  j["cutoffs"] = cutoffs_json(rmm::cutoffs(statics, *st.dynamics, *st.rho));
  ojson gaps = ojson::array();
  for (const auto& [lo, hi] : rmm::band_gap(sets)) gaps.push_back({lo, hi});
  j["band_gaps"] = gaps;
  st.write("rmm_disp.json", j.dump(2) + "\n");
  st.log << "rmm-disp: " << sets.size() << " angle(s)\n";
}

}  // namespace

void run_pipeline(const RunConfig& cfg, std::ostream& log) {
  validate_prerequisites(cfg);
  std::filesystem::create_directories(cfg.output_dir);
  State st{cfg, log, {}, cfg.c_macro, cfg.rho, cfg.statics, cfg.dynamics, {}, {}, {}};

  ojson manifest;
  manifest["tool"] = "rmmid";
  manifest["version"] = kToolVersion;
  manifest["schema_version"] = cfg.schema_version;
  manifest["input_hash"] = hex(fnv1a(cfg.canonical()));
  ojson stages = ojson::array();
  for (Stage s : cfg.stages) stages.push_back(stage_key(s));
  manifest["stages"] = stages;
  manifest["seeds"] = {{"surrogate_init", cfg.surrogate.seed},
                       {"surrogate_split", cfg.surrogate.split_seed},
                       {"surrogate_starts", cfg.surrogate.start_seed},
                       {"fit_dynamic", cfg.fit_dynamic.seed}};

  // Dependency order differs from the toggle order: the fits need the
  // surrogate, and rmm-disp plots the fitted dynamics.
  const std::vector<std::pair<Stage, void (*)(State&)>> plan{
      {Stage::Homogenize, stage_homogenize},   {Stage::Bloch, stage_bloch},
      {Stage::TrainSurrogate, stage_train_surrogate}, {Stage::FitStatic, stage_fit_static},
      {Stage::FitDynamic, stage_fit_dynamic},  {Stage::RmmDisp, stage_rmm_disp}};
  std::string current;
  auto finish = [&](const std::string& status, const std::string& error) {
    manifest["status"] = status;
    if (!error.empty()) {
      manifest["failed_stage"] = current;
      manifest["error"] = error;
    }
    manifest["outputs"] = st.outputs;
    std::ofstream os(cfg.output_dir / "manifest.json", std::ios::binary);
    os << manifest.dump(2) << "\n";
  };
  try {
    for (const auto& [stage, fn] : plan) {
      if (!cfg.enabled(stage)) continue;
      current = stage_key(stage);
      fn(st);
    }
  } catch (const std::exception& e) {
    finish("failed", e.what());
    throw;
  }
  current.clear();
  finish("ok", "");
}

void export_overlay(std::ostream& os, const std::vector<OverlaySource>& sources) {
  bool any = false;
  for (const auto& s : sources) any = any || !s.sets.empty();
  if (!any) throw rmm::ValidationError("export: no curve sets given");
  // Reference grid per angle: the first set met at that angle.
  std::vector<const rmm::DispersionCurveSet*> grids;
  for (const auto& src : sources) {
    for (const auto& set : src.sets) {
      if (std::none_of(grids.begin(), grids.end(), [&](const auto* g) {
            return std::abs(g->angle - set.angle) < kAngleMatch;
          })) {
        grids.push_back(&set);
      }
    }
  }
  os.imbue(std::locale::classic());
  os << std::setprecision(12);
  os << "source,angle,k,branch,type,omega,resampled\n";
  for (const auto& src : sources) {
    for (const auto& set : src.sets) {
      const auto* grid = *std::find_if(grids.begin(), grids.end(), [&](const auto* g) {
        return std::abs(g->angle - set.angle) < kAngleMatch;
      });
      bool same = grid->samples.size() == set.samples.size();
      for (std::size_t i = 0; same && i < set.samples.size(); ++i) {
        same = std::abs(grid->samples[i].k - set.samples[i].k) <=
               1e-12 * std::max(1.0, std::abs(set.samples[i].k));
      }
      auto row = [&](double k, std::size_t b, rmm::WaveType t, double w, bool resampled) {
        os << src.name << ',' << set.angle << ',' << k << ',' << b << ',' << rmm::to_string(t)
           << ',' << w << ',' << (resampled ? 1 : 0) << '\n';
      };
      if (same) {
        for (const auto& s : set.samples) {
          for (std::size_t b = 0; b < s.omega.size(); ++b) row(s.k, b, s.type[b], s.omega[b], false);
        }
        continue;
      }
      const auto& sm = set.samples;
      for (const auto& g : grid->samples) {
        const auto hi = std::lower_bound(sm.begin(), sm.end(), g.k,
                                         [](const rmm::DispersionSample& a, double k) { return a.k < k; });
        if (hi == sm.end()) continue;
        if (hi->k == g.k) {
          for (std::size_t b = 0; b < hi->omega.size(); ++b) row(g.k, b, hi->type[b], hi->omega[b], true);
          continue;
        }
        if (hi == sm.begin()) continue;
        const auto lo = hi - 1;
        const double t = (g.k - lo->k) / (hi->k - lo->k);
        const auto& near = t < 0.5 ? *lo : *hi;
        const std::size_t nb = std::min(lo->omega.size(), hi->omega.size());
        for (std::size_t b = 0; b < nb; ++b) {
          row(g.k, b, near.type[b], (1.0 - t) * lo->omega[b] + t * hi->omega[b], true);
        }
      }
    }
  }
}

}  // namespace rmmcli
