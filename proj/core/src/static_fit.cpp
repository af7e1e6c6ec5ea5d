#include "rmm/static_fit.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <nlohmann/json.hpp>

#include "rmm/parallel.hpp"

namespace rmm {

const std::array<const char*, 5>& static_unknown_names() {
  static const std::array<const char*, 5> names{"mu_micro", "mu_star_micro", "lambda_micro",
                                                "mu_c", "mu_lc2"};
  return names;
}

FemEnergyModel::FemEnergyModel(double l, std::vector<int> n_list,
                               std::vector<AffineLoadCase> loads, int resolution,
                               const TetragonalElasticity& c_macro, RmmOptions options)
    : n_list_(std::move(n_list)), loads_(std::move(loads)), c_macro_(c_macro) {
  if (n_list_.empty() || loads_.empty()) {
    throw ValidationError("static fit: empty size list or load set");
  }
  problems_.resize(n_list_.size());
  for (std::size_t i = 0; i < n_list_.size(); ++i) {
    problems_[i] = std::make_unique<RmmProblem>(
        build_mesh(UnitCellGeometry::all_solid(l), n_list_[i], resolution), options);
  }
}

FemEnergyModel::~FemEnergyModel() = default;

Eigen::VectorXd FemEnergyModel::evaluate(const StaticUnknowns& x, Eigen::MatrixXd* jacobian) {
  ++evaluations_;
  const RmmStaticParams params = x.params(c_macro_);
  const std::size_t nl = loads_.size();
  Eigen::VectorXd e(case_count());
  if (jacobian) jacobian->resize(case_count(), 5);
  parallel_for(problems_.size(), [&](std::size_t i) {
    const auto sols = problems_[i]->solve(params, loads_);
    for (std::size_t j = 0; j < nl; ++j) {
      e[i * nl + j] = sols[j].energy;
      if (jacobian) {
        jacobian->row(i * nl + j) =
            chain_to_unknowns(sols[j].term_energy, x.c_micro(), c_macro_).transpose();
      }
    }
  });
  return e;
}

namespace {

std::vector<int> free_indices(const FreeMask& free) {
  std::vector<int> idx;
  for (int j = 0; j < 5; ++j) {
    if (free[j]) idx.push_back(j);
  }
  return idx;
}

Eigen::MatrixXd scaled_columns(const Eigen::MatrixXd& d, const std::vector<int>& idx,
                               const Vector5d& scale) {
  Eigen::MatrixXd ds(d.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) ds.col(c) = d.col(idx[c]) * scale[idx[c]];
  return ds;
}

}  // namespace

// Singular-value ratio below which a direction counts as unidentifiable.
constexpr double kNearNullRatio = 1e-6;

Vector5d gauss_newton_step(const Eigen::MatrixXd& d, const Eigen::VectorXd& residual,
                           const FreeMask& free, const Vector5d& scale) {
  const auto idx = free_indices(free);
  Vector5d dx = Vector5d::Zero();
  if (idx.empty()) return dx;
  const Eigen::MatrixXd ds = scaled_columns(d, idx, scale);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ds);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(idx.size())) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ds, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    std::vector<Vector5d> null;
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(idx.size()); ++c) {
      const double s = c < sv.size() ? sv[c] : 0.0;
      if (s <= 1e-10 * sv[0]) {
        Vector5d v = Vector5d::Zero();
        for (std::size_t r = 0; r < idx.size(); ++r) v[idx[r]] = svd.matrixV()(r, c);
        null.push_back(v);
      }
    }
    throw RankDeficientError("gauss_newton_step: rank-deficient sensitivity matrix (" +
                                 std::to_string(qr.rank()) + " of " +
                                 std::to_string(idx.size()) + ")",
                             std::move(null));
  }
  const Eigen::VectorXd step = qr.solve(residual);
  for (std::size_t c = 0; c < idx.size(); ++c) dx[idx[c]] = step[c] * scale[idx[c]];
  return dx;
}

Vector5d minimum_norm_step(const Eigen::MatrixXd& d, const Eigen::VectorXd& residual,
                           const FreeMask& free, const Vector5d& scale) {
  const auto idx = free_indices(free);
  Vector5d dx = Vector5d::Zero();
  if (idx.empty()) return dx;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(scaled_columns(d, idx, scale));
  cod.setThreshold(1e-10);
  const Eigen::VectorXd step = cod.solve(residual);
  for (std::size_t c = 0; c < idx.size(); ++c) dx[idx[c]] = step[c] * scale[idx[c]];
  return dx;
}

double beta_max(const StaticUnknowns& x, const Vector5d& dx, const TetragonalElasticity& cm) {
  constexpr double margin = 1.0 - 1e-9;
  // h(v) = v for v > 0, else 1; only active candidates are shrunk.
  auto candidate = [&](double gap, double delta) {
    if (delta == 0.0) return 1.0;
    const double v = -gap / delta;
    return v > 0.0 ? margin * v : 1.0;
  };
  double b = 1.0;
  b = std::min(b, candidate(x.mu_micro - cm.mu, dx[0]));
  b = std::min(b, candidate(x.mu_star_micro - cm.mu_star, dx[1]));
  b = std::min(b, candidate(x.lambda_micro + x.mu_micro - cm.bulk_family(), dx[2] + dx[0]));
  b = std::min(b, candidate(x.mu_c, dx[3]));
  b = std::min(b, candidate(x.mu_lc2, dx[4]));
  return b;
}

double line_search(const std::function<double(double)>& r2, double bmax) {
  if (!(bmax > 0.0)) return 0.0;
  const double f0 = r2(0.0);
  const double f1 = r2(bmax);
  std::uintmax_t iters = 60;
  // 11 bits of relative precision on [0, 1] is about 1e-3.
  const auto [bx, fx] = boost::math::tools::brent_find_minima(r2, 0.0, bmax, 11, iters);
  double best = 0.0;
  double fbest = f0;
  if (fx < fbest) {
    best = bx;
    fbest = fx;
  }
  if (f1 < fbest) best = bmax;
  return best;
}

namespace {

double sum_sq(const Eigen::VectorXd& v) { return v.squaredNorm(); }

Vector5d parameter_scale(const StaticUnknowns& x, const TetragonalElasticity& cm) {
  Vector5d s = x.vec().cwiseAbs();
  s[0] = std::max(s[0], cm.mu);
  s[1] = std::max(s[1], cm.mu_star);
  s[2] = std::max(s[2], cm.bulk_family());
  s[3] = std::max(s[3], cm.mu);
  s[4] = std::max(s[4], 1e-30);
  return s;
}

bool strictly_admissible(const StaticUnknowns& x, const TetragonalElasticity& cm) {
  return x.admissible(cm);
}

}  // namespace

FitReport fit_static(const StaticFitProblem& pb, EnergyModel& model) {
  if (static_cast<std::size_t>(pb.targets.size()) != model.case_count()) {
    throw ValidationError("fit_static: target count does not match the energy model");
  }
  for (Eigen::Index i = 0; i < pb.targets.size(); ++i) {
    if (!(std::isfinite(pb.targets[i]) && pb.targets[i] > 0.0)) {
      throw ValidationError("fit_static: targets must be finite and positive");
    }
  }
  StaticUnknowns x = pb.start;
  if (pb.mu_c_pin) x.mu_c = *pb.mu_c_pin;
  if (!strictly_admissible(x, pb.c_macro)) {
    throw ValidationError("fit_static: start point violates the admissibility constraints");
  }

  FitReport rep;
  rep.c_macro = pb.c_macro;
  rep.targets = pb.targets;
  rep.case_labels = pb.case_labels;
  if (rep.case_labels.empty()) {
    for (Eigen::Index i = 0; i < pb.targets.size(); ++i) rep.case_labels.push_back("case " + std::to_string(i));
  }
  const double norm2 = sum_sq(pb.targets);

  FreeMask base_free{true, true, true, !pb.mu_c_pin.has_value(), true};
  Eigen::MatrixXd d;
  Eigen::VectorXd e;
  try {
    e = model.evaluate(x, &d);
  } catch (const NumericError& err) {
    throw NumericError(std::string("fit_static: start evaluation: ") + err.what());
  }
  double r2 = sum_sq(pb.targets - e);
  rep.history.push_back({0, r2, 0.0, 0.0, x.vec(), ""});

  int small_changes = 0;
  int zero_steps = 0;
  bool negative_mu_c_logged = false;
  for (int it = 1; it <= pb.max_iterations; ++it) {
    const Eigen::VectorXd res = pb.targets - e;
    const Vector5d scale = parameter_scale(x, pb.c_macro);
    FreeMask free = base_free;
    Vector5d dx;
    std::string frozen;
    auto compute_step = [&] {
      try {
        dx = gauss_newton_step(d, res, free, scale);
      } catch (const RankDeficientError& err) {
        if (rep.null_space.empty()) {
          rep.null_space = err.null_space();
          rep.constraint_log.push_back("iteration " + std::to_string(it) +
                                       ": unidentifiable direction, using minimum-norm step");
        }
        dx = minimum_norm_step(d, res, free, scale);
      }
    };
    compute_step();

    if (!negative_mu_c_logged && free[3] && x.mu_c + dx[3] < 0.0) {
      rep.constraint_log.push_back("iteration " + std::to_string(it) +
                                   ": update prefers negative mu_c; held at mu_c >= 0");
      negative_mu_c_logged = true;
    }

    // Parameters sitting on a bound with an outward increment leave this
    // step and come back in the next one.
    for (int pass = 0; pass < 5; ++pass) {
      const double tol = 1e-6;
      bool changed = false;
      auto at_bound = [&](double gap, double ref) { return gap <= tol * ref; };
      const auto& cm = pb.c_macro;
      if (free[0] && at_bound(x.mu_micro - cm.mu, cm.mu) && dx[0] < 0.0) {
        free[0] = false;
        changed = true;
      }
      if (free[1] && at_bound(x.mu_star_micro - cm.mu_star, cm.mu_star) && dx[1] < 0.0) {
        free[1] = false;
        changed = true;
      }
      if (at_bound(x.lambda_micro + x.mu_micro - cm.bulk_family(), cm.bulk_family()) &&
          dx[0] + dx[2] < 0.0) {
        if (free[2]) {
          free[2] = false;
          changed = true;
        } else if (free[0]) {
          free[0] = false;
          changed = true;
        }
      }
      if (free[3] && at_bound(x.mu_c, cm.mu) && dx[3] < 0.0) {
        free[3] = false;
        changed = true;
      }
      if (free[4] && x.mu_lc2 <= 1e-12 * scale[4] && dx[4] < 0.0) {
        free[4] = false;
        changed = true;
      }
      if (!changed) break;
      compute_step();
    }
    for (int j = 0; j < 5; ++j) {
      if (base_free[j] && !free[j]) {
        if (!frozen.empty()) frozen += ';';
        frozen += static_unknown_names()[j];
      }
    }
    if (!frozen.empty()) {
      rep.constraint_log.push_back("iteration " + std::to_string(it) + ": frozen at bound: " +
                                   frozen);
    }

    const double bmax = beta_max(x, dx, pb.c_macro);
    auto r2_at = [&](double beta) {
      if (beta == 0.0) return r2;
      const StaticUnknowns y = StaticUnknowns::from(x.vec() + beta * dx);
      if (!strictly_admissible(y, pb.c_macro)) return std::numeric_limits<double>::infinity();
      // ill-conditioned trial points count as rejected
      try {
        return sum_sq(pb.targets - model.evaluate(y, nullptr));
      } catch (const NumericError&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const double beta = line_search(r2_at, bmax);
    if (beta > 0.0) {
      x = StaticUnknowns::from(x.vec() + beta * dx);
      if (pb.mu_c_pin) x.mu_c = *pb.mu_c_pin;
      e = model.evaluate(x, &d);
      const double r2_new = sum_sq(pb.targets - e);
      const double rel = std::abs(r2 - r2_new) / std::max(r2, 1e-300);
      r2 = r2_new;
      small_changes = rel < pb.relative_change_tolerance ? small_changes + 1 : 0;
      zero_steps = 0;
    } else {
      ++zero_steps;
    }
    rep.history.push_back({it, r2, bmax, beta, x.vec(), frozen});
    if (r2 <= 1e-28 * norm2) {
      rep.converged = true;
      rep.stop_reason = "exact fit";
      break;
    }
    if (small_changes >= 3) {
      rep.converged = true;
      rep.stop_reason = "relative r2 change below tolerance for 3 iterations";
      break;
    }
    if (zero_steps >= 2) {
      rep.converged = true;
      rep.stop_reason = "line search returned beta = 0 twice";
      break;
    }
  }
  if (!rep.converged) rep.stop_reason = "iteration limit";

  // Conditioning at the result; exact rank loss is caught inside the steps,
  // near-loss only shows up here.
  if (rep.null_space.empty()) {
    const auto idx = free_indices(base_free);
    if (!idx.empty()) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled_columns(d, idx, parameter_scale(x, pb.c_macro)),
                                            Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(idx.size()); ++c) {
        const double sc = c < sv.size() ? sv[c] : 0.0;
        if (sc > kNearNullRatio * sv[0]) continue;
        Vector5d v = Vector5d::Zero();
        for (std::size_t r = 0; r < idx.size(); ++r) v[idx[r]] = svd.matrixV()(r, c);
        rep.null_space.push_back(v);
      }
      if (!rep.null_space.empty()) {
        rep.constraint_log.push_back("result: " + std::to_string(rep.null_space.size()) +
                                     " near-null direction(s) in the scaled sensitivities");
      }
    }
  }

  rep.result = x;
  rep.energies = e;
  rep.r2 = r2;
  rep.r2_relative = r2 / norm2;
  double avg = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) avg += std::abs(pb.targets[i] - e[i]) / pb.targets[i];
  rep.average_error = avg / static_cast<double>(e.size());
  if (auto* fem = dynamic_cast<FemEnergyModel*>(&model)) rep.evaluations = fem->evaluations();
  return rep;
}

void write_iteration_csv(std::ostream& os, const FitReport& r) {
  os << "iteration,r2,beta_max,beta";
  for (const char* n : static_unknown_names()) os << ',' << n;
  os << ",frozen\n" << std::setprecision(15);
  for (const auto& h : r.history) {
    os << h.iteration << ',' << h.r2 << ',' << h.beta_max << ',' << h.beta;
    for (int j = 0; j < 5; ++j) os << ',' << h.x[j];
    os << ',' << h.frozen << '\n';
  }
}

std::string to_json(const FitReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json params;
  for (int i = 0; i < 5; ++i) params[static_unknown_names()[i]] = r.result.vec()[i];
  j["parameters_si"] = params;
  const auto ce = e_from_micro_macro(r.result.c_micro(), r.c_macro);
  j["c_e_si"] = {{"lambda", ce.lambda}, {"mu", ce.mu}, {"mu_star", ce.mu_star}};
  j["c_macro_si"] = {{"lambda", r.c_macro.lambda}, {"mu", r.c_macro.mu},
                     {"mu_star", r.c_macro.mu_star}};
  j["r2"] = r.r2;
  j["r2_relative"] = r.r2_relative;
  j["average_error"] = r.average_error;
  j["converged"] = r.converged;
  j["stop_reason"] = r.stop_reason;
  j["iterations"] = static_cast<int>(r.history.size()) - 1;
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& h : r.history) trace.push_back(h.r2);
  j["r2_trace"] = trace;
  j["constraint_log"] = r.constraint_log;
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < r.energies.size(); ++i) {
    nlohmann::ordered_json c;
    c["case"] = i < static_cast<Eigen::Index>(r.case_labels.size()) ? r.case_labels[i]
                                                                     : std::to_string(i);
    c["target"] = r.targets[i];
    c["model"] = r.energies[i];
    c["relative_error"] = (r.energies[i] - r.targets[i]) / r.targets[i];
    cases.push_back(c);
  }
  j["cases"] = cases;
  nlohmann::ordered_json null = nlohmann::ordered_json::array();
  for (const auto& v : r.null_space) null.push_back(std::vector<double>(v.data(), v.data() + 5));
  j["unidentifiable_directions"] = null;
  return j.dump(2);
}

}  // namespace rmm
