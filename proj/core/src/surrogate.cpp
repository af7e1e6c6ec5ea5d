#include "rmm/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rmm/error.hpp"
#include "rmm/parallel.hpp"

namespace rmm {

ParameterRanges ParameterRanges::standard(const TetragonalElasticity& cm,
                                          const TetragonalElasticity& matrix, double l) {
  ParameterRanges r;
  r.lo << cm.mu, cm.mu_star, cm.lambda, 0.0, 0.1;
  r.hi << matrix.mu, 10.0 * matrix.mu_star, matrix.lambda, cm.mu, 5.0 * cm.mu * l * l;
  return r;
}

namespace {

std::vector<double> axis(double lo, double hi, int count) {
  if (count < 1) throw ValidationError("surrogate: grid counts must be ≥ 1");
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
  return v;
}

}  // namespace

TrainingDataset generate_dataset(const SurrogateSpec& spec) {
  for (int j = 0; j < 5; ++j) {
    if (!(spec.ranges.hi[j] >= spec.ranges.lo[j])) {
      throw ValidationError("surrogate: empty parameter range");
    }
  }
  std::array<std::vector<double>, 5> ax;
  for (int j = 0; j < 5; ++j) ax[j] = axis(spec.ranges.lo[j], spec.ranges.hi[j], spec.counts[j]);

  TrainingDataset data;
  data.spec = spec;
  std::vector<Vector5d> points;
  for (double a : ax[0])
    for (double b : ax[1])
      for (double c : ax[2])
        for (double d : ax[3])
          for (double e : ax[4]) {
            Vector5d x;
            x << a, b, c, d, e;
            if (!StaticUnknowns::from(x).admissible(spec.c_macro)) {
              std::ostringstream os;
              os << std::setprecision(6) << "(" << a << ", " << b << ", " << c << ", " << d
                 << ", " << e << ")";
              data.skipped.push_back(os.str());
              continue;
            }
            points.push_back(x);
          }

  const auto loads = AffineLoadCase::standard_set(spec.amplitude);
  std::vector<std::unique_ptr<RmmProblem>> problems;
  for (int n : spec.n_list) {
    problems.push_back(std::make_unique<RmmProblem>(
        build_mesh(UnitCellGeometry::all_solid(spec.l), n, spec.resolution), spec.options));
  }
  const std::size_t per_point = spec.n_list.size() * loads.size();
  data.rows.resize(points.size() * per_point);
  // Problems hold factorisation state, so each worker takes whole sizes.
  for (std::size_t in = 0; in < problems.size(); ++in) {
    auto& prob = *problems[in];
    for (std::size_t p = 0; p < points.size(); ++p) {
      const auto x = StaticUnknowns::from(points[p]);
      const auto sols = prob.solve(x.params(spec.c_macro), loads);
      for (std::size_t il = 0; il < loads.size(); ++il) {
        auto& row = data.rows[p * per_point + in * loads.size() + il];
        row.x = points[p];
        row.case_index = static_cast<int>(in * loads.size() + il);
        row.mode = loads[il].mode;
        row.n = spec.n_list[in];
        row.energy = sols[il].energy;
      }
    }
  }
  return data;
}

void write_dataset_csv(std::ostream& os, const TrainingDataset& data) {
  os << "mu_micro,mu_star_micro,lambda_micro,mu_c,mu_lc2,mode,n,energy\n"
     << std::setprecision(15);
  for (const auto& r : data.rows) {
    for (int j = 0; j < 5; ++j) os << r.x[j] << ',';
    os << to_string(r.mode) << ',' << r.n << ',' << r.energy << '\n';
  }
}

Eigen::VectorXd SurrogateModel::Net::features(const Vector5d& x, Vector5d* dzdx) const {
  Eigen::VectorXd z(5);
  for (int j = 0; j < 5; ++j) {
    // Clamped so that starts touching a zero bound stay finite.
    const double v = log_input[j] ? std::log(std::max(x[j], 1e-300)) : x[j];
    z[j] = (v - x_mean[j]) / x_std[j];
    if (dzdx) (*dzdx)[j] = (log_input[j] ? 1.0 / std::max(x[j], 1e-300) : 1.0) / x_std[j];
  }
  return z;
}

double SurrogateModel::predict(std::size_t c, const Vector5d& x) const {
  const Net& net = nets_.at(c);
  const Eigen::VectorXd z = net.features(x);
  const double f = net.mlp.value_and_gradient(z, nullptr);
  return std::exp(net.y_mean + net.y_std * f);
}

Eigen::VectorXd SurrogateModel::evaluate(const StaticUnknowns& xu, Eigen::MatrixXd* jac) {
  const Vector5d x = xu.vec();
  Eigen::VectorXd e(nets_.size());
  if (jac) jac->resize(nets_.size(), 5);
  for (std::size_t c = 0; c < nets_.size(); ++c) {
    const Net& net = nets_[c];
    Vector5d dz;
    const Eigen::VectorXd z = net.features(x, &dz);
    Eigen::VectorXd g;
    const double f = net.mlp.value_and_gradient(z, jac ? &g : nullptr);
    e[c] = std::exp(net.y_mean + net.y_std * f);
    if (jac) {
      for (int j = 0; j < 5; ++j) (*jac)(c, j) = e[c] * net.y_std * g[j] * dz[j];
    }
  }
  return e;
}

void SurrogateModel::save(std::ostream& os, const std::string& notes) const {
  nlohmann::ordered_json j;
  j["format"] = "rmmid-mlp";
  j["version"] = 1;
  j["activation"] = "relu hidden, affine output";
  j["target"] = "standardised log energy";
  j["notes"] = notes;
  nlohmann::ordered_json nets = nlohmann::ordered_json::array();
  for (const auto& n : nets_) {
    nlohmann::ordered_json jn;
    jn["label"] = n.label;
    jn["layer_sizes"] = n.mlp.layer_sizes();
    jn["log_input"] = std::vector<bool>(n.log_input.begin(), n.log_input.end());
    jn["x_mean"] = std::vector<double>(n.x_mean.data(), n.x_mean.data() + 5);
    jn["x_std"] = std::vector<double>(n.x_std.data(), n.x_std.data() + 5);
    jn["y_mean"] = n.y_mean;
    jn["y_std"] = n.y_std;
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (std::size_t l = 0; l < n.mlp.weights().size(); ++l) {
      const auto& w = n.mlp.weights()[l];
      std::vector<double> rowmajor;
      rowmajor.reserve(static_cast<std::size_t>(w.size()));
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) rowmajor.push_back(w(r, c));
      const auto& b = n.mlp.biases()[l];
      layers.push_back({{"rows", w.rows()},
                        {"cols", w.cols()},
                        {"weights_row_major", rowmajor},
                        {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
    }
    jn["layers"] = layers;
    nets.push_back(jn);
  }
  j["networks"] = nets;
  os << j.dump();
}

SurrogateModel SurrogateModel::load(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("surrogate model: ") + e.what());
  }
  if (j.value("format", "") != "rmmid-mlp") throw ValidationError("surrogate model: bad format");
  std::vector<Net> nets;
  for (const auto& jn : j.at("networks")) {
    Net n;
    n.label = jn.at("label").get<std::string>();
    const auto sizes = jn.at("layer_sizes").get<std::vector<int>>();
    n.mlp = Mlp(sizes, 0);
    if (jn.contains("log_input")) {
      const auto li = jn.at("log_input").get<std::vector<bool>>();
      if (li.size() != 5) throw ValidationError("surrogate model: log_input needs 5 flags");
      for (int k = 0; k < 5; ++k) n.log_input[k] = li[k];
    }
    const auto xm = jn.at("x_mean").get<std::vector<double>>();
    const auto xs = jn.at("x_std").get<std::vector<double>>();
    for (int k = 0; k < 5; ++k) {
      n.x_mean[k] = xm.at(k);
      n.x_std[k] = xs.at(k);
    }
    n.y_mean = jn.at("y_mean").get<double>();
    n.y_std = jn.at("y_std").get<double>();
    const auto& layers = jn.at("layers");
    if (layers.size() != n.mlp.weights().size()) throw ValidationError("surrogate model: layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& w = n.mlp.weights()[l];
      const auto v = layers[l].at("weights_row_major").get<std::vector<double>>();
      const auto b = layers[l].at("bias").get<std::vector<double>>();
      if (v.size() != static_cast<std::size_t>(w.size()) ||
          b.size() != static_cast<std::size_t>(w.rows())) {
        throw ValidationError("surrogate model: layer shape mismatch");
      }
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = v[r * w.cols() + c];
      for (Eigen::Index r = 0; r < w.rows(); ++r) n.mlp.biases()[l][r] = b[r];
    }
    nets.push_back(std::move(n));
  }
  return SurrogateModel(std::move(nets));
}

SurrogateModel::Net train_network(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  bool log_target, const TrainOptions& o,
                                  NetworkSummary* summary) {
  const Eigen::Index n = x.rows();
  if (n < 2 || x.cols() != 5) throw ValidationError("train: need ≥ 2 rows of 5 inputs");
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(o.split_seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const Eigen::Index nv = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(o.validation_fraction * n)), 1, n - 1);
  const Eigen::Index nt = n - nv;

  SurrogateModel::Net net;
  Eigen::VectorXd target = y;
  if (log_target) {
    if ((y.array() <= 0.0).any()) throw ValidationError("train: log target needs positive values");
    target = y.array().log();
  }
  for (int j = 0; j < 5; ++j) net.log_input[j] = o.log_input[j] && (x.col(j).array() > 0.0).all();
  // Statistics from the training part only.
  Eigen::MatrixXd xt(nt, 5);
  Eigen::VectorXd yt(nt);
  for (Eigen::Index i = 0; i < nt; ++i) {
    xt.row(i) = x.row(idx[i]);
    for (int j = 0; j < 5; ++j) {
      if (net.log_input[j]) xt(i, j) = std::log(xt(i, j));
    }
    yt[i] = target[idx[i]];
  }
  net.x_mean = xt.colwise().mean().transpose();
  for (int j = 0; j < 5; ++j) {
    const double sd = std::sqrt((xt.col(j).array() - net.x_mean[j]).square().mean());
    net.x_std[j] = sd > 0.0 ? sd : 1.0;
  }
  net.y_mean = yt.mean();
  const double ysd = std::sqrt((yt.array() - net.y_mean).square().mean());
  net.y_std = ysd > 0.0 ? ysd : 1.0;

  auto normalise = [&](const Eigen::VectorXd& row) { return net.features(row); };
  Eigen::MatrixXd xs(5, nt);
  Eigen::MatrixXd ys(1, nt);
  for (Eigen::Index i = 0; i < nt; ++i) {
    xs.col(i) = normalise(x.row(idx[i]).transpose());
    ys(0, i) = (yt[i] - net.y_mean) / net.y_std;
  }
  std::vector<int> sizes{5};
  sizes.insert(sizes.end(), o.hidden.begin(), o.hidden.end());
  sizes.push_back(1);
  net.mlp = Mlp(sizes, o.adam.seed);
  const auto trace = train_adam(net.mlp, xs, ys, o.adam);

  auto predict_rows = [&](Eigen::Index from, Eigen::Index to, Eigen::VectorXd& truth,
                          Eigen::VectorXd& pred) {
    const Eigen::Index m = to - from;
    Eigen::MatrixXd in(5, m);
    truth.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      in.col(i) = normalise(x.row(idx[from + i]).transpose());
      truth[i] = y[idx[from + i]];
    }
    const Eigen::RowVectorXd out = net.mlp.forward(in).row(0);
    pred.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double t = net.y_mean + net.y_std * out[i];
      pred[i] = log_target ? std::exp(t) : t;
    }
  };
  if (summary) {
    Eigen::VectorXd tr, pr;
    predict_rows(nt, n, tr, pr);
    summary->validation_r2 = r_squared(tr, pr);
    predict_rows(0, nt, tr, pr);
    summary->train_r2 = r_squared(tr, pr);
    summary->train_rows = static_cast<std::size_t>(nt);
    summary->validation_rows = static_cast<std::size_t>(nv);
    summary->loss_trace = trace;
  }
  return net;
}

TrainResult train(const TrainingDataset& data, const TrainOptions& o) {
  const std::size_t nc = data.case_count();
  std::vector<std::vector<const TrainingRow*>> by_case(nc);
  for (const auto& r : data.rows) by_case.at(r.case_index).push_back(&r);
  std::vector<SurrogateModel::Net> nets(nc);
  TrainResult res;
  res.networks.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& rows = by_case[c];
    if (rows.size() < 2) throw ValidationError("train: too few rows for a case");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), 5);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = rows[i]->x.transpose();
      y[static_cast<Eigen::Index>(i)] = rows[i]->energy;
    }
    const std::string label = to_string(rows.front()->mode) + ",n=" +
                              std::to_string(rows.front()->n);
    nets[c] = train_network(x, y, true, o, &res.networks[c]);
    nets[c].label = label;
    res.networks[c].label = label;
  }
  res.model = SurrogateModel(std::move(nets));
  res.min_validation_r2 = INFINITY;
  for (const auto& s : res.networks) res.min_validation_r2 = std::min(res.min_validation_r2, s.validation_r2);
  return res;
}

StartPrediction predict_start(SurrogateModel& model, const Eigen::VectorXd& targets,
                              const TetragonalElasticity& c_macro, int n_starts,
                              const ParameterRanges& ranges, std::uint64_t seed,
                              std::optional<double> mu_c_pin) {
  if (n_starts < 1) throw ValidationError("predict_start: n_starts must be ≥ 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vector5d> starts;
  for (int s = 0; s < n_starts; ++s) {
    Vector5d x;
    // Open interval keeps every start strictly admissible.
    for (int j = 0; j < 5; ++j) {
      const double t = 0.02 + 0.96 * u(rng);
      x[j] = ranges.lo[j] + t * (ranges.hi[j] - ranges.lo[j]);
    }
    starts.push_back(x);
  }
  std::vector<std::optional<std::pair<double, Vector5d>>> out(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    const auto x0 = StaticUnknowns::from(starts[s]);
    if (!x0.admissible(c_macro)) return;
    SurrogateModel local = model;
    StaticFitProblem pb;
    pb.targets = targets;
    pb.c_macro = c_macro;
    pb.start = x0;
    pb.mu_c_pin = mu_c_pin;
    pb.max_iterations = 100;
    try {
      const auto rep = fit_static(pb, local);
      out[s] = std::make_pair(rep.r2, rep.result.vec());
    } catch (const std::exception&) {
    }
  });
  StartPrediction pred;
  for (auto& o : out) {
    if (o) pred.ranked.push_back(*o);
  }
  if (pred.ranked.empty()) throw NumericError("predict_start: all starts infeasible");
  std::stable_sort(pred.ranked.begin(), pred.ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  pred.feasible_starts = static_cast<int>(pred.ranked.size());
  pred.best_r2 = pred.ranked.front().first;
  pred.best = StaticUnknowns::from(pred.ranked.front().second);
  return pred;
}

}  // namespace rmm
