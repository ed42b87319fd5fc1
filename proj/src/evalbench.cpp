#include "gptpinn/evalbench.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "gptpinn/archive.hpp"
#include "gptpinn/error.hpp"
#include "gptpinn/hash.hpp"

namespace gptpinn {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

void say(const std::function<void(const std::string&)>& log,
         const std::string& line) {
  if (log) log(line);
}

}  // namespace

ErrorMetrics error_metrics(const Vector& gpt, const Vector& reference) {
  if (gpt.size() != reference.size()) {
    throw Error("error metrics need equal-length inputs");
  }
  const double ref_norm = reference.norm();
  if (!(ref_norm > 0.0)) throw Error("degenerate reference");
  const Vector diff = gpt - reference;
  return {diff.norm() / ref_norm, diff.cwiseAbs().maxCoeff()};
}

PointBatch grid_points(const PdeDefinition& pde, const EvalGrid& grid) {
  if (grid.nx < 2 || grid.nt < 2) throw Error("evaluation grid needs >= 2 points per axis");
  PointBatch out;
  out.x.resize(static_cast<Eigen::Index>(grid.nx) * grid.nt);
  out.t.resize(out.x.size());
  const double x0 = pde.x_min(), x1 = pde.x_max(), tf = pde.t_final();
  Eigen::Index k = 0;
  for (int i = 0; i < grid.nx; ++i) {
    const double x = x0 + (x1 - x0) * i / (grid.nx - 1);
    for (int j = 0; j < grid.nt; ++j, ++k) {
      out.x(k) = x;
      out.t(k) = tf * j / (grid.nt - 1);
    }
  }
  return out;
}

ErrorReport evaluate_test_set(
    const GptModel& model, const std::vector<ParameterPoint>& test_params,
    const ReferenceSource& reference, const EvalGrid& grid,
    const OnlineConfig& online,
    const std::function<void(const std::string&)>& log) {
  const PointBatch points = grid_points(model.pde(), grid);
  ErrorReport report;
  report.grid = grid;
  for (const auto& mu : test_params) {
    std::optional<Vector> ref = reference ? reference(mu, points) : std::nullopt;
    if (!ref) {
      say(log, "warning: no reference for " + format_parameter(mu) + ", skipped");
      report.skipped.push_back(mu);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const OnlineResult res = online_train(init_coeffs(mu, model), model, mu, online);
    const double t_online = seconds_since(t0);
    const ErrorMetrics m = error_metrics(gpt_predict(res.c, model, points), *ref);
    report.records.push_back({mu, m.rel_l2, m.max_abs, res.delta, t_online});
    report.worst_rel_l2 = std::max(report.worst_rel_l2, m.rel_l2);
    report.worst_max_abs = std::max(report.worst_max_abs, m.max_abs);
  }
  return report;
}

std::vector<ParameterPoint> draw_test_parameters(
    const ParameterDomain& domain, int count, std::uint64_t seed,
    const std::vector<ParameterPoint>& exclude) {
  if (count < 0) throw Error("test count must be >= 0");
  std::mt19937_64 rng(seed);
  std::vector<ParameterPoint> out;
  while (static_cast<int>(out.size()) < count) {
    ParameterPoint mu;
    for (const auto& b : domain.bounds()) {
      std::uniform_real_distribution<double> u(b.lo, b.hi);
      mu.values.push_back(b.lo == b.hi ? b.lo : u(rng));
    }
    bool clash = false;
    for (const auto& e : exclude) clash = clash || e == mu;
    if (!clash) out.push_back(std::move(mu));
  }
  return out;
}

ReferenceSource trained_reference(const PdeDefinition& pde,
                                  const CollocationSet& colloc,
                                  const TrainConfig& config, std::uint64_t seed,
                                  std::optional<std::string> cache_dir) {
  return [=](const ParameterPoint& mu,
             const PointBatch& points) -> std::optional<Vector> {
    std::string path;
    if (cache_dir) {
      std::ostringstream key;
      key.precision(17);
      key << to_string(pde.family()) << '|' << format_parameter(mu) << '|'
          << to_string(config.activation) << '|' << config.lr << '|'
          << config.epochs << '|' << config.phase2_epochs << '|'
          << config.phase2_lr << '|' << config.sa_enabled << '|' << seed << '|'
          << colloc.seed << '|' << colloc.interior.size() << '|'
          << colloc.boundary.size() << '|' << colloc.initial.size();
      for (int d : config.dims) key << ',' << d;
      char name[40];
      std::snprintf(name, sizeof name, "ref_%016llx.gptpinn",
                    static_cast<unsigned long long>(fnv1a64(key.str())));
      std::filesystem::create_directories(*cache_dir);
      path = (std::filesystem::path(*cache_dir) / name).string();
      if (std::filesystem::exists(path)) {
        const FullPinn cached = load_full_pinn(path);
        if (cached.mu == mu) {
          return extended_forward(cached.params, points, kValue).u();
        }
      }
    }
    const FullPinn net = train_sa_pinn(pde, mu, colloc, config, seed);
    if (!path.empty()) save_full_pinn(net, path);
    return extended_forward(net.params, points, kValue).u();
  };
}

std::optional<long> breakeven_formula(double offline_total, double t_full,
                                      double t_gpt) {
  if (!(t_gpt < t_full)) return std::nullopt;
  return static_cast<long>(std::ceil(offline_total / (t_full - t_gpt)));
}

TimingCurve make_timing_curve(double offline_total, double t_full, double t_gpt,
                              long horizon) {
  TimingCurve c;
  c.offline_total = offline_total;
  c.t_full = t_full;
  c.t_gpt = t_gpt;
  c.marginal_ratio = t_full > 0.0 ? t_gpt / t_full : 0.0;
  long h = std::max<long>(horizon, 1);
  if (const auto be = breakeven_formula(offline_total, t_full, t_gpt)) {
    h = std::max(h, std::min<long>(*be + 1, 100'000'000));
  }
  c.full_cum.resize(static_cast<std::size_t>(h) + 1);
  c.gpt_cum.resize(static_cast<std::size_t>(h) + 1);
  for (long q = 0; q <= h; ++q) {
    const auto i = static_cast<std::size_t>(q);
    c.full_cum[i] = static_cast<double>(q) * t_full;
    c.gpt_cum[i] = offline_total + static_cast<double>(q) * t_gpt;
    if (!c.breakeven && c.gpt_cum[i] <= c.full_cum[i]) c.breakeven = q;
  }
  return c;
}

double offline_cost(const GptModel& model) {
  double total = 0.0;
  for (const auto& r : model.history) total += r.t_full_train + r.t_scan;
  return total;
}

TimingCurve timing_benchmark(const GptModel& model,
                             const std::vector<ParameterPoint>& queries,
                             const CollocationSet& colloc,
                             const TrainConfig& full,
                             const OnlineConfig& online, std::uint64_t seed,
                             const BenchOptions& options) {
  if (queries.empty()) throw Error("timing benchmark needs at least one query");
  double gpt_total = 0.0;
  for (const auto& mu : queries) {
    const auto t0 = std::chrono::steady_clock::now();
    online_train(init_coeffs(mu, model), model, mu, online);
    gpt_total += seconds_since(t0);
  }
  const std::size_t n_full = std::min<std::size_t>(
      queries.size(), static_cast<std::size_t>(std::max(options.full_queries, 1)));
  double full_total = 0.0;
  for (std::size_t q = 0; q < n_full; ++q) {
    const auto t0 = std::chrono::steady_clock::now();
    train_sa_pinn(model.pde(), queries[q], colloc, full, seed + q);
    full_total += seconds_since(t0);
  }
  return make_timing_curve(offline_cost(model),
                           full_total / static_cast<double>(n_full),
                           gpt_total / static_cast<double>(queries.size()),
                           options.horizon);
}

std::vector<double> svd_decay_report(const Eigen::MatrixXd& snapshots) {
  if (snapshots.size() == 0 || !(snapshots.cwiseAbs().maxCoeff() > 0.0)) {
    throw Error("zero snapshot matrix");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(snapshots);
  const Vector s = svd.singularValues();
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    out[static_cast<std::size_t>(k)] = s(k) / s(0);
  }
  return out;
}

Vector kg_reference_solution(const PdeDefinition& pde, const ParameterPoint& mu,
                             const EvalGrid& grid, int nx_fd) {
  if (pde.family() != PdeFamily::kKleinGordon) {
    throw Error("reference solver covers the Klein-Gordon family only");
  }
  if (mu.dim() != 3) throw Error("parameter has the wrong number of components");
  if (nx_fd % (grid.nx - 1) != 0) {
    throw Error("solver grid must refine the evaluation grid");
  }
  const double alpha = mu[0], beta = mu[1], gamma = mu[2];
  const double x0 = pde.x_min(), x1 = pde.x_max(), tf = pde.t_final();
  const double h = (x1 - x0) / nx_fd;
  const double frame = tf / (grid.nt - 1);
  // CFL: wave speed sqrt(|alpha|).
  const double dt_max = 0.5 * h / std::sqrt(std::max(std::abs(alpha), 1e-12));
  const int sub = static_cast<int>(std::ceil(frame / dt_max));
  const double dt = frame / sub;

  const int n = nx_fd + 1;
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = x0 + h * i;
  auto rhs = [&](const Vector& u, double t) {
    Vector f(n);
    const double c = std::cos(t);
    for (int i = 1; i < n - 1; ++i) {
      const double uxx = (u(i - 1) - 2.0 * u(i) + u(i + 1)) / (h * h);
      f(i) = -alpha * uxx - beta * u(i) - gamma * u(i) * u(i) - x(i) * c +
             x(i) * x(i) * c * c;
    }
    f(0) = f(n - 1) = 0.0;
    return f;
  };
  auto set_boundary = [&](Vector& u, double t) {
    u(0) = pde.boundary_value(x0, t);
    u(n - 1) = pde.boundary_value(x1, t);
  };

  Eigen::MatrixXd frames(n, grid.nt);
  Vector prev(n), cur(n);
  for (int i = 0; i < n; ++i) prev(i) = pde.initial_value(x(i));
  frames.col(0) = prev;
  // Taylor start using u_t(x, 0).
  const Vector f0 = rhs(prev, 0.0);
  for (int i = 0; i < n; ++i) {
    cur(i) = prev(i) + dt * pde.initial_velocity(x(i)) + 0.5 * dt * dt * f0(i);
  }
  set_boundary(cur, dt);
  long step = 1;
  for (int j = 1; j < grid.nt; ++j) {
    const long target = static_cast<long>(j) * sub;
    while (step < target) {
      const Vector f = rhs(cur, step * dt);
      Vector next = 2.0 * cur - prev + dt * dt * f;
      set_boundary(next, (step + 1) * dt);
      prev = std::move(cur);
      cur = std::move(next);
      ++step;
    }
    frames.col(j) = cur;
  }

  const int stride = nx_fd / (grid.nx - 1);
  Vector out(static_cast<Eigen::Index>(grid.nx) * grid.nt);
  Eigen::Index k = 0;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.nt; ++j) out(k++) = frames(i * stride, j);
  }
  return out;
}

std::string_view to_string(SnapshotSource s) {
  return s == SnapshotSource::kPinn ? "pinn" : "reference";
}

SnapshotSource snapshot_source_from_string(std::string_view name) {
  if (name == "reference") return SnapshotSource::kReference;
  if (name == "pinn") return SnapshotSource::kPinn;
  throw Error("unknown snapshot source '" + std::string(name) + "'");
}

SvdExperiment svd_experiment(
    const PdeDefinition& pde, const std::vector<ParameterPoint>& params,
    const CollocationSet& colloc, const TrainConfig& config, std::uint64_t seed,
    const EvalGrid& grid, SnapshotSource source,
    const std::function<void(const std::string&)>& log) {
  if (params.empty()) throw Error("snapshot experiment needs parameters");
  const PointBatch points = grid_points(pde, grid);
  const auto m = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd u(points.size(), m);
  Eigen::MatrixXd theta(
      static_cast<Eigen::Index>(MlpParams::parameter_count(config.dims)), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const ParameterPoint& mu = params[static_cast<std::size_t>(k)];
    say(log, "snapshot " + std::to_string(k + 1) + "/" + std::to_string(m) +
                 " at " + format_parameter(mu));
    const FullPinn net = train_sa_pinn(pde, mu, colloc, config, seed);
    theta.col(k) = net.params.theta();
    u.col(k) = source == SnapshotSource::kPinn
                   ? Vector(extended_forward(net.params, points, kValue).u())
                   : kg_reference_solution(pde, mu, grid);
  }
  SvdExperiment out;
  out.params = params;
  out.solution = svd_decay_report(u);
  out.theta = svd_decay_report(theta);
  return out;
}

}  // namespace gptpinn
