#include "gptpinn/greedy.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <random>
#include <thread>

namespace gptpinn {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

long index_of(const std::vector<ParameterPoint>& xi, const ParameterPoint& mu) {
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] == mu) return static_cast<long>(i);
  }
  return -1;
}

void say(const GreedyConfig& config, const std::string& line) {
  if (config.log) config.log(line);
}

}  // namespace

void GreedyConfig::validate(const PdeDefinition& pde) const {
  if (xi.empty()) throw Error("training set is empty");
  if (n_max < 1) throw Error("n_max must be >= 1");
  if (threads < 1) throw Error("threads must be >= 1");
  for (const auto& mu : xi) {
    if (!pde.domain().contains(mu)) throw Error("parameter outside domain");
  }
  if (mu1 && index_of(xi, *mu1) < 0) {
    throw Error("initial parameter is not in the training set");
  }
  full.validate();
  online.validate();
}

ScanResult scan_indicators(const GptModel& model,
                           std::span<const ParameterPoint> xi,
                           const OnlineConfig& online, int threads) {
  if (model.size() == 0) throw Error("model has no neurons");
  const auto start = std::chrono::steady_clock::now();
  ScanResult out;
  out.delta.assign(xi.size(), 0.0);
  std::vector<char> failed(xi.size(), 0);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        out.delta[i] =
            online_train(init_coeffs(xi[i], model), model, xi[i], online).delta;
      } catch (const OnlineDivergence&) {
        out.delta[i] = std::numeric_limits<double>::infinity();
        failed[i] = 1;
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)),
                            std::max<std::size_t>(xi.size(), 1));
  if (workers <= 1) {
    work(0, xi.size());
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t per = (xi.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = std::min(xi.size(), w * per);
      const std::size_t e = std::min(xi.size(), b + per);
      pool.emplace_back([&, w, b, e] {
        try {
          work(b, e);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (failed[i]) out.diverged.push_back(i);
  }
  out.wall_time = seconds_since(start);
  return out;
}

GptModel run_offline(const PdeDefinition& pde, const GreedyConfig& config) {
  config.validate(pde);
  GptModel model(pde, config.reduced.value_or(config.colloc), config.filter,
                 config.filter_fraction);
  model.xi = config.xi;
  model.online = config.online;

  ParameterPoint mu;
  if (config.mu1) {
    mu = *config.mu1;
  } else {
    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<std::size_t> pick(0, config.xi.size() - 1);
    mu = config.xi[pick(rng)];
  }
  std::vector<char> chosen(config.xi.size(), 0);
  double selected_by = std::numeric_limits<double>::quiet_NaN();

  for (int n = 1;; ++n) {
    GreedyRound round;
    round.mu = mu;
    round.selected_by = selected_by;
    const long idx = index_of(config.xi, mu);
    if (idx >= 0) chosen[static_cast<std::size_t>(idx)] = 1;

    say(config, "round " + std::to_string(n) + ": training at " +
                    format_parameter(mu));
    const auto t0 = std::chrono::steady_clock::now();
    try {
      FullPinn net = train_sa_pinn(pde, mu, config.colloc, config.full,
                                   config.seed + static_cast<std::uint64_t>(n - 1));
      round.t_full_train = seconds_since(t0);
      model.add_network(std::move(net));
    } catch (const TrainingDiverged& e) {
      round.t_full_train = seconds_since(t0);
      model.history.push_back(round);
      throw OfflineAborted(std::string("full PINN ") + e.what() + " at " +
                               format_parameter(mu),
                           std::move(model));
    }

    const bool last = n >= config.n_max;
    if (!last || config.final_scan) {
      const ScanResult scan =
          scan_indicators(model, config.xi, config.online, config.threads);
      for (std::size_t i : scan.diverged) {
        say(config, "warning: online divergence at " +
                        format_parameter(config.xi[i]));
      }
      round.scanned = true;
      round.scan = scan.delta;
      round.t_scan = scan.wall_time;
      round.max_indicator = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < scan.delta.size(); ++i) {
        if (chosen[i]) continue;
        if (round.argmax < 0 || scan.delta[i] > round.max_indicator) {
          round.max_indicator = scan.delta[i];
          round.argmax = static_cast<long>(i);
        }
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", round.max_indicator);
      say(config, "round " + std::to_string(n) + ": max indicator " + buf);
    }
    model.history.push_back(round);

    if (last || round.argmax < 0) break;
    if (config.tol && round.max_indicator < *config.tol) break;
    mu = config.xi[static_cast<std::size_t>(round.argmax)];
    selected_by = round.max_indicator;
  }
  return model;
}

std::vector<std::size_t> uniform_indices(std::size_t xi_size, int n) {
  if (n < 1 || static_cast<std::size_t>(n) > xi_size) {
    throw Error("uniform baseline needs 1 <= N <= |xi|");
  }
  std::vector<std::size_t> out;
  if (n == 1) return {0};
  for (int k = 0; k < n; ++k) {
    out.push_back(static_cast<std::size_t>(std::llround(
        static_cast<double>(k) * static_cast<double>(xi_size - 1) / (n - 1))));
  }
  return out;
}

GptModel uniform_baseline(const PdeDefinition& pde, const GreedyConfig& config,
                          int n) {
  config.validate(pde);
  GptModel model(pde, config.reduced.value_or(config.colloc), config.filter,
                 config.filter_fraction);
  model.xi = config.xi;
  model.online = config.online;
  const auto picks = uniform_indices(config.xi.size(), n);
  for (std::size_t k = 0; k < picks.size(); ++k) {
    GreedyRound round;
    round.mu = config.xi[picks[k]];
    round.selected_by = std::numeric_limits<double>::quiet_NaN();
    say(config, "uniform " + std::to_string(k + 1) + ": training at " +
                    format_parameter(round.mu));
    const auto t0 = std::chrono::steady_clock::now();
    try {
      FullPinn net = train_sa_pinn(pde, round.mu, config.colloc, config.full,
                                   config.seed + k);
      round.t_full_train = seconds_since(t0);
      model.add_network(std::move(net));
    } catch (const TrainingDiverged& e) {
      model.history.push_back(round);
      throw OfflineAborted(std::string("full PINN ") + e.what(),
                           std::move(model));
    }
    model.history.push_back(round);
  }
  return model;
}

std::string check_certificates(const GptModel& model) {
  const auto& h = model.history;
  std::vector<char> chosen(model.xi.size(), 0);
  for (std::size_t n = 0; n < h.size(); ++n) {
    const long idx = index_of(model.xi, h[n].mu);
    if (idx >= 0) chosen[static_cast<std::size_t>(idx)] = 1;
    const std::string tag = "round " + std::to_string(n + 1) + ": ";
    if (h[n].scanned) {
      if (h[n].scan.size() != model.xi.size()) return tag + "scan table size";
      double best = -std::numeric_limits<double>::infinity();
      long arg = -1;
      for (std::size_t i = 0; i < h[n].scan.size(); ++i) {
        if (chosen[i]) continue;
        if (arg < 0 || h[n].scan[i] > best) {
          best = h[n].scan[i];
          arg = static_cast<long>(i);
        }
      }
      if (arg != h[n].argmax) return tag + "stored argmax is not the maximum";
      if (arg >= 0 && !(best == h[n].max_indicator)) {
        return tag + "stored max indicator disagrees with the table";
      }
    }
    if (n == 0) continue;
    const GreedyRound& prev = h[n - 1];
    if (!prev.scanned) return tag + "previous round has no scan";
    if (prev.argmax < 0 || static_cast<std::size_t>(prev.argmax) >= model.xi.size()) {
      return tag + "previous argmax out of range";
    }
    if (!(model.xi[static_cast<std::size_t>(prev.argmax)] == h[n].mu)) {
      return tag + "chosen parameter is not the previous argmax";
    }
    if (!(h[n].selected_by == prev.max_indicator)) {
      return tag + "selecting indicator disagrees with the previous round";
    }
  }
  return {};
}

}  // namespace gptpinn
