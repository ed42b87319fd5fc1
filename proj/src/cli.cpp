#include "gptpinn/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "gptpinn/archive.hpp"
#include "gptpinn/config.hpp"
#include "gptpinn/csv.hpp"
#include "gptpinn/error.hpp"
#include "gptpinn/hash.hpp"

namespace gptpinn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config;
  std::string out;
  std::string model;
  std::string mu;
};

std::string hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string join(const fs::path& dir, const std::string& name) {
  return (dir / name).string();
}

json mu_json(const ParameterPoint& mu) { return mu.values; }

class Run {
 public:
  Run(std::string command, const Options& opt, std::ostream& out)
      : command_(std::move(command)), opt_(opt), out_(out) {}

  RunConfig load() {
    RunConfig c = load_config(opt_.config);
    config_ = c;
    return c;
  }

  fs::path out_dir() {
    std::string dir = opt_.out;
    if (dir.empty() && config_) dir = config_->output_dir;
    if (dir.empty()) throw Error("no output directory (use --out)");
    fs::create_directories(dir);
    return dir;
  }

  void log(const std::string& line) { out_ << line << '\n' << std::flush; }
  auto logger() {
    return [this](const std::string& line) { log(line); };
  }

  void meta(const fs::path& dir, json extra = json::object()) {
    json m;
    m["command"] = command_;
    if (config_) {
      const RunConfig& c = *config_;
      m["config"] = opt_.config;
      m["config_hash"] = hex(c.hash());
      m["seeds"] = {{"collocation", c.colloc_seed},
                    {"reduced_collocation", c.reduced_seed},
                    {"full_pinn", c.full_seed},
                    {"greedy", c.greedy_seed},
                    {"eval", c.eval_seed}};
      m["deviations"] = c.deviations();
    } else {
      m["config_hash"] = nullptr;
      m["deviations"] = json::array();
    }
    if (!opt_.model.empty()) {
      m["model"] = opt_.model;
      std::ifstream in(opt_.model, std::ios::binary);
      const std::string bytes((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
      m["model_hash"] = hex(fnv1a64(bytes));
    }
    for (auto& [k, v] : extra.items()) m[k] = v;
    std::ofstream f(join(dir, "run_meta.json"));
    f << m.dump(2) << '\n';
    if (!f) throw Error("cannot write run_meta.json");
  }

  const Options& opt() const { return opt_; }

 private:
  std::string command_;
  const Options& opt_;
  std::ostream& out_;
  std::optional<RunConfig> config_;
};

void require_inside(const PdeDefinition& pde, const ParameterPoint& mu) {
  if (mu.dim() != pde.domain().dim() || !pde.domain().contains(mu)) {
    throw Error("parameter outside domain");
  }
}

int cmd_train_full(Run& run) {
  const RunConfig c = run.load();
  const ParameterPoint mu = parse_parameter(run.opt().mu);
  require_inside(c.pde, mu);
  const fs::path dir = run.out_dir();
  run.log("training full PINN at (" + format_parameter(mu) + ")");
  const FullPinn net = train_sa_pinn(c.pde, mu, c.collocation(), c.full, c.full_seed);
  save_full_pinn(net, join(dir, "network.gptpinn"));
  write_loss_history(join(dir, "loss_history.csv"), net.loss_history);
  run.log("terminal loss " + format_number(net.terminal_loss) + " after " +
          std::to_string(net.epochs_run) + " epochs");
  run.meta(dir, {{"mu", mu_json(mu)}, {"terminal_loss", net.terminal_loss}});
  return 0;
}

void write_offline(const fs::path& dir, const GptModel& model,
                   const std::string& archive) {
  save_model(model, join(dir, archive));
  write_chosen_params(join(dir, "chosen_params.csv"), model);
  write_indicator_scans(dir.string(), model);
  for (std::size_t i = 0; i < model.size(); ++i) {
    write_loss_history(join(dir, "loss_history_" + std::to_string(i + 1) + ".csv"),
                       model.networks()[i].loss_history);
  }
}

int cmd_offline(Run& run) {
  const RunConfig c = run.load();
  const fs::path dir = run.out_dir();
  GreedyConfig g = c.greedy_config();
  g.log = run.logger();
  try {
    const GptModel model = run_offline(c.pde, g);
    write_offline(dir, model, "model.gptpinn");
    run.meta(dir, {{"neurons", model.size()}});
    run.log("wrote " + join(dir, "model.gptpinn") + " with " +
            std::to_string(model.size()) + " neurons");
  } catch (const OfflineAborted& e) {
    write_offline(dir, e.partial(), "model.partial.gptpinn");
    run.meta(dir, {{"aborted", e.what()}, {"neurons", e.partial().size()}});
    throw;
  }
  return 0;
}

int cmd_online(Run& run) {
  std::optional<RunConfig> c;
  if (!run.opt().config.empty()) c = run.load();
  const GptModel model = load_model(run.opt().model);
  const ParameterPoint mu = parse_parameter(run.opt().mu);
  require_inside(model.pde(), mu);
  const fs::path dir = run.out_dir();
  const OnlineConfig online = c ? c->online : model.online;
  const EvalGrid grid = c ? c->grid : EvalGrid{};

  const OnlineResult r = online_train(init_coeffs(mu, model), model, mu, online);
  write_coefficients(join(dir, "coefficients.csv"), r.c);
  write_online_results(join(dir, "online_results.csv"), model.pde().family(),
                       {{mu, r.delta, r.epochs, r.wall_time}});
  const PointBatch points = grid_points(model.pde(), grid);
  write_prediction(join(dir, "prediction.csv"), points, gpt_predict(r.c, model, points));
  run.log("delta " + format_number(r.delta) + " after " + std::to_string(r.epochs) +
          " epochs (" + format_number(r.wall_time) + " s)");
  run.meta(dir, {{"mu", mu_json(mu)}, {"delta", r.delta}});
  return 0;
}

ReferenceSource reference_for(const RunConfig& c, const fs::path& dir) {
  if (c.pde.family() == PdeFamily::kKleinGordon) {
    const PdeDefinition pde = c.pde;
    const EvalGrid grid = c.grid;
    return [pde, grid](const ParameterPoint& mu,
                       const PointBatch&) -> std::optional<Vector> {
      return kg_reference_solution(pde, mu, grid);
    };
  }
  return trained_reference(c.pde, c.collocation(), c.full, c.full_seed,
                           join(dir, "reference_cache"));
}

void check_model_matches(const RunConfig& c, const GptModel& model) {
  if (!(c.pde == model.pde())) {
    throw Error("model was built for a different PDE than the config");
  }
}

int cmd_eval(Run& run) {
  const RunConfig c = run.load();
  const GptModel model = load_model(run.opt().model);
  check_model_matches(c, model);
  const fs::path dir = run.out_dir();
  const auto params =
      draw_test_parameters(c.pde.domain(), c.test_count, c.eval_seed, model.parameters());
  const ErrorReport report = evaluate_test_set(model, params, reference_for(c, dir),
                                               c.grid, c.online, run.logger());
  write_test_errors(join(dir, "test_errors.csv"), c.pde.family(), report);
  run.log("worst rel_l2 " + format_number(report.worst_rel_l2) + ", worst max_abs " +
          format_number(report.worst_max_abs) + " over " +
          std::to_string(report.records.size()) + " parameters");
  run.meta(dir, {{"worst_rel_l2", report.worst_rel_l2},
                 {"worst_max_abs", report.worst_max_abs},
                 {"skipped", report.skipped.size()}});
  return 0;
}

int cmd_bench(Run& run) {
  const RunConfig c = run.load();
  const GptModel model = load_model(run.opt().model);
  check_model_matches(c, model);
  const fs::path dir = run.out_dir();
  const auto queries = draw_test_parameters(c.pde.domain(), c.bench_queries,
                                            c.eval_seed + 1, model.parameters());
  const TimingCurve curve =
      timing_benchmark(model, queries, c.collocation(), c.full, c.online, c.full_seed,
                       {c.bench_full_queries, c.bench_horizon});
  write_timing(join(dir, "timing.csv"), curve);
  json breakeven = nullptr;
  if (curve.breakeven) breakeven = *curve.breakeven;
  run.log("t_full " + format_number(curve.t_full) + " s, t_gpt " +
          format_number(curve.t_gpt) + " s, ratio " +
          format_number(curve.marginal_ratio) + ", breakeven " + breakeven.dump());
  run.meta(dir, {{"t_full", curve.t_full},
                 {"t_gpt", curve.t_gpt},
                 {"offline_total", curve.offline_total},
                 {"marginal_ratio", curve.marginal_ratio},
                 {"breakeven", breakeven}});
  return 0;
}

int cmd_svd(Run& run) {
  const RunConfig c = run.load();
  const fs::path dir = run.out_dir();
  const auto params = draw_test_parameters(c.pde.domain(), c.svd_params, c.eval_seed, {});
  TrainConfig train = c.full;
  if (c.svd_epochs) train.epochs = *c.svd_epochs;
  const SvdExperiment e = svd_experiment(c.pde, params, c.collocation(), train,
                                         c.full_seed, c.grid, c.svd_source, run.logger());
  write_svd(join(dir, "svd.csv"), e);
  run.meta(dir, {{"snapshots", params.size()}});
  return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"Reduced solver built greedily from pre-trained PINNs", "gptpinn"};
  app.require_subcommand(1);
  Options opt;

  auto* train = app.add_subcommand("train-full", "Train one full PINN at a parameter");
  train->add_option("--config", opt.config, "Run configuration (INI)")->required();
  train->add_option("--mu", opt.mu, "Parameter, e.g. \"-1,0,1\"")->required();
  train->add_option("--out", opt.out, "Output directory");

  auto* offline = app.add_subcommand("offline", "Greedy offline stage");
  offline->add_option("--config", opt.config, "Run configuration (INI)")->required();
  offline->add_option("--out", opt.out, "Output directory");

  auto* online = app.add_subcommand("online", "Answer one parameter query");
  online->add_option("--model", opt.model, "Model archive")->required();
  online->add_option("--mu", opt.mu, "Parameter")->required();
  online->add_option("--config", opt.config, "Online settings and grid");
  online->add_option("--out", opt.out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Errors on a test set");
  auto* bench = app.add_subcommand("bench", "Cumulative cost comparison");
  for (auto* sub : {eval, bench}) {
    sub->add_option("--model", opt.model, "Model archive")->required();
    sub->add_option("--config", opt.config, "Run configuration (INI)")->required();
    sub->add_option("--out", opt.out, "Output directory");
  }

  auto* svd = app.add_subcommand("svd", "Snapshot singular value decay");
  svd->add_option("--config", opt.config, "Run configuration (INI)")->required();
  svd->add_option("--out", opt.out, "Output directory");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  Run run(sub->get_name(), opt, out);
  try {
    if (sub == train) return cmd_train_full(run);
    if (sub == offline) return cmd_offline(run);
    if (sub == online) return cmd_online(run);
    if (sub == eval) return cmd_eval(run);
    if (sub == bench) return cmd_bench(run);
    return cmd_svd(run);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cli_dispatch(int argc, char** argv) {
  return cli_dispatch(std::vector<std::string>(argv, argv + argc), std::cout,
                      std::cerr);
}

}  // namespace gptpinn
