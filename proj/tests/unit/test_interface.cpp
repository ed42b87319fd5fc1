#include <gtest/gtest.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gptpinn/archive.hpp"
#include "gptpinn/cli.hpp"
#include "gptpinn/config.hpp"
#include "gptpinn/csv.hpp"
#include "gptpinn/error.hpp"
#include "gptpinn/greedy.hpp"
#include "helpers.hpp"

using namespace gptpinn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gptpinn_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

GptModel three_neuron_model() {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kBurgers);
  GreedyConfig g;
  g.xi = pde.domain().tensor_grid({5});
  g.n_max = 3;
  g.full = gptpinn::testing::tiny_train(pde.family(), 15);
  g.online = {0.02, 10, OnlineOptimizer::kPlainGd};
  g.colloc = gptpinn::testing::small_set(pde);
  g.filter = FilterRule::kMaxFraction;
  g.final_scan = true;
  return run_offline(pde, g);
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

const char* kTinyConfig = R"([pde]
family = burgers
[collocation]
interior = 30
boundary = 6
initial = 6
[full_pinn]
dims = [2, 4, 1]
epochs = 5
[online]
epochs = 5
[greedy]
xi = [4]
n_max = 1
[eval]
test_count = 2
grid = [5, 5]
)";

}  // namespace

TEST(Archive, RoundTripIsBitwise) {
  const GptModel m = three_neuron_model();
  const auto bytes = encode_model(m);
  const GptModel back = decode_model(bytes);
  EXPECT_EQ(encode_model(back), bytes);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_TRUE(back.networks()[i].params == m.networks()[i].params);
    EXPECT_EQ(back.networks()[i].terminal_loss, m.networks()[i].terminal_loss);
    EXPECT_EQ(back.networks()[i].loss_history, m.networks()[i].loss_history);
    EXPECT_EQ(back.history[i].scan, m.history[i].scan);
  }
  EXPECT_TRUE(same_points(back.reduced(), m.reduced()));
  for (std::size_t k = 0; k < m.basis().term_count(); ++k) {
    for (int ch = 0; ch < kNumChannels; ++ch) {
      EXPECT_TRUE(back.basis().matrix(k, ch) == m.basis().matrix(k, ch));
    }
  }
  EXPECT_EQ(check_certificates(back), "");
  EXPECT_TRUE(std::isnan(back.history[0].selected_by));
}

TEST(Archive, FileRoundTrip) {
  const fs::path dir = scratch("archive");
  const GptModel m = three_neuron_model();
  save_model(m, (dir / "m.gptpinn").string());
  EXPECT_EQ(encode_model(load_model((dir / "m.gptpinn").string())), encode_model(m));
  fs::remove_all(dir);
}

TEST(Archive, RejectsBadInput) {
  const auto good = encode_model(three_neuron_model());
  std::vector<char> bad(good);
  std::copy_n("XXXXXXXX", 8, bad.begin());
  EXPECT_EQ(error_of([&] { decode_model(bad); }), "not a model archive");
  bad = good;
  bad[7] = '2';
  EXPECT_EQ(error_of([&] { decode_model(bad); }), "unsupported version");
  bad.assign(good.begin(), good.begin() + static_cast<long>(good.size() - 12));
  EXPECT_EQ(error_of([&] { decode_model(bad); }), "corrupt archive");
  bad.assign(good.begin(), good.begin() + 12);
  EXPECT_EQ(error_of([&] { decode_model(bad); }), "corrupt archive");
  bad = good;
  bad.push_back('\0');
  EXPECT_EQ(error_of([&] { decode_model(bad); }), "corrupt archive");
  EXPECT_EQ(error_of([&] { decode_model({}); }), "not a model archive");
}

TEST(Archive, KindsAreNotInterchangeable) {
  const GptModel m = three_neuron_model();
  const auto net = encode_full_pinn(m.networks()[0]);
  EXPECT_EQ(error_of([&] { decode_model(net); }), "not a model archive");
  EXPECT_EQ(error_of([&] { decode_full_pinn(encode_model(m)); }), "not a model archive");
  const FullPinn back = decode_full_pinn(net);
  EXPECT_TRUE(back.params == m.networks()[0].params);
  EXPECT_EQ(back.mu, m.networks()[0].mu);
  EXPECT_EQ(encode_full_pinn(back), net);
}

TEST(Config, ParsesOverDefaults) {
  const RunConfig c = parse_config(kTinyConfig);
  EXPECT_EQ(c.pde.family(), PdeFamily::kBurgers);
  EXPECT_EQ(c.counts.interior, 30);
  EXPECT_EQ(c.full.dims, (std::vector<int>{2, 4, 1}));
  EXPECT_EQ(c.full.activation, Activation::kTanh);
  ASSERT_TRUE(c.full.stop_loss.has_value());
  EXPECT_EQ(*c.full.stop_loss, 2e-5);
  EXPECT_EQ(c.filter, FilterRule::kMaxFraction);
  EXPECT_EQ(c.training_set().size(), 4u);
  EXPECT_EQ(c.grid.nx, 5);
}

TEST(Config, FullScaleDefaults) {
  const RunConfig kg = RunConfig::defaults(PdeFamily::kKleinGordon);
  EXPECT_EQ(kg.full.dims, (std::vector<int>{2, 40, 40, 1}));
  EXPECT_EQ(kg.full.epochs, 75000);
  EXPECT_EQ(kg.training_set().size(), 1000u);
  EXPECT_EQ(kg.n_max, 15);
  const RunConfig bu = RunConfig::defaults(PdeFamily::kBurgers);
  EXPECT_EQ(bu.training_set().size(), 129u);
  EXPECT_EQ(bu.n_max, 9);
  EXPECT_EQ(bu.online.lr, 0.02);
  const RunConfig ac = RunConfig::defaults(PdeFamily::kAllenCahn);
  EXPECT_TRUE(ac.full.sa_enabled);
  EXPECT_EQ(ac.strategy, SamplingStrategy::kLatinHypercube);
  EXPECT_EQ(ac.online.lr, 0.0025);
  const auto dev = ac.deviations();
  EXPECT_NE(std::find(dev.begin(), dev.end(), "lbfgs_replaced_by_adam_phase2"), dev.end());
}

TEST(Config, RejectsUnknownAndMissing) {
  EXPECT_NE(error_of([] { parse_config("[pde]\nfamily = kg\ncolour = red\n"); }).find("colour"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_config("[pde]\nfamily = kg\n[extra]\na = 1\n"); }).find("extra"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_config("[online]\nlr = 0.1\n"); }), "");
  EXPECT_NE(error_of([] { parse_config("[pde]\nfamily = kg\n[online]\nlr = fast\n"); }), "");
  EXPECT_NE(error_of([] { parse_config("[pde]\nfamily = kg\n[greedy]\nxi = [3, 3]\n"); }), "");
  EXPECT_EQ(error_of([] { parse_config("[pde]\nfamily = kg\n[greedy]\nmu1 = 0,0,0\n"); }),
            "parameter outside domain");
  EXPECT_NE(error_of([] { load_config("/nonexistent/file.ini"); }), "");
}

namespace {

// kTinyConfig with one key replaced or added.
std::string with_key(const std::string& section, const std::string& key,
                     const std::string& value) {
  std::istringstream in(kTinyConfig);
  std::string line, current, out;
  bool done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '[') {
      if (current == section && !done) {
        out += key + " = " + value + "\n";
        done = true;
      }
      current = line.substr(1, line.size() - 2);
    } else if (current == section && line.rfind(key + " ", 0) == 0) {
      out += key + " = " + value + "\n";
      done = true;
      continue;
    }
    out += line + "\n";
  }
  if (!done) {
    if (current != section) out += "[" + section + "]\n";
    out += key + " = " + value + "\n";
  }
  return out;
}

}  // namespace

TEST(Config, HashTracksSemanticFields) {
  const std::uint64_t h = parse_config(kTinyConfig).hash();
  EXPECT_EQ(parse_config(kTinyConfig).hash(), h);
  EXPECT_EQ(parse_config(with_key("output", "directory", "elsewhere")).hash(), h);
  EXPECT_EQ(parse_config(with_key("greedy", "threads", "4")).hash(), h);
  // Restating a default is not a change.
  EXPECT_EQ(parse_config(with_key("online", "optimizer", "plain-gd")).hash(), h);
  const std::vector<std::array<std::string, 3>> tweaks = {
      {"collocation", "seed", "1"},     {"collocation", "interior", "31"},
      {"full_pinn", "lr", "0.00123"},   {"full_pinn", "stop_loss", "none"},
      {"full_pinn", "activation", "cos"}, {"online", "epochs", "6"},
      {"greedy", "n_max", "2"},         {"greedy", "xi", "[5]"},
      {"eval", "test_count", "3"},      {"pde", "t_final", "0.5"},
  };
  for (const auto& [section, key, value] : tweaks) {
    EXPECT_NE(parse_config(with_key(section, key, value)).hash(), h) << section << "." << key;
  }
}

TEST(Csv, HeadersAndRoundTrip) {
  const fs::path dir = scratch("csv");
  const GptModel m = three_neuron_model();
  write_chosen_params((dir / "chosen_params.csv").string(), m);
  const auto scans = write_indicator_scans(dir.string(), m);
  EXPECT_EQ(scans.size(), 3u);
  const CsvTable t = read_csv((dir / "chosen_params.csv").string(),
                              {"round", "nu", "max_indicator", "t_full_train_s", "t_scan_s"});
  EXPECT_EQ(t.header, (std::vector<std::string>{"round", "nu", "max_indicator",
                                                "t_full_train_s", "t_scan_s"}));
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.numbers("max_indicator")[1], m.history[1].max_indicator);
  const CsvTable s = read_csv(scans[0], {"nu", "delta"});
  EXPECT_EQ(s.numbers("delta"), m.history[0].scan);

  write_loss_history((dir / "loss_history.csv").string(), m.networks()[0].loss_history);
  EXPECT_EQ(read_csv((dir / "loss_history.csv").string(), {"epoch", "loss"}).numbers("loss"),
            m.networks()[0].loss_history);

  TimingCurve c = make_timing_curve(2.0, 1.0, 0.1, 4);
  write_timing((dir / "timing.csv").string(), c);
  EXPECT_EQ(read_csv((dir / "timing.csv").string(), {"q", "full_cum_s", "gpt_cum_s"})
                .numbers("gpt_cum_s"),
            c.gpt_cum);

  SvdExperiment e{{}, {1.0, 0.1}, {1.0, 0.9}};
  write_svd((dir / "svd.csv").string(), e);
  EXPECT_EQ(read_csv((dir / "svd.csv").string(), {"k", "sigma_ratio", "label"}).rows.size(), 4u);

  ErrorReport rep;
  rep.records.push_back({{{0.5}}, 0.1, 0.2, 0.3, 0.4});
  write_test_errors((dir / "test_errors.csv").string(), PdeFamily::kBurgers, rep);
  EXPECT_EQ(read_csv((dir / "test_errors.csv").string()).header,
            (std::vector<std::string>{"nu", "rel_l2", "max_abs", "delta", "t_online_s"}));

  write_online_results((dir / "online_results.csv").string(), PdeFamily::kKleinGordon,
                       {{{{-1.0, 0.5, 0.25}}, 0.01, 7, 0.002}});
  EXPECT_EQ(read_csv((dir / "online_results.csv").string()).header,
            (std::vector<std::string>{"alpha", "beta", "gamma", "delta", "epochs",
                                      "t_online_s"}));
  fs::remove_all(dir);
}

TEST(Csv, MissingColumnAndEmptyFile) {
  const fs::path dir = scratch("csv_bad");
  write_text(dir / "chosen_params.csv", "round,nu,t_full_train_s,t_scan_s\n1,0.5,1,2\n");
  const std::string msg = error_of(
      [&] { read_csv((dir / "chosen_params.csv").string(), {"round", "max_indicator"}); });
  EXPECT_NE(msg.find("max_indicator"), std::string::npos);
  EXPECT_NE(msg.find("chosen_params.csv"), std::string::npos);
  write_text(dir / "empty.csv", "");
  EXPECT_NE(error_of([&] { read_csv((dir / "empty.csv").string()); }).find("empty"),
            std::string::npos);
  fs::remove_all(dir);
}

TEST(Csv, SpecialValuesRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
  CsvTable t{{"v"}, {{"inf"}, {"1e-300"}, {"nan"}}};
  const auto v = t.numbers("v");
  EXPECT_TRUE(std::isinf(v[0]));
  EXPECT_EQ(v[1], 1e-300);
  EXPECT_TRUE(std::isnan(v[2]));
}

namespace {

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "gptpinn");
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  std::string err;
  EXPECT_EQ(run_cli({"frobnicate"}, &err), 1);
  EXPECT_NE(err.find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli({}, &err), 1);
  EXPECT_EQ(run_cli({"offline"}, &err), 1);  // missing --config
}

TEST(Cli, OfflineOnlineRoundTrip) {
  const fs::path dir = scratch("cli");
  write_text(dir / "tiny.ini", kTinyConfig);
  const std::string cfg = (dir / "tiny.ini").string();
  const std::string out = (dir / "offline").string();
  ASSERT_EQ(run_cli({"offline", "--config", cfg, "--out", out}), 0);
  const GptModel m = load_model((dir / "offline" / "model.gptpinn").string());
  EXPECT_EQ(m.size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "offline" / "chosen_params.csv"));
  EXPECT_TRUE(fs::exists(dir / "offline" / "loss_history_1.csv"));
  std::ifstream meta(dir / "offline" / "run_meta.json");
  std::stringstream ss;
  ss << meta.rdbuf();
  std::ostringstream hash;
  hash << std::hex;
  hash.width(16);
  hash.fill('0');
  hash << load_config(cfg).hash();
  EXPECT_NE(ss.str().find(hash.str()), std::string::npos);

  const std::string model = (dir / "offline" / "model.gptpinn").string();
  std::string err;
  EXPECT_EQ(run_cli({"online", "--model", model, "--mu", "5.0", "--out",
                     (dir / "q").string()}, &err), 2);
  EXPECT_NE(err.find("parameter outside domain"), std::string::npos);
  EXPECT_EQ(run_cli({"online", "--model", model, "--mu", "0.5", "--out",
                     (dir / "q").string()}), 0);
  const CsvTable pred = read_csv((dir / "q" / "prediction.csv").string(), {"x", "t", "u"});
  EXPECT_EQ(pred.rows.size(), 101u * 101u);
  EXPECT_TRUE(fs::exists(dir / "q" / "coefficients.csv"));
  EXPECT_TRUE(fs::exists(dir / "q" / "online_results.csv"));
  EXPECT_TRUE(fs::exists(dir / "q" / "run_meta.json"));

  EXPECT_EQ(run_cli({"online", "--model", (dir / "nope").string(), "--mu", "0.5", "--out",
                     (dir / "q").string()}), 2);
  fs::remove_all(dir);
}

TEST(Cli, TrainFullWritesNetworkAndHistory) {
  const fs::path dir = scratch("cli_train");
  write_text(dir / "tiny.ini", kTinyConfig);
  ASSERT_EQ(run_cli({"train-full", "--config", (dir / "tiny.ini").string(), "--mu", "0.2",
                     "--out", (dir / "t").string()}), 0);
  const FullPinn net = load_full_pinn((dir / "t" / "network.gptpinn").string());
  EXPECT_EQ(read_csv((dir / "t" / "loss_history.csv").string(), {"epoch", "loss"}).numbers("loss"),
            net.loss_history);
  fs::remove_all(dir);
}
