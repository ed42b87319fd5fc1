#include "gptpinn/archive.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include <json.hpp>

#include "gptpinn/error.hpp"

namespace gptpinn {

namespace {

using nlohmann::json;

constexpr char kMagic[] = "GPTPINN1";
constexpr std::size_t kMagicSize = 8;
constexpr int kVersion = 1;

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return __builtin_bswap64(v);
  }
  return v;
}

struct Writer {
  json arrays = json::array();
  std::vector<double> data;

  void add(const std::string& name, const double* values, Eigen::Index rows,
           Eigen::Index cols) {
    arrays.push_back({{"name", name}, {"rows", rows}, {"cols", cols}});
    data.insert(data.end(), values, values + rows * cols);
  }
  void add(const std::string& name, const Vector& v) {
    add(name, v.data(), v.size(), 1);
  }
  void add(const std::string& name, const std::vector<double>& v) {
    add(name, v.data(), static_cast<Eigen::Index>(v.size()), 1);
  }
  void add_points(const std::string& name, const PointBatch& p) {
    add(name + ".x", p.x);
    add(name + ".t", p.t);
  }
  void add_params(const std::string& name,
                  const std::vector<ParameterPoint>& mus) {
    const std::size_t d = mus.empty() ? 0 : mus.front().dim();
    std::vector<double> flat;
    for (const auto& mu : mus) flat.insert(flat.end(), mu.values.begin(), mu.values.end());
    add(name, flat.data(), static_cast<Eigen::Index>(mus.size()),
        static_cast<Eigen::Index>(d));
  }

  std::vector<char> finish(json meta) {
    meta["arrays"] = arrays;
    const std::string text = meta.dump();
    std::vector<char> out(kMagicSize + 8 + text.size() + 8 * data.size());
    char* p = out.data();
    std::memcpy(p, kMagic, kMagicSize);
    const std::uint64_t len = to_le(text.size());
    std::memcpy(p + kMagicSize, &len, 8);
    std::memcpy(p + kMagicSize + 8, text.data(), text.size());
    p += kMagicSize + 8 + text.size();
    for (double d : data) {
      const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(d));
      std::memcpy(p, &bits, 8);
      p += 8;
    }
    return out;
  }
};

struct Array {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<double> values;
};

struct Reader {
  json meta;
  std::map<std::string, Array> arrays;

  const Array& get(const std::string& name) const {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw Error("corrupt archive");
    return it->second;
  }
  Vector vec(const std::string& name) const {
    const Array& a = get(name);
    return Eigen::Map<const Vector>(a.values.data(),
                                    static_cast<Eigen::Index>(a.values.size()));
  }
  std::vector<double> list(const std::string& name) const {
    return get(name).values;
  }
  PointBatch points(const std::string& name) const {
    PointBatch p;
    p.x = vec(name + ".x");
    p.t = vec(name + ".t");
    if (p.x.size() != p.t.size()) throw Error("corrupt archive");
    return p;
  }
  std::vector<ParameterPoint> params(const std::string& name) const {
    const Array& a = get(name);
    std::vector<ParameterPoint> out;
    for (Eigen::Index r = 0; r < a.rows; ++r) {
      ParameterPoint mu;
      mu.values.assign(a.values.begin() + r * a.cols,
                       a.values.begin() + (r + 1) * a.cols);
      out.push_back(std::move(mu));
    }
    return out;
  }
};

Reader read_container(const std::vector<char>& bytes, const std::string& kind) {
  if (bytes.size() < kMagicSize ||
      std::memcmp(bytes.data(), kMagic, kMagicSize - 1) != 0) {
    throw Error("not a model archive");
  }
  if (bytes[kMagicSize - 1] != kMagic[kMagicSize - 1]) {
    throw Error("unsupported version");
  }
  std::size_t pos = kMagicSize;
  if (bytes.size() < pos + 8) throw Error("corrupt archive");
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + pos, 8);
  len = to_le(len);
  pos += 8;
  if (len > bytes.size() - pos) throw Error("corrupt archive");
  Reader r;
  try {
    r.meta = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
  } catch (const json::exception&) {
    throw Error("corrupt archive");
  }
  pos += len;
  try {
    if (r.meta.at("version").get<int>() != kVersion) {
      throw Error("unsupported version");
    }
    if (r.meta.at("kind").get<std::string>() != kind) {
      throw Error("not a model archive");
    }
    for (const auto& a : r.meta.at("arrays")) {
      Array arr;
      arr.rows = a.at("rows").get<Eigen::Index>();
      arr.cols = a.at("cols").get<Eigen::Index>();
      if (arr.rows < 0 || arr.cols < 0) throw Error("corrupt archive");
      const auto count = static_cast<std::size_t>(arr.rows * arr.cols);
      if (count > (bytes.size() - pos) / 8) throw Error("corrupt archive");
      arr.values.resize(count);
      for (std::size_t i = 0; i < count; ++i, pos += 8) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, bytes.data() + pos, 8);
        arr.values[i] = std::bit_cast<double>(to_le(bits));
      }
      r.arrays[a.at("name").get<std::string>()] = std::move(arr);
    }
  } catch (const json::exception&) {
    throw Error("corrupt archive");
  }
  if (pos != bytes.size()) throw Error("corrupt archive");
  return r;
}

json pde_meta(const PdeDefinition& pde) {
  json domain = json::array();
  for (const auto& b : pde.domain().bounds()) domain.push_back({b.lo, b.hi});
  return {{"family", std::string(to_string(pde.family()))},
          {"domain", domain},
          {"t_final", pde.t_final()}};
}

PdeDefinition pde_from_meta(const json& j) {
  std::vector<Interval> bounds;
  for (const auto& b : j.at("domain")) {
    bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
  }
  return PdeDefinition(pde_family_from_string(j.at("family").get<std::string>()),
                       ParameterDomain(std::move(bounds)),
                       j.at("t_final").get<double>());
}

json network_meta(const FullPinn& n) {
  return {{"dims", n.params.dims()},
          {"activation", std::string(to_string(n.params.activation()))},
          {"epochs_run", n.epochs_run},
          {"seed", n.seed}};
}

void add_network_arrays(Writer& w, const std::string& prefix, const FullPinn& n) {
  w.add(prefix + ".mu", n.mu.values);
  w.add(prefix + ".theta", n.params.theta());
  w.add(prefix + ".scalars", std::vector<double>{n.terminal_loss, n.wall_time});
  w.add(prefix + ".loss_history", n.loss_history);
}

FullPinn network_from(const Reader& r, const std::string& prefix, const json& j) {
  FullPinn n;
  n.mu.values = r.list(prefix + ".mu");
  n.params = MlpParams(j.at("dims").get<std::vector<int>>(),
                       activation_from_string(j.at("activation").get<std::string>()),
                       r.vec(prefix + ".theta"));
  const auto s = r.list(prefix + ".scalars");
  if (s.size() != 2) throw Error("corrupt archive");
  n.terminal_loss = s[0];
  n.wall_time = s[1];
  n.epochs_run = j.at("epochs_run").get<long>();
  n.seed = j.at("seed").get<std::uint64_t>();
  n.loss_history = r.list(prefix + ".loss_history");
  return n;
}

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write '" + path + "'");
}

}  // namespace

std::vector<char> encode_model(const GptModel& model) {
  Writer w;
  json meta;
  meta["version"] = kVersion;
  meta["kind"] = "gpt_model";
  meta["pde"] = pde_meta(model.pde());
  meta["filter"] = std::string(to_string(model.filter()));
  const CollocationSet& red = model.reduced_base();
  meta["reduced"] = {{"strategy", std::string(to_string(red.strategy))},
                     {"seed", red.seed}};
  w.add_points("reduced.interior", red.interior);
  w.add_points("reduced.boundary", red.boundary);
  w.add_points("reduced.initial", red.initial);
  w.add("filter_fraction", std::vector<double>{model.filter_fraction()});

  json nets = json::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    nets.push_back(network_meta(model.networks()[i]));
    add_network_arrays(w, "network" + std::to_string(i), model.networks()[i]);
  }
  meta["networks"] = nets;

  w.add_params("xi", model.xi);
  meta["xi_dim"] = model.xi.empty() ? 0 : model.xi.front().dim();
  json rounds = json::array();
  for (std::size_t n = 0; n < model.history.size(); ++n) {
    const GreedyRound& r = model.history[n];
    rounds.push_back({{"scanned", r.scanned}, {"argmax", r.argmax}});
    const std::string p = "round" + std::to_string(n);
    w.add(p + ".mu", r.mu.values);
    w.add(p + ".scalars", std::vector<double>{r.selected_by, r.max_indicator,
                                             r.t_full_train, r.t_scan});
    w.add(p + ".scan", r.scan);
  }
  meta["history"] = rounds;
  meta["online"] = {{"epochs", model.online.epochs},
                    {"optimizer", std::string(to_string(model.online.optimizer))}};
  w.add("online.lr", std::vector<double>{model.online.lr});
  return w.finish(std::move(meta));
}

GptModel decode_model(const std::vector<char>& bytes) {
  const Reader r = read_container(bytes, "gpt_model");
  try {
    const json& m = r.meta;
    CollocationSet red;
    red.interior = r.points("reduced.interior");
    red.boundary = r.points("reduced.boundary");
    red.initial = r.points("reduced.initial");
    red.strategy =
        sampling_strategy_from_string(m.at("reduced").at("strategy").get<std::string>());
    red.seed = m.at("reduced").at("seed").get<std::uint64_t>();
    const auto frac = r.list("filter_fraction");
    if (frac.size() != 1) throw Error("corrupt archive");
    GptModel model(pde_from_meta(m.at("pde")), std::move(red),
                   filter_rule_from_string(m.at("filter").get<std::string>()),
                   frac[0]);
    const json& nets = m.at("networks");
    for (std::size_t i = 0; i < nets.size(); ++i) {
      model.add_network(network_from(r, "network" + std::to_string(i), nets[i]));
    }
    model.xi = r.params("xi");
    const auto lr = r.list("online.lr");
    if (lr.size() != 1) throw Error("corrupt archive");
    model.online.lr = lr[0];
    model.online.epochs = m.at("online").at("epochs").get<long>();
    model.online.optimizer = online_optimizer_from_string(
        m.at("online").at("optimizer").get<std::string>());
    const json& rounds = m.at("history");
    for (std::size_t n = 0; n < rounds.size(); ++n) {
      const std::string p = "round" + std::to_string(n);
      GreedyRound round;
      round.mu.values = r.list(p + ".mu");
      const auto s = r.list(p + ".scalars");
      if (s.size() != 4) throw Error("corrupt archive");
      round.selected_by = s[0];
      round.max_indicator = s[1];
      round.t_full_train = s[2];
      round.t_scan = s[3];
      round.scan = r.list(p + ".scan");
      round.scanned = rounds[n].at("scanned").get<bool>();
      round.argmax = rounds[n].at("argmax").get<long>();
      model.history.push_back(std::move(round));
    }
    return model;
  } catch (const json::exception&) {
    throw Error("corrupt archive");
  }
}

void save_model(const GptModel& model, const std::string& path) {
  write_file(path, encode_model(model));
}

GptModel load_model(const std::string& path) {
  return decode_model(read_file(path));
}

std::vector<char> encode_full_pinn(const FullPinn& network) {
  Writer w;
  json meta;
  meta["version"] = kVersion;
  meta["kind"] = "full_pinn";
  meta["network"] = network_meta(network);
  add_network_arrays(w, "network", network);
  return w.finish(std::move(meta));
}

FullPinn decode_full_pinn(const std::vector<char>& bytes) {
  const Reader r = read_container(bytes, "full_pinn");
  try {
    return network_from(r, "network", r.meta.at("network"));
  } catch (const json::exception&) {
    throw Error("corrupt archive");
  }
}

void save_full_pinn(const FullPinn& network, const std::string& path) {
  write_file(path, encode_full_pinn(network));
}

FullPinn load_full_pinn(const std::string& path) {
  return decode_full_pinn(read_file(path));
}

}  // namespace gptpinn
