#include "gptpinn/csv.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gptpinn/error.hpp"

namespace gptpinn {

namespace {

class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header)
      : path_(path), out_(path) {
    if (!out_) throw Error("cannot write '" + path + "'");
    row(header);
  }
  ~Writer() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) {
      throw Error("write failed: '" + path_ + "'");
    }
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::string path_;
  std::ofstream out_;
};

std::vector<std::string> with_mu(PdeFamily family,
                                 std::initializer_list<std::string> tail) {
  auto h = parameter_names(family);
  h.insert(h.end(), tail);
  return h;
}

void push_mu(std::vector<std::string>& cells, const ParameterPoint& mu) {
  for (double v : mu.values) cells.push_back(format_number(v));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<std::string> parameter_names(PdeFamily family) {
  switch (family) {
    case PdeFamily::kKleinGordon:
      return {"alpha", "beta", "gamma"};
    case PdeFamily::kBurgers:
      return {"nu"};
    case PdeFamily::kAllenCahn:
      return {"lambda", "epsilon"};
  }
  return {};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_loss_history(const std::string& path,
                        const std::vector<double>& history) {
  Writer w(path, {"epoch", "loss"});
  for (std::size_t i = 0; i < history.size(); ++i) {
    w.row({std::to_string(i), format_number(history[i])});
  }
}

void write_online_results(const std::string& path, PdeFamily family,
                          const std::vector<OnlineRow>& rows) {
  Writer w(path, with_mu(family, {"delta", "epochs", "t_online_s"}));
  for (const auto& r : rows) {
    std::vector<std::string> cells;
    push_mu(cells, r.mu);
    cells.push_back(format_number(r.delta));
    cells.push_back(std::to_string(r.epochs));
    cells.push_back(format_number(r.t_online));
    w.row(cells);
  }
}

void write_chosen_params(const std::string& path, const GptModel& model) {
  auto header = with_mu(model.pde().family(),
                        {"max_indicator", "t_full_train_s", "t_scan_s"});
  header.insert(header.begin(), "round");
  Writer w(path, header);
  for (std::size_t n = 0; n < model.history.size(); ++n) {
    const GreedyRound& r = model.history[n];
    std::vector<std::string> cells{std::to_string(n + 1)};
    push_mu(cells, r.mu);
    cells.push_back(r.scanned ? format_number(r.max_indicator) : "nan");
    cells.push_back(format_number(r.t_full_train));
    cells.push_back(format_number(r.t_scan));
    w.row(cells);
  }
}

std::vector<std::string> write_indicator_scans(const std::string& dir,
                                               const GptModel& model) {
  std::vector<std::string> paths;
  for (std::size_t n = 0; n < model.history.size(); ++n) {
    const GreedyRound& r = model.history[n];
    if (!r.scanned) continue;
    if (r.scan.size() != model.xi.size()) {
      throw Error("scan table does not match the training set");
    }
    const std::string path = (std::filesystem::path(dir) /
                              ("indicator_scan_round_" + std::to_string(n + 1) + ".csv"))
                                 .string();
    Writer w(path, with_mu(model.pde().family(), {"delta"}));
    for (std::size_t i = 0; i < r.scan.size(); ++i) {
      std::vector<std::string> cells;
      push_mu(cells, model.xi[i]);
      cells.push_back(format_number(r.scan[i]));
      w.row(cells);
    }
    paths.push_back(path);
  }
  return paths;
}

void write_test_errors(const std::string& path, PdeFamily family,
                       const ErrorReport& report) {
  Writer w(path, with_mu(family, {"rel_l2", "max_abs", "delta", "t_online_s"}));
  for (const auto& r : report.records) {
    std::vector<std::string> cells;
    push_mu(cells, r.mu);
    cells.push_back(format_number(r.rel_l2));
    cells.push_back(format_number(r.max_abs));
    cells.push_back(format_number(r.delta));
    cells.push_back(format_number(r.t_online));
    w.row(cells);
  }
}

void write_timing(const std::string& path, const TimingCurve& curve) {
  if (curve.full_cum.size() != curve.gpt_cum.size()) {
    throw Error("timing curves differ in length");
  }
  Writer w(path, {"q", "full_cum_s", "gpt_cum_s"});
  for (std::size_t q = 0; q < curve.full_cum.size(); ++q) {
    w.row({std::to_string(q), format_number(curve.full_cum[q]),
           format_number(curve.gpt_cum[q])});
  }
}

void write_svd(const std::string& path, const SvdExperiment& experiment) {
  Writer w(path, {"k", "sigma_ratio", "label"});
  for (std::size_t k = 0; k < experiment.solution.size(); ++k) {
    w.row({std::to_string(k + 1), format_number(experiment.solution[k]), "solution"});
  }
  for (std::size_t k = 0; k < experiment.theta.size(); ++k) {
    w.row({std::to_string(k + 1), format_number(experiment.theta[k]), "theta"});
  }
}

void write_coefficients(const std::string& path, const Vector& c) {
  Writer w(path, {"index", "c"});
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    w.row({std::to_string(i + 1), format_number(c(i))});
  }
}

void write_prediction(const std::string& path, const PointBatch& points,
                      const Vector& u) {
  if (u.size() != points.size()) throw Error("prediction does not match the grid");
  Writer w(path, {"x", "t", "u"});
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    w.row({format_number(points.x(i)), format_number(points.t(i)),
           format_number(u(i))});
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error("missing column '" + name + "'");
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t col = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string& cell = r.at(col);
    if (cell == "nan") {
      out.push_back(std::nan(""));
    } else if (cell == "inf" || cell == "-inf") {
      out.push_back(cell[0] == '-' ? -INFINITY : INFINITY);
    } else {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw Error("bad number '" + cell + "' in column '" + name + "'");
      }
      out.push_back(v);
    }
  }
  return out;
}

CsvTable read_csv(const std::string& path,
                  const std::vector<std::string>& required) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw Error(path + ": empty CSV");
  }
  table.header = split(line);
  for (const auto& name : required) {
    bool found = false;
    for (const auto& h : table.header) found = found || h == name;
    if (!found) throw Error(path + ": missing column '" + name + "'");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw Error(path + ": row " + std::to_string(table.rows.size() + 1) +
                  " has " + std::to_string(cells.size()) + " cells, expected " +
                  std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

}  // namespace gptpinn
