#pragma once

#include <string>
#include <vector>

#include "gptpinn/evalbench.hpp"
#include "gptpinn/gpt.hpp"
#include "gptpinn/pde.hpp"

namespace gptpinn {

/// Column names of the parameter components, e.g. {"alpha","beta","gamma"}.
std::vector<std::string> parameter_names(PdeFamily family);

/// Shortest text that reads back to the same double ("nan", "inf", "-inf"
/// for the special values).
std::string format_number(double v);

struct OnlineRow {
  ParameterPoint mu;
  double delta = 0.0;
  long epochs = 0;
  double t_online = 0.0;
};

// Header rows, fixed:
//   loss_history.csv           epoch,loss
//   online_results.csv         <mu...>,delta,epochs,t_online_s
//   chosen_params.csv          round,<mu...>,max_indicator,t_full_train_s,t_scan_s
//   indicator_scan_round_<n>   <mu...>,delta
//   test_errors.csv            <mu...>,rel_l2,max_abs,delta,t_online_s
//   timing.csv                 q,full_cum_s,gpt_cum_s
//   svd.csv                    k,sigma_ratio,label
//   coefficients.csv           index,c
//   prediction.csv             x,t,u
void write_loss_history(const std::string& path,
                        const std::vector<double>& history);
void write_online_results(const std::string& path, PdeFamily family,
                          const std::vector<OnlineRow>& rows);
void write_chosen_params(const std::string& path, const GptModel& model);
/// One indicator_scan_round_<n>.csv per scanned round; returns the paths.
std::vector<std::string> write_indicator_scans(const std::string& dir,
                                               const GptModel& model);
void write_test_errors(const std::string& path, PdeFamily family,
                       const ErrorReport& report);
void write_timing(const std::string& path, const TimingCurve& curve);
void write_svd(const std::string& path, const SvdExperiment& experiment);
void write_coefficients(const std::string& path, const Vector& c);
void write_prediction(const std::string& path, const PointBatch& points,
                      const Vector& u);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws naming the column if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
};

/// Reads a CSV file written by the functions above. Fails on an empty file
/// or when any of `required` is not in the header, naming file and column.
CsvTable read_csv(const std::string& path,
                  const std::vector<std::string>& required = {});

}  // namespace gptpinn
