#pragma once

#include "crda/classifier.hpp"
#include "crda/metrics.hpp"
#include "crda/simgen.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace crda {

enum class Tuning {
  CrossValidation,  ///< Q-fold CV on the training split
  Holdout,          ///< score on the validation split (setups I/II)
};

/// Monte Carlo benchmark protocol: generate (or split) -> select -> train
/// -> evaluate, for CRDA with each row norm under the CV and closed-form
/// alpha strategies, and for the soft-threshold baseline.
struct BenchConfig {
  std::optional<SetupId> setup;
  double scale = 1.0;
  int trials = 1;
  /// 0 selects the protocol default: 5 (setups I/II, real data), 10 (III).
  int folds = 0;
  std::uint64_t seed = 1;
  std::vector<RowNorm> norms{RowNorm::L1, RowNorm::L2, RowNorm::Linf};
  Tuning tuning = Tuning::CrossValidation;
  bool light = true;
  bool soft = true;
  int soft_deltas = 25;
  int workers = 1;
  /// Real-data mode: fraction of samples drawn into the training split.
  double train_fraction = 0.75;
  bool multinomial = false;
  double threshold_fraction = 0.15;

  int resolved_folds() const;
};

struct MethodResult {
  std::string method;    // CRDA-l1, CRDA-l2, CRDA-linf, SCRDA-soft
  std::string strategy;  // cv or lw
  double alpha = 0.0;
  double sparsity = 0.0; // K or delta
  EvalResult eval;
};

struct TrialResult {
  int trial = 0;
  std::vector<MethodResult> methods;
};

std::string method_name(RowNorm q);
inline constexpr const char* kSoftMethod = "SCRDA-soft";

TrialResult run_simulation_trial(const BenchConfig& config, int trial);

/// Random stratified split of `data` into train/test by
/// config.train_fraction, then the same per-method loop without DR/FP.
TrialResult run_data_trial(const LabeledDataset& data, const BenchConfig& config, int trial);

/// Runs the trials not already present in `completed` on config.workers
/// threads. `on_trial` sees results in increasing trial order.
std::vector<TrialResult> run_bench(const BenchConfig& config, const LabeledDataset* data,
                                   const std::function<void(const TrialResult&)>& on_trial = {},
                                   std::vector<TrialResult> completed = {});

struct TableRow {
  std::string method;
  std::string strategy;
  int trials = 0;
  MeanSd te;
  MeanSd nfs;
  std::optional<MeanSd> dr;
  std::optional<MeanSd> fp;
};

std::vector<TableRow> aggregate(const std::vector<TrialResult>& trials);

const TableRow* find_row(const std::vector<TableRow>& rows, const std::string& method,
                         const std::string& strategy);

void write_table_csv(const std::vector<TableRow>& rows, std::ostream& out);
/// Results layout: one line per method, "cv (lw)" pairs in each cell.
void write_table_markdown(const std::vector<TableRow>& rows, std::ostream& out);

void write_trial_header(std::ostream& out);
void write_trial_rows(const TrialResult& trial, std::ostream& out);
/// Parses rows written by write_trial_rows, grouped by trial. An
/// unterminated last line is ignored.
std::vector<TrialResult> read_trial_rows(std::istream& in);

} // namespace crda
