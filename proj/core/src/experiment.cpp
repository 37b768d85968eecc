#include "crda/experiment.hpp"

#include "crda/error.hpp"
#include "crda/model_selection.hpp"
#include "crda/random.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace crda {

int BenchConfig::resolved_folds() const {
  if (folds > 0) {
    return folds;
  }
  return setup == SetupId::III ? 10 : 5;
}

std::string method_name(RowNorm q) {
  switch (q) {
  case RowNorm::L1:
    return "CRDA-l1";
  case RowNorm::L2:
    return "CRDA-l2";
  case RowNorm::Linf:
    return "CRDA-linf";
  }
  return "CRDA";
}

namespace {

struct Splits {
  const LabeledDataset& train;
  const LabeledDataset* validation;
  const LabeledDataset& test;
  std::optional<std::span<const Index>> truth;
};

TrialResult run_methods(const Splits& s, const BenchConfig& config, int trial,
                        std::uint64_t trial_seed) {
  SearchOptions options;
  // Simulated groups are equiprobable; real data keeps sample proportions.
  if (s.truth) {
    options.priors = equal_priors(s.train.groups());
  }
  options.threshold_fraction = config.threshold_fraction;

  const bool holdout = config.tuning == Tuning::Holdout && s.validation != nullptr;
  const CvWorkspace ws =
      holdout ? CvWorkspace::holdout(s.train, *s.validation, options)
              : CvWorkspace(s.train,
                            make_folds(s.train.labels(), s.train.groups(),
                                       config.resolved_folds(), derive_seed(trial_seed, 1)),
                            options);
  const Grid grid = default_grids(s.train.p());

  TrialResult result;
  result.trial = trial;
  auto deploy_hard = [&](const CvReport& report, RowNorm q, const std::string& strategy) {
    TrainOptions to;
    to.alpha = report.alpha();
    to.k = report.k();
    to.q = q;
    to.priors = options.priors;
    const auto model = train(s.train, to);
    result.methods.push_back({method_name(q), strategy, to.alpha, static_cast<double>(to.k),
                              evaluate(model, s.test, s.truth)});
  };

  for (RowNorm q : config.norms) {
    deploy_hard(ws.search_hard(grid, q), q, "cv");
    if (config.light) {
      deploy_hard(ws.search_hard(Grid{{ws.lw_alpha()}, grid.ks}, q), q, "lw");
    }
  }
  if (config.soft) {
    const auto report = ws.search_soft(default_alphas(), config.soft_deltas);
    SoftTrainOptions so;
    so.alpha = report.alpha();
    so.delta = report.delta();
    so.target = ShrinkageTarget::Identity;
    so.priors = options.priors;
    const auto model = train_soft(s.train, so);
    result.methods.push_back(
        {kSoftMethod, "cv", so.alpha, so.delta, evaluate(model, s.test, s.truth)});
  }
  return result;
}

// Labeled subset whose group numbering is rebuilt from the rows present.
LabeledDataset relabeled_subset(const LabeledDataset& data, const std::vector<Index>& rows) {
  Matrix X(static_cast<Index>(rows.size()), data.p());
  std::vector<std::string> names;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    X.row(static_cast<Index>(r)) = data.X().row(rows[r]);
    names.push_back(
        data.group_names()[static_cast<std::size_t>(data.labels()[static_cast<std::size_t>(rows[r])])]);
  }
  return LabeledDataset::from_raw_labels(std::move(X), names, data.feature_names());
}

} // namespace

TrialResult run_simulation_trial(const BenchConfig& config, int trial) {
  if (!config.setup) {
    throw InvalidArgument("simulation benchmark needs a setup id");
  }
  auto spec = setup_spec(*config.setup, config.scale);
  spec.multinomial = config.multinomial;
  const auto trial_seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));
  const auto data = generate(spec, trial_seed);
  const Splits splits{data.train, data.validation ? &*data.validation : nullptr, data.test,
                      std::span<const Index>(data.truth)};
  return run_methods(splits, config, trial, trial_seed);
}

TrialResult run_data_trial(const LabeledDataset& data, const BenchConfig& config, int trial) {
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  const auto trial_seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));
  Rng rng(derive_seed(trial_seed, 2));
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(data.groups()));
  for (Index i = 0; i < data.n(); ++i) {
    members[static_cast<std::size_t>(data.labels()[static_cast<std::size_t>(i)])].push_back(i);
  }
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
  for (auto& group : members) {
    std::shuffle(group.begin(), group.end(), rng);
    const auto take = std::clamp<Index>(
        static_cast<Index>(std::llround(config.train_fraction * static_cast<double>(group.size()))),
        1, static_cast<Index>(group.size()));
    train_rows.insert(train_rows.end(), group.begin(), group.begin() + take);
    test_rows.insert(test_rows.end(), group.begin() + take, group.end());
  }
  if (test_rows.empty()) {
    throw DataError("dataset too small for a train/test split");
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  const auto train_set = data.subset(train_rows);
  const auto test_set = relabeled_subset(data, test_rows);
  const Splits splits{train_set, nullptr, test_set, std::nullopt};
  return run_methods(splits, config, trial, trial_seed);
}

std::vector<TrialResult> run_bench(const BenchConfig& config, const LabeledDataset* data,
                                   const std::function<void(const TrialResult&)>& on_trial,
                                   std::vector<TrialResult> completed) {
  if (config.trials < 1) {
    throw InvalidArgument("need at least one trial");
  }
  if (!config.setup && data == nullptr) {
    throw InvalidArgument("benchmark needs a setup id or a dataset");
  }
  const auto T = static_cast<std::size_t>(config.trials);
  std::vector<std::optional<TrialResult>> slots(T);
  std::vector<bool> fresh(T, false);
  for (auto& done : completed) {
    if (done.trial >= 0 && static_cast<std::size_t>(done.trial) < T) {
      slots[static_cast<std::size_t>(done.trial)] = std::move(done);
    }
  }
  std::vector<int> pending;
  for (std::size_t t = 0; t < T; ++t) {
    if (!slots[t]) {
      pending.push_back(static_cast<int>(t));
    }
  }

  std::mutex mutex;
  std::size_t emitted = 0;
  std::size_t next_task = 0;
  std::exception_ptr failure;

  auto publish = [&](int trial, TrialResult result) {
    std::lock_guard lock(mutex);
    slots[static_cast<std::size_t>(trial)] = std::move(result);
    fresh[static_cast<std::size_t>(trial)] = true;
    while (emitted < T && slots[emitted]) {
      if (fresh[emitted] && on_trial) {
        on_trial(*slots[emitted]);
      }
      ++emitted;
    }
  };
  auto worker = [&] {
    while (true) {
      int trial = 0;
      {
        std::lock_guard lock(mutex);
        if (failure || next_task >= pending.size()) {
          return;
        }
        trial = pending[next_task++];
      }
      try {
        auto result = data != nullptr ? run_data_trial(*data, config, trial)
                                      : run_simulation_trial(config, trial);
        publish(trial, std::move(result));
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  const auto workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.workers)), pending.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(worker);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  std::vector<TrialResult> out;
  out.reserve(T);
  for (auto& slot : slots) {
    out.push_back(std::move(*slot));
  }
  return out;
}

std::vector<TableRow> aggregate(const std::vector<TrialResult>& trials) {
  struct Samples {
    std::vector<double> te, nfs, dr, fp;
  };
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, Samples> samples;
  for (const auto& trial : trials) {
    for (const auto& m : trial.methods) {
      const auto key = std::make_pair(m.method, m.strategy);
      auto [it, inserted] = samples.try_emplace(key);
      if (inserted) {
        order.push_back(key);
      }
      it->second.te.push_back(static_cast<double>(m.eval.te_count));
      it->second.nfs.push_back(static_cast<double>(m.eval.nfs));
      if (m.eval.dr_percent && m.eval.fp_percent) {
        it->second.dr.push_back(*m.eval.dr_percent);
        it->second.fp.push_back(*m.eval.fp_percent);
      }
    }
  }
  std::vector<TableRow> rows;
  for (const auto& key : order) {
    const auto& s = samples.at(key);
    TableRow row;
    row.method = key.first;
    row.strategy = key.second;
    row.trials = static_cast<int>(s.te.size());
    row.te = mean_sd(s.te);
    row.nfs = mean_sd(s.nfs);
    if (!s.dr.empty() && s.dr.size() == s.te.size()) {
      row.dr = mean_sd(s.dr);
      row.fp = mean_sd(s.fp);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const TableRow* find_row(const std::vector<TableRow>& rows, const std::string& method,
                         const std::string& strategy) {
  for (const auto& row : rows) {
    if (row.method == method && row.strategy == strategy) {
      return &row;
    }
  }
  return nullptr;
}

namespace {

std::string fixed(double value, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

} // namespace

void write_table_csv(const std::vector<TableRow>& rows, std::ostream& out) {
  out << "method,strategy,trials,te_mean,te_sd,nfs_mean,nfs_sd,dr_mean,dr_sd,fp_mean,fp_sd\n";
  for (const auto& row : rows) {
    out << row.method << ',' << row.strategy << ',' << row.trials << ',' << fixed(row.te.mean, 3)
        << ',' << fixed(row.te.sd, 3) << ',' << fixed(row.nfs.mean, 3) << ','
        << fixed(row.nfs.sd, 3);
    if (row.dr && row.fp) {
      out << ',' << fixed(row.dr->mean, 3) << ',' << fixed(row.dr->sd, 3) << ','
          << fixed(row.fp->mean, 3) << ',' << fixed(row.fp->sd, 3);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

void write_table_markdown(const std::vector<TableRow>& rows, std::ostream& out) {
  const bool detection = std::any_of(rows.begin(), rows.end(),
                                     [](const TableRow& r) { return r.dr.has_value(); });
  std::vector<std::string> methods;
  for (const auto& row : rows) {
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) {
      methods.push_back(row.method);
    }
  }
  out << "| Method | TE | NFS |" << (detection ? " DR | FP |" : "") << '\n';
  out << "|---|---|---|" << (detection ? "---|---|" : "") << '\n';
  for (const auto& method : methods) {
    const auto* cv = find_row(rows, method, "cv");
    const auto* lw = find_row(rows, method, "lw");
    const auto* main = cv != nullptr ? cv : lw;
    auto cell = [&](auto pick) {
      std::string text = fixed(pick(*main));
      if (cv != nullptr && lw != nullptr) {
        text += " (" + fixed(pick(*lw)) + ")";
      }
      return text;
    };
    out << "| " << method << " | " << cell([](const TableRow& r) { return r.te.mean; }) << " | "
        << cell([](const TableRow& r) { return r.nfs.mean; }) << " |";
    if (detection) {
      if (main->dr) {
        out << ' ' << cell([](const TableRow& r) { return r.dr ? r.dr->mean : 0.0; }) << " | "
            << cell([](const TableRow& r) { return r.fp ? r.fp->mean : 0.0; }) << " |";
      } else {
        out << " - | - |";
      }
    }
    out << '\n';
  }
}

void write_trial_header(std::ostream& out) {
  out << "trial,method,strategy,alpha,sparsity,te_count,n_test,nfs,dr,fp\n";
}

void write_trial_rows(const TrialResult& trial, std::ostream& out) {
  for (const auto& m : trial.methods) {
    out << trial.trial << ',' << m.method << ',' << m.strategy << ',' << format_real(m.alpha)
        << ',' << format_real(m.sparsity) << ',' << m.eval.te_count << ',' << m.eval.n_test << ','
        << m.eval.nfs << ',' << (m.eval.dr_percent ? format_real(*m.eval.dr_percent) : "")
        << ',' << (m.eval.fp_percent ? format_real(*m.eval.fp_percent) : "") << '\n';
  }
}

std::vector<TrialResult> read_trial_rows(std::istream& in) {
  std::map<int, TrialResult> trials;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (in.eof()) {
      break;  // no trailing newline: the write was cut short
    }
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
      cells.emplace_back();
    }
    if (cells.size() != 10) {
      throw DataError("trial file line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " fields, expected 10");
    }
    try {
      MethodResult m;
      const int t = std::stoi(cells[0]);
      m.method = cells[1];
      m.strategy = cells[2];
      m.alpha = std::stod(cells[3]);
      m.sparsity = std::stod(cells[4]);
      m.eval.te_count = std::stoll(cells[5]);
      m.eval.n_test = std::stoll(cells[6]);
      m.eval.nfs = std::stoll(cells[7]);
      m.eval.te_rate = m.eval.n_test > 0 ? static_cast<double>(m.eval.te_count) /
                                               static_cast<double>(m.eval.n_test)
                                         : 0.0;
      if (!cells[8].empty()) {
        m.eval.dr_percent = std::stod(cells[8]);
      }
      if (!cells[9].empty()) {
        m.eval.fp_percent = std::stod(cells[9]);
      }
      auto& trial = trials[t];
      trial.trial = t;
      trial.methods.push_back(std::move(m));
    } catch (const std::logic_error&) {
      throw DataError("trial file line " + std::to_string(line_no) + " is malformed");
    }
  }
  std::vector<TrialResult> out;
  for (auto& [t, trial] : trials) {
    out.push_back(std::move(trial));
  }
  return out;
}

} // namespace crda
