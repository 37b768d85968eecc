// crda: command-line front end for simulation, cross-validation, training,
// prediction and Monte Carlo benchmarking.

#include "crda/classifier.hpp"
#include "crda/dataset.hpp"
#include "crda/error.hpp"
#include "crda/experiment.hpp"
#include "crda/model_io.hpp"
#include "crda/model_selection.hpp"
#include "crda/random.hpp"
#include "crda/simgen.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct DataInput {
  std::string path;
  std::string label_column = "class";
  bool transpose = false;
  std::string label_file;

  crda::CsvOptions options() const {
    crda::CsvOptions o;
    o.label_column = label_column;
    o.transpose = transpose;
    o.label_file = label_file;
    return o;
  }
};

void add_data_flags(CLI::App* cmd, DataInput& in, const std::string& flag,
                    const std::string& what) {
  cmd->add_option(flag, in.path, what)->required();
  cmd->add_option("--label-column", in.label_column, "name of the label column");
  cmd->add_flag("--transpose", in.transpose, "matrix file holds features as rows");
  cmd->add_option("--labels", in.label_file, "one-column label file (with --transpose)");
}

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw crda::InvalidArgument(what + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

crda::Index parse_index(const std::string& text, const std::string& what) {
  long long value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw crda::InvalidArgument(what + ": cannot parse '" + text + "' as an integer");
  }
  return static_cast<crda::Index>(value);
}

std::vector<crda::RowNorm> parse_norms(const std::vector<std::string>& items) {
  std::vector<crda::RowNorm> out;
  for (const auto& item : items) {
    out.push_back(crda::parse_row_norm(item));
  }
  if (out.empty()) {
    throw crda::InvalidArgument("--q needs at least one row norm");
  }
  return out;
}

// "sample" (proportions), "equal", or a comma-separated list.
std::optional<crda::Vector> parse_priors(const std::string& text, int groups) {
  if (text == "sample") {
    return std::nullopt;
  }
  if (text == "equal") {
    return crda::equal_priors(groups);
  }
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    values.push_back(parse_double(item, "--priors"));
  }
  return Eigen::Map<const crda::Vector>(values.data(), static_cast<crda::Index>(values.size()));
}

int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw crda::DataError("cannot write '" + path.string() + "'");
  }
  return out;
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw crda::DataError("cannot create output directory '" + dir.string() + "': " +
                          ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Every key=value line except those naming `skip` options.
std::string strip_keys(const std::string& text, const std::vector<std::string>& skip) {
  std::stringstream in(text);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    bool drop = false;
    for (const auto& key : skip) {
      if (line.rfind(key + "=", 0) == 0) {
        drop = true;
      }
    }
    if (!drop) {
      out += line + '\n';
    }
  }
  return out;
}

const char* kConfigEcho = "config.ini";

// Section for the invoked subcommand with every option resolved, so that
// `crda --config <dir>/config.ini` replays the run.
std::string config_echo(const CLI::App& app) {
  for (const auto* sub : app.get_subcommands()) {
    return "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false);
  }
  return {};
}

void write_echo(const CLI::App& app, const fs::path& dir) {
  auto out = open_output(dir / kConfigEcho);
  out << config_echo(app);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string setup;
  double scale = 1.0;
  std::uint64_t seed = 1;
  int trial = 0;
  bool multinomial = false;
  std::string out;
};

void run_simulate(const SimulateArgs& a, const CLI::App& app) {
  auto spec = crda::setup_spec(crda::parse_setup(a.setup), a.scale);
  spec.multinomial = a.multinomial;
  // Same stream as trial `trial` of `bench --seed seed`.
  const auto data =
      crda::generate(spec, crda::derive_seed(a.seed, static_cast<std::uint64_t>(a.trial)));
  const fs::path dir(a.out);
  prepare_dir(dir);
  crda::save_csv(data.train, dir / "train.csv");
  if (data.validation) {
    crda::save_csv(*data.validation, dir / "validation.csv");
  }
  crda::save_csv(data.test, dir / "test.csv");
  auto truth = open_output(dir / "truth.txt");
  truth << "feature\n";
  for (crda::Index i : data.truth) {
    truth << i + 1 << '\n';
  }
  write_echo(app, dir);
  std::cout << "setup " << crda::to_string(spec.id) << ": p=" << spec.p
            << " train=" << data.train.n()
            << " validation=" << (data.validation ? data.validation->n() : 0)
            << " test=" << data.test.n() << " -> " << dir.string() << '\n';
}

// ---------------------------------------------------------------------- cv

struct CvArgs {
  DataInput train;
  std::string validation;
  std::string alpha = "cv";
  std::string k = "cv";
  std::string q = "inf";
  int folds = 5;
  std::uint64_t seed = 1;
  bool soft = false;
  int deltas = 25;
  std::string priors = "sample";
  double eps_floor = crda::kDefaultThresholdFraction;
  double rank_tol = crda::kDefaultRankTol;
  std::string out;
};

crda::SearchOptions search_options(const CvArgs& a, int groups) {
  crda::SearchOptions o;
  o.priors = parse_priors(a.priors, groups);
  o.rank_tol = a.rank_tol;
  o.threshold_fraction = a.eps_floor;
  return o;
}

crda::CvReport run_search(const CvArgs& a, const crda::LabeledDataset& ds) {
  const auto options = search_options(a, ds.groups());
  if (!a.soft && a.k != "cv") {
    throw crda::InvalidArgument("--k must be 'cv' for cross-validation");
  }
  std::optional<crda::CvWorkspace> ws;
  if (!a.validation.empty()) {
    auto opts = a.train.options();
    opts.label_file.clear();
    opts.transpose = false;
    const auto validation = crda::load_csv(a.validation, opts);
    ws.emplace(crda::CvWorkspace::holdout(ds, validation, options));
  } else {
    ws.emplace(ds, crda::make_folds(ds.labels(), ds.groups(), a.folds, a.seed), options);
  }

  crda::CvReport report;
  if (a.soft) {
    report = ws->search_soft(crda::default_alphas(), a.deltas);
  } else {
    const auto q = crda::parse_row_norm(a.q);
    crda::Grid grid = crda::default_grids(ds.p());
    if (a.alpha == "lw") {
      grid.alphas = {ws->lw_alpha()};
    } else if (a.alpha != "cv") {
      grid.alphas = {parse_double(a.alpha, "--alpha")};
    }
    report = ws->search_hard(grid, q);
  }
  report.seed = a.seed;
  return report;
}

void write_cv_outputs(const crda::CvReport& report, const fs::path& dir) {
  auto grid = open_output(dir / "cv_grid.csv");
  crda::write_cv_grid_csv(report, grid);
  auto summary = open_output(dir / "cv_summary.txt");
  crda::write_cv_summary(report, summary);
}

void run_cv(const CvArgs& a, const CLI::App& app) {
  const auto ds = crda::load_csv(a.train.path, a.train.options());
  const auto report = run_search(a, ds);
  const fs::path dir(a.out);
  prepare_dir(dir);
  write_cv_outputs(report, dir);
  write_echo(app, dir);
  crda::write_cv_summary(report, std::cout);
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  CvArgs cv;
  double delta = -1.0;
};

void run_train(const TrainArgs& a, const CLI::App& app) {
  const auto ds = crda::load_csv(a.cv.train.path, a.cv.train.options());
  const auto options = search_options(a.cv, ds.groups());
  const fs::path dir(a.cv.out);
  prepare_dir(dir);

  crda::TrainedModel model;
  if (a.cv.soft) {
    const bool needs_search = a.cv.alpha == "cv" || a.delta < 0.0;
    crda::SoftTrainOptions so;
    so.priors = options.priors;
    so.rank_tol = a.cv.rank_tol;
    so.target = crda::ShrinkageTarget::Identity;
    if (needs_search) {
      const auto report = run_search(a.cv, ds);
      write_cv_outputs(report, dir);
      so.alpha = report.alpha();
      so.delta = report.delta();
    } else {
      so.alpha = parse_double(a.cv.alpha, "--alpha");
      so.delta = a.delta;
    }
    model = crda::train_soft(ds, so);
  } else {
    crda::TrainOptions to;
    to.q = crda::parse_row_norm(a.cv.q);
    to.priors = options.priors;
    to.rank_tol = a.cv.rank_tol;
    if (a.cv.k == "cv") {
      const auto report = run_search(a.cv, ds);
      write_cv_outputs(report, dir);
      to.alpha = report.alpha();
      to.k = report.k();
    } else {
      to.k = parse_index(a.cv.k, "--k");
      if (a.cv.alpha == "cv") {
        throw crda::InvalidArgument("--alpha cv needs --k cv");
      }
      to.alpha = a.cv.alpha == "lw"
                     ? crda::estimate_alpha_lw(crda::center_by_class(ds, crda::class_means(ds)))
                     : parse_double(a.cv.alpha, "--alpha");
    }
    model = crda::train(ds, to);
  }

  crda::save_model(model, dir / "model.json");
  auto features = open_output(dir / "selected_features.txt");
  features << "feature\n";
  for (const auto& name : crda::selected_feature_names(model)) {
    features << name << '\n';
  }
  write_echo(app, dir);
  std::cout << "alpha=" << crda::format_real(model.hyper.alpha);
  if (model.hyper.kind == crda::SparsityKind::Hard) {
    std::cout << " K=" << model.hyper.k;
  } else {
    std::cout << " delta=" << crda::format_real(model.hyper.delta);
  }
  std::cout << " nfs=" << model.coef.support.size() << " -> " << (dir / "model.json").string()
            << '\n';
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
  std::string model;
  DataInput data;
  bool discriminants = false;
  std::string out;
};

void run_predict(const PredictArgs& a, const CLI::App& app) {
  const auto model = crda::load_model(a.model);
  const auto table = crda::load_features(a.data.path, a.data.options());
  const auto labels = crda::predict_labels(model, table.X);
  const fs::path dir(a.out);
  prepare_dir(dir);

  auto out = open_output(dir / "predictions.csv");
  out << "row,predicted" << (table.labels ? ",actual" : "") << '\n';
  crda::Index errors = 0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out << r + 1 << ',' << labels[r];
    if (table.labels) {
      out << ',' << (*table.labels)[r];
      errors += labels[r] != (*table.labels)[r] ? 1 : 0;
    }
    out << '\n';
  }
  if (a.discriminants) {
    const auto d = crda::discriminants(model, table.X);
    auto dout = open_output(dir / "discriminants.csv");
    dout << "row";
    for (const auto& g : model.group_names) {
      dout << ',' << g;
    }
    dout << '\n';
    for (crda::Index r = 0; r < d.rows(); ++r) {
      dout << r + 1;
      for (crda::Index g = 0; g < d.cols(); ++g) {
        dout << ',' << crda::format_real(d(r, g));
      }
      dout << '\n';
    }
  }
  write_echo(app, dir);
  std::cout << labels.size() << " predictions -> " << (dir / "predictions.csv").string() << '\n';
  if (table.labels) {
    std::cout << "test error " << errors << " / " << labels.size() << '\n';
  }
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  std::string setup;
  std::string data;
  std::string label_column = "class";
  double scale = 1.0;
  int trials = 25;
  int folds = 0;
  std::uint64_t seed = 1;
  std::vector<std::string> q{"1", "2", "inf"};
  std::string tuning = "cv";
  bool no_light = false;
  bool no_soft = false;
  int deltas = 25;
  int workers = 0;
  double train_fraction = 0.75;
  bool multinomial = false;
  double eps_floor = crda::kDefaultThresholdFraction;
  bool resume = false;
  std::string out;
};

void run_bench_cmd(const BenchArgs& a, const CLI::App& app) {
  if (a.setup.empty() == a.data.empty()) {
    throw crda::InvalidArgument("bench needs exactly one of --setup or --data");
  }
  crda::BenchConfig config;
  if (!a.setup.empty()) {
    config.setup = crda::parse_setup(a.setup);
  }
  config.scale = a.scale;
  config.trials = a.trials;
  config.folds = a.folds;
  config.seed = a.seed;
  config.norms = parse_norms(a.q);
  if (a.tuning == "cv") {
    config.tuning = crda::Tuning::CrossValidation;
  } else if (a.tuning == "holdout") {
    config.tuning = crda::Tuning::Holdout;
  } else {
    throw crda::InvalidArgument("--tuning must be cv or holdout");
  }
  config.light = !a.no_light;
  config.soft = !a.no_soft;
  config.soft_deltas = a.deltas;
  config.workers = a.workers > 0 ? a.workers : default_workers();
  config.train_fraction = a.train_fraction;
  config.multinomial = a.multinomial;
  config.threshold_fraction = a.eps_floor;
  if (config.trials < 1) {
    throw crda::InvalidArgument("--trials must be positive");
  }

  std::optional<crda::LabeledDataset> data;
  if (!a.data.empty()) {
    crda::CsvOptions opts;
    opts.label_column = a.label_column;
    data = crda::load_csv(a.data, opts);
  }

  const fs::path dir(a.out);
  prepare_dir(dir);
  const fs::path trials_path = dir / "trials.csv";
  const std::vector<std::string> volatile_keys{"resume", "workers"};
  const std::string echo = config_echo(app);

  std::vector<crda::TrialResult> completed;
  if (a.resume && fs::exists(trials_path)) {
    if (!fs::exists(dir / kConfigEcho) ||
        strip_keys(read_file(dir / kConfigEcho), volatile_keys) !=
            strip_keys(echo, volatile_keys)) {
      throw crda::InvalidArgument("--resume: configuration differs from " +
                                  (dir / kConfigEcho).string());
    }
    std::ifstream in(trials_path);
    // A trial interrupted mid-write has fewer rows than methods; rerun it.
    const std::size_t methods = config.norms.size() * (config.light ? 2 : 1) + (config.soft ? 1 : 0);
    for (auto& t : crda::read_trial_rows(in)) {
      if (t.methods.size() == methods && t.trial < config.trials) {
        completed.push_back(std::move(t));
      }
    }
    std::cout << "resuming with " << completed.size() << " completed trial(s)\n";
  }
  {
    auto out = open_output(dir / kConfigEcho);
    out << echo;
  }

  std::ofstream trials_out;
  if (completed.empty()) {
    trials_out = open_output(trials_path);
    crda::write_trial_header(trials_out);
  } else {
    // Rewrite the file so a torn last row from an interrupted run is dropped.
    trials_out = open_output(trials_path);
    crda::write_trial_header(trials_out);
    for (const auto& t : completed) {
      crda::write_trial_rows(t, trials_out);
    }
  }
  trials_out.flush();

  const auto results = crda::run_bench(
      config, data ? &*data : nullptr,
      [&](const crda::TrialResult& t) {
        crda::write_trial_rows(t, trials_out);
        trials_out.flush();
        std::cerr << "trial " << t.trial + 1 << "/" << config.trials << " done\n";
      },
      completed);

  const auto rows = crda::aggregate(results);
  {
    auto csv = open_output(dir / "results.csv");
    crda::write_table_csv(rows, csv);
    auto md = open_output(dir / "results.md");
    crda::write_table_markdown(rows, md);
  }
  crda::write_table_markdown(rows, std::cout);
}

int fail(int code, const std::string& message) {
  std::cerr << "crda: " << message << '\n';
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive regularized discriminant analysis"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "replay options from a config.ini echo");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a simulation setup as CSV files");
  simulate->add_option("--setup", sim.setup, "I, II or III")->required();
  simulate->add_option("--scale", sim.scale, "scale factor on p (setup III: block count)");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--trial", sim.trial, "trial index within the master seed");
  simulate->add_flag("--multinomial", sim.multinomial, "multinomial group counts");
  simulate->add_option("--out", sim.out, "output directory")->required();

  auto add_search_flags = [](CLI::App* cmd, CvArgs& a) {
    add_data_flags(cmd, a.train, "--train", "training CSV");
    cmd->add_option("--validation", a.validation, "score on this CSV instead of CV folds");
    cmd->add_option("--alpha", a.alpha, "cv, lw, or a fixed value in [0, 1)");
    cmd->add_option("--k", a.k, "cv or a fixed K");
    cmd->add_option("--q", a.q, "row norm: 1, 2 or inf");
    cmd->add_option("--folds", a.folds, "number of CV folds");
    cmd->add_option("--seed", a.seed, "fold assignment seed");
    cmd->add_flag("--soft", a.soft, "soft-threshold baseline instead of hard thresholding");
    cmd->add_option("--deltas", a.deltas, "soft-threshold grid size");
    cmd->add_option("--priors", a.priors, "sample, equal, or comma-separated values");
    cmd->add_option("--eps-floor", a.eps_floor,
                    "floor of the CV error threshold as a fraction of n");
    cmd->add_option("--rank-tol", a.rank_tol, "relative singular value cutoff");
    cmd->add_option("--out", a.out, "output directory")->required();
  };

  CvArgs cv_args;
  auto* cv = app.add_subcommand("cv", "cross-validate the (alpha, K) grid");
  add_search_flags(cv, cv_args);

  TrainArgs train_args;
  train_args.cv.alpha = "lw";
  train_args.cv.k = "cv";
  auto* train = app.add_subcommand("train", "fit a model and save it");
  add_search_flags(train, train_args.cv);
  train->add_option("--delta", train_args.delta, "fixed soft threshold (with --soft)");

  PredictArgs pred;
  auto* predict = app.add_subcommand("predict", "classify samples with a saved model");
  predict->add_option("--model", pred.model, "model file")->required();
  add_data_flags(predict, pred.data, "--data", "CSV of samples");
  predict->add_flag("--discriminants", pred.discriminants, "also write discriminant values");
  predict->add_option("--out", pred.out, "output directory")->required();

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Monte Carlo benchmark over simulated or real data");
  bench->add_option("--setup", bench_args.setup, "I, II or III");
  bench->add_option("--data", bench_args.data, "labeled CSV for random 75/25 splits");
  bench->add_option("--label-column", bench_args.label_column, "label column of --data");
  bench->add_option("--scale", bench_args.scale, "scale factor on p (setup III: block count)");
  bench->add_option("--trials", bench_args.trials, "Monte Carlo trials");
  bench->add_option("--folds", bench_args.folds, "CV folds (0: 5, or 10 for setup III)");
  bench->add_option("--seed", bench_args.seed, "master seed");
  bench->add_option("--q", bench_args.q, "row norms")->delimiter(',');
  bench->add_option("--tuning", bench_args.tuning, "cv or holdout");
  bench->add_flag("--no-light", bench_args.no_light, "skip the closed-form alpha strategy");
  bench->add_flag("--no-soft", bench_args.no_soft, "skip the soft-threshold baseline");
  bench->add_option("--deltas", bench_args.deltas, "soft-threshold grid size");
  bench->add_option("--workers", bench_args.workers, "worker threads (0: all cores)")
      ->envname("CRDA_WORKERS");
  bench->add_option("--train-fraction", bench_args.train_fraction,
                    "training share of --data splits");
  bench->add_flag("--multinomial", bench_args.multinomial, "multinomial group counts");
  bench->add_option("--eps-floor", bench_args.eps_floor,
                    "floor of the CV error threshold as a fraction of n");
  bench->add_flag("--resume", bench_args.resume, "continue from trials.csv in --out");
  bench->add_option("--out", bench_args.out, "output directory")->required();

  for (auto* sub : {simulate, cv, train, predict, bench}) {
    sub->configurable();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) {
      run_simulate(sim, app);
    } else if (*cv) {
      run_cv(cv_args, app);
    } else if (*train) {
      run_train(train_args, app);
    } else if (*predict) {
      run_predict(pred, app);
    } else if (*bench) {
      run_bench_cmd(bench_args, app);
    }
  } catch (const crda::InvalidArgument& e) {
    return fail(kExitUsage, e.what());
  } catch (const crda::DataError& e) {
    return fail(kExitData, e.what());
  } catch (const crda::NumericError& e) {
    return fail(kExitNumeric, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(kExitData, e.what());
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
  return 0;
}
