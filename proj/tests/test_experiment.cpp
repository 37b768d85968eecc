#include "support.hpp"

#include "crda/error.hpp"
#include "crda/experiment.hpp"

#include <doctest.h>

#include <sstream>

using namespace crda;

namespace {

BenchConfig small_config() {
  BenchConfig c;
  c.setup = SetupId::I;
  c.scale = 0.2;
  c.trials = 3;
  c.seed = 5;
  c.soft_deltas = 5;
  return c;
}

std::string table_of(const std::vector<TrialResult>& results) {
  std::ostringstream out;
  const auto rows = aggregate(results);
  write_table_csv(rows, out);
  write_table_markdown(rows, out);
  return out.str();
}

} // namespace

TEST_CASE("simulation trial covers every method and strategy") {
  const auto c = small_config();
  const auto t = run_simulation_trial(c, 0);
  REQUIRE(t.methods.size() == 7);
  for (const auto& m : t.methods) {
    CHECK(m.eval.n_test == 1000);
    CHECK(m.eval.dr_percent.has_value());
    CHECK(m.eval.te_count >= 0);
    CHECK(m.eval.te_count <= 1000);
  }
  CHECK(t.methods.back().method == kSoftMethod);
  CHECK(t.methods[0].strategy == "cv");
  CHECK(t.methods[1].strategy == "lw");
}

TEST_CASE("bench results do not depend on the worker count") {
  auto c = small_config();
  c.workers = 1;
  const auto serial = run_bench(c, nullptr);
  c.workers = 3;
  std::vector<int> order;
  const auto parallel = run_bench(c, nullptr, [&](const TrialResult& t) { order.push_back(t.trial); });
  CHECK(table_of(serial) == table_of(parallel));
  CHECK(order == std::vector<int>{0, 1, 2});
}

TEST_CASE("trial rows round-trip and resume reproduces the table") {
  auto c = small_config();
  const auto full = run_bench(c, nullptr);
  std::ostringstream rows;
  write_trial_header(rows);
  for (const auto& t : full) {
    write_trial_rows(t, rows);
  }
  std::istringstream in(rows.str());
  const auto back = read_trial_rows(in);
  CHECK(table_of(back) == table_of(full));

  std::vector<TrialResult> first{full[0]};
  int fresh = 0;
  const auto resumed = run_bench(c, nullptr, [&](const TrialResult&) { ++fresh; }, first);
  CHECK(fresh == 2);
  CHECK(table_of(resumed) == table_of(full));

  // A torn final line is ignored.
  std::string torn = rows.str();
  torn.resize(torn.size() - 5);
  std::istringstream torn_in(torn);
  const auto partial = read_trial_rows(torn_in);
  REQUIRE(partial.size() == 3);
  CHECK(partial.back().methods.size() == 6);
}

TEST_CASE("aggregated table layout") {
  auto c = small_config();
  c.trials = 2;
  const auto rows = aggregate(run_bench(c, nullptr));
  const auto* linf = find_row(rows, "CRDA-linf", "cv");
  REQUIRE(linf != nullptr);
  CHECK(linf->trials == 2);
  CHECK(linf->dr.has_value());
  CHECK(find_row(rows, "CRDA-l1", "lw") != nullptr);
  CHECK(find_row(rows, "SCRDA-soft", "lw") == nullptr);
  std::ostringstream md;
  write_table_markdown(rows, md);
  const auto text = md.str();
  CHECK(text.find("| Method | TE | NFS | DR | FP |") != std::string::npos);
  CHECK(text.find("CRDA-l2") != std::string::npos);
  CHECK(text.find("SCRDA-soft") != std::string::npos);
}

TEST_CASE("real-data trials use stratified random splits") {
  Rng rng(81);
  const auto data = test::shifted_groups(3, 20, 60, 6, 1.5, rng);
  BenchConfig c;
  c.trials = 2;
  c.seed = 9;
  c.soft_deltas = 5;
  const auto t0 = run_data_trial(data, c, 0);
  REQUIRE(t0.methods.size() == 7);
  for (const auto& m : t0.methods) {
    CHECK(m.eval.n_test == 15);
    CHECK_FALSE(m.eval.dr_percent.has_value());
  }
  const auto again = run_data_trial(data, c, 0);
  CHECK(again.methods[0].eval.te_count == t0.methods[0].eval.te_count);
  CHECK(again.methods[0].alpha == t0.methods[0].alpha);
  const auto rows = aggregate(run_bench(c, &data));
  CHECK_FALSE(rows.front().dr.has_value());
}

TEST_CASE("bench configuration errors") {
  BenchConfig c;
  CHECK_THROWS_AS(run_simulation_trial(c, 0), InvalidArgument);
  c.setup = SetupId::III;
  CHECK(c.resolved_folds() == 10);
  c.setup = SetupId::II;
  CHECK(c.resolved_folds() == 5);
}
