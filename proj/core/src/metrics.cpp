#include "crda/metrics.hpp"

#include "crda/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace crda {

TestError test_error(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("prediction and truth lengths differ: " +
                          std::to_string(predicted.size()) + " vs " +
                          std::to_string(truth.size()));
  }
  TestError out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out.count += predicted[i] != truth[i] ? 1 : 0;
  }
  out.rate = truth.empty() ? 0.0
                           : static_cast<double>(out.count) / static_cast<double>(truth.size());
  return out;
}

Index nfs(const TrainedModel& model) {
  return static_cast<Index>(model.coef.support.size());
}

DetectionRates dr_fp(std::span<const Index> selected, std::span<const Index> truth) {
  const std::set<Index> truth_set(truth.begin(), truth.end());
  if (truth_set.empty()) {
    throw InvalidArgument("detection rate needs a non-empty truth set");
  }
  const std::set<Index> chosen(selected.begin(), selected.end());
  const auto hits = static_cast<double>(std::count_if(
      chosen.begin(), chosen.end(), [&](Index i) { return truth_set.count(i) > 0; }));
  DetectionRates out;
  out.dr_percent = 100.0 * hits / static_cast<double>(truth_set.size());
  out.fp_percent =
      chosen.empty() ? 0.0
                     : 100.0 * (static_cast<double>(chosen.size()) - hits) /
                           static_cast<double>(chosen.size());
  return out;
}

EvalResult evaluate(const TrainedModel& model, const LabeledDataset& test,
                    std::optional<std::span<const Index>> truth) {
  // map test group names onto the model's numbering
  std::vector<int> expected;
  expected.reserve(test.labels().size());
  for (int g : test.labels()) {
    const auto& name = test.group_names()[static_cast<std::size_t>(g)];
    const auto it = std::find(model.group_names.begin(), model.group_names.end(), name);
    expected.push_back(it == model.group_names.end()
                           ? -1
                           : static_cast<int>(it - model.group_names.begin()));
  }
  const auto predicted = predict(model, test.X());
  const auto te = test_error(predicted, expected);
  EvalResult out;
  out.te_count = te.count;
  out.te_rate = te.rate;
  out.nfs = nfs(model);
  out.n_test = test.n();
  if (truth) {
    const auto rates = dr_fp(model.coef.support, *truth);
    out.dr_percent = rates.dr_percent;
    out.fp_percent = rates.fp_percent;
  }
  return out;
}

MeanSd mean_sd(std::span<const double> values) {
  MeanSd out;
  if (values.empty()) {
    return out;
  }
  const auto n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) {
      ss += (v - out.mean) * (v - out.mean);
    }
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

} // namespace crda
