#pragma once

#include "crda/classifier.hpp"

#include <optional>
#include <span>
#include <vector>

namespace crda {

struct TestError {
  Index count = 0;
  double rate = 0.0;
};

TestError test_error(std::span<const int> predicted, std::span<const int> truth);

/// Number of features selected: |support(B)|.
Index nfs(const TrainedModel& model);

struct DetectionRates {
  double dr_percent = 0.0;
  double fp_percent = 0.0;
};

/// DR = 100 |S n T| / |T|, FP = 100 |S \ T| / |S| (0 when S is empty).
/// Throws InvalidArgument on an empty truth set.
DetectionRates dr_fp(std::span<const Index> selected, std::span<const Index> truth);

struct EvalResult {
  Index te_count = 0;
  double te_rate = 0.0;
  Index nfs = 0;
  std::optional<double> dr_percent;
  std::optional<double> fp_percent;
  Index n_test = 0;
};

/// Evaluates `model` on a labeled test set; DR/FP are filled when a truth
/// set is supplied.
EvalResult evaluate(const TrainedModel& model, const LabeledDataset& test,
                    std::optional<std::span<const Index>> truth = std::nullopt);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
};

MeanSd mean_sd(std::span<const double> values);

} // namespace crda
