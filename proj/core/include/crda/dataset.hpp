#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace crda {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Feature matrix with group labels.
///
/// X is stored samples-by-features (n x p). Labels are dense group indices
/// 0..G-1; `group_names()[g]` holds the original label string of group g.
/// Every group has at least one sample, so n >= G.
class LabeledDataset {
public:
  LabeledDataset(Matrix X, std::vector<int> labels,
                 std::vector<std::string> group_names,
                 std::vector<std::string> feature_names = {});

  /// Builds a dataset from raw label strings. Groups are numbered in order
  /// of first appearance.
  static LabeledDataset from_raw_labels(Matrix X,
                                        std::span<const std::string> raw_labels,
                                        std::vector<std::string> feature_names = {});

  Index n() const { return X_.rows(); }
  Index p() const { return X_.cols(); }
  int groups() const { return static_cast<int>(group_names_.size()); }

  const Matrix& X() const { return X_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& group_names() const { return group_names_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  bool has_feature_names() const { return !feature_names_.empty(); }

  std::vector<Index> group_counts() const;

  /// Dataset restricted to the given sample rows, keeping the group
  /// numbering. Throws DataError if a group ends up empty.
  LabeledDataset subset(std::span<const Index> rows) const;

  /// Looks up a group index by its original label; -1 if unknown.
  int group_index(const std::string& name) const;

private:
  Matrix X_;
  std::vector<int> labels_;
  std::vector<std::string> group_names_;
  std::vector<std::string> feature_names_;
};

/// Per-group sample means (p x G), counts n_g and proportions n_g / n.
struct ClassMeans {
  Matrix means;
  std::vector<Index> counts;
  Vector proportions;

  Index p() const { return means.rows(); }
  int groups() const { return static_cast<int>(means.cols()); }
};

/// Class-centered observations stored features-by-samples (p x n):
/// column i is x_i minus the mean of its group.
struct CenteredData {
  Matrix Xc;
  std::vector<int> labels;

  Index p() const { return Xc.rows(); }
  Index n() const { return Xc.cols(); }
};

ClassMeans class_means(const LabeledDataset& ds);

CenteredData center_by_class(const LabeledDataset& ds, const ClassMeans& means);

/// Inverse of center_by_class; returns samples-by-features.
Matrix decenter(const CenteredData& centered, const ClassMeans& means);

struct CsvOptions {
  std::string label_column = "class";
  /// Matrix file holds features as rows (first column: feature name,
  /// header: sample names). Labels then come from `label_file`.
  bool transpose = false;
  std::filesystem::path label_file;
};

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Writes samples-as-rows with the label column first. Reals use shortest
/// round-trip formatting, so a reload reproduces the payload bit for bit.
void save_csv(const LabeledDataset& ds, const std::filesystem::path& path,
              const std::string& label_column = "class");

/// Unlabeled feature table (for prediction). A column named
/// `label_column` is split off and returned in `labels` when present.
struct FeatureTable {
  Matrix X;
  std::vector<std::string> feature_names;
  std::optional<std::vector<std::string>> labels;
};

FeatureTable load_features(const std::filesystem::path& path, const CsvOptions& options = {});

/// Shortest round-trip decimal representation of a double.
std::string format_real(double value);

} // namespace crda
