#pragma once

// Shared fixtures and independent oracles for the unit tests. Oracles use
// only dense textbook formulas so they share no code path with the library.

#include "crda/dataset.hpp"
#include "crda/random.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace crda::test {

inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      out(i, j) = normal(rng);
    }
  }
  return out;
}

/// alpha * S + (1 - alpha) * eta * I with S = Xc Xc^T / n, built densely.
inline Matrix dense_rscm(const Matrix& Xc, double alpha) {
  const double n = static_cast<double>(Xc.cols());
  const Matrix S = Xc * Xc.transpose() / n;
  const double eta = S.trace() / static_cast<double>(S.rows());
  return alpha * S + (1.0 - alpha) * eta * Matrix::Identity(S.rows(), S.rows());
}

/// Index of the closest class mean (columns of `means`), first on ties.
inline std::vector<int> nearest_centroid(const Matrix& means, const Matrix& X) {
  std::vector<int> out;
  for (Index r = 0; r < X.rows(); ++r) {
    int best = 0;
    double best_dist = (X.row(r).transpose() - means.col(0)).squaredNorm();
    for (Index g = 1; g < means.cols(); ++g) {
      const double dist = (X.row(r).transpose() - means.col(g)).squaredNorm();
      if (dist < best_dist) {
        best = static_cast<int>(g);
        best_dist = dist;
      }
    }
    out.push_back(best);
  }
  return out;
}

/// Labeled Gaussian dataset: group g has mean shift `shift` on features
/// [g*width, (g+1)*width), unit noise, `per_group` samples each.
inline LabeledDataset shifted_groups(int groups, Index per_group, Index p, Index width,
                                     double shift, Rng& rng) {
  Matrix X = gaussian_matrix(groups * per_group, p, rng);
  std::vector<int> labels;
  std::vector<std::string> names;
  for (int g = 0; g < groups; ++g) {
    names.push_back("g" + std::to_string(g + 1));
    for (Index i = 0; i < per_group; ++i) {
      X.row(g * per_group + i).segment(g * width, width).array() += shift;
      labels.push_back(g);
    }
  }
  return LabeledDataset(std::move(X), std::move(labels), std::move(names));
}

/// Fresh empty directory under the system temp dir, removed on scope exit.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("crda-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace crda::test
