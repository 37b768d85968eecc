#include "crda/dataset.hpp"

#include "crda/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace crda {

LabeledDataset::LabeledDataset(Matrix X, std::vector<int> labels,
                               std::vector<std::string> group_names,
                               std::vector<std::string> feature_names)
    : X_(std::move(X)), labels_(std::move(labels)), group_names_(std::move(group_names)),
      feature_names_(std::move(feature_names)) {
  if (X_.cols() < 1) {
    throw DataError("dataset needs at least one feature");
  }
  if (static_cast<Index>(labels_.size()) != X_.rows()) {
    throw DataError("label count " + std::to_string(labels_.size()) +
                    " does not match sample count " + std::to_string(X_.rows()));
  }
  if (group_names_.empty()) {
    throw DataError("dataset needs at least one group");
  }
  if (!feature_names_.empty() && static_cast<Index>(feature_names_.size()) != X_.cols()) {
    throw DataError("feature name count does not match feature count");
  }
  const int G = groups();
  std::vector<Index> counts(static_cast<std::size_t>(G), 0);
  for (int label : labels_) {
    if (label < 0 || label >= G) {
      throw DataError("label index " + std::to_string(label) + " outside [0, " +
                      std::to_string(G) + ")");
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int g = 0; g < G; ++g) {
    if (counts[static_cast<std::size_t>(g)] == 0) {
      throw DataError("group '" + group_names_[static_cast<std::size_t>(g)] +
                      "' has no samples");
    }
  }
  if (!X_.allFinite()) {
    throw DataError("feature matrix contains non-finite values");
  }
}

LabeledDataset LabeledDataset::from_raw_labels(Matrix X, std::span<const std::string> raw_labels,
                                               std::vector<std::string> feature_names) {
  std::vector<std::string> names;
  std::unordered_map<std::string, int> index;
  std::vector<int> labels;
  labels.reserve(raw_labels.size());
  for (const auto& raw : raw_labels) {
    auto [it, inserted] = index.try_emplace(raw, static_cast<int>(names.size()));
    if (inserted) {
      names.push_back(raw);
    }
    labels.push_back(it->second);
  }
  return LabeledDataset(std::move(X), std::move(labels), std::move(names),
                        std::move(feature_names));
}

std::vector<Index> LabeledDataset::group_counts() const {
  std::vector<Index> counts(group_names_.size(), 0);
  for (int label : labels_) {
    ++counts[static_cast<std::size_t>(label)];
  }
  return counts;
}

LabeledDataset LabeledDataset::subset(std::span<const Index> rows) const {
  Matrix X(static_cast<Index>(rows.size()), p());
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    X.row(static_cast<Index>(i)) = X_.row(rows[i]);
    labels.push_back(labels_[static_cast<std::size_t>(rows[i])]);
  }
  return LabeledDataset(std::move(X), std::move(labels), group_names_, feature_names_);
}

int LabeledDataset::group_index(const std::string& name) const {
  auto it = std::find(group_names_.begin(), group_names_.end(), name);
  return it == group_names_.end() ? -1 : static_cast<int>(it - group_names_.begin());
}

ClassMeans class_means(const LabeledDataset& ds) {
  const int G = ds.groups();
  ClassMeans out;
  out.means = Matrix::Zero(ds.p(), G);
  out.counts = ds.group_counts();
  for (Index i = 0; i < ds.n(); ++i) {
    out.means.col(ds.labels()[static_cast<std::size_t>(i)]) += ds.X().row(i).transpose();
  }
  out.proportions.resize(G);
  for (int g = 0; g < G; ++g) {
    const auto count = static_cast<double>(out.counts[static_cast<std::size_t>(g)]);
    out.means.col(g) /= count;
    out.proportions[g] = count / static_cast<double>(ds.n());
  }
  return out;
}

CenteredData center_by_class(const LabeledDataset& ds, const ClassMeans& means) {
  if (means.p() != ds.p() || means.groups() != ds.groups()) {
    throw DataError("class means are " + std::to_string(means.p()) + " x " +
                    std::to_string(means.groups()) + " but dataset is p=" +
                    std::to_string(ds.p()) + ", G=" + std::to_string(ds.groups()));
  }
  CenteredData out;
  out.labels = ds.labels();
  out.Xc = ds.X().transpose();
  for (Index i = 0; i < ds.n(); ++i) {
    out.Xc.col(i) -= means.means.col(ds.labels()[static_cast<std::size_t>(i)]);
  }
  return out;
}

Matrix decenter(const CenteredData& centered, const ClassMeans& means) {
  if (means.p() != centered.p()) {
    throw DataError("class means do not match centered data dimension");
  }
  Matrix X = centered.Xc;
  for (Index i = 0; i < centered.n(); ++i) {
    X.col(i) += means.means.col(centered.labels[static_cast<std::size_t>(i)]);
  }
  return X.transpose();
}

std::string format_real(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

std::string unquote(std::string_view cell) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
    cell.remove_prefix(1);
  }
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
    cell = cell.substr(1, cell.size() - 2);
  }
  return std::string(cell);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(unquote(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(unquote(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

CsvTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open '" + path.string() + "'");
  }
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (line.empty()) {
      continue;
    }
    auto cells = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " fields, header has " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) {
    throw DataError(path.string() + ": missing header row");
  }
  return table;
}

double parse_real(const std::string& cell, const std::filesystem::path& path, std::size_t line,
                  const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') {
    ++first;
  }
  auto res = std::from_chars(first, last, value);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
    throw DataError(path.string() + ": line " + std::to_string(line) + ", column '" + column +
                    "': cannot parse '" + cell + "' as a finite real");
  }
  return value;
}

std::vector<std::string> read_label_file(const std::filesystem::path& path) {
  const auto table = read_table(path);
  if (table.header.size() != 1) {
    throw DataError(path.string() + ": label file must have exactly one column");
  }
  std::vector<std::string> labels;
  labels.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    labels.push_back(row[0]);
  }
  return labels;
}

FeatureTable read_features(const std::filesystem::path& path, const CsvOptions& options,
                           bool require_labels) {
  const auto table = read_table(path);
  FeatureTable out;
  if (options.transpose) {
    // features as rows: first column holds feature names, header holds sample ids
    const auto n = static_cast<Index>(table.header.size()) - 1;
    const auto p = static_cast<Index>(table.rows.size());
    if (n < 1 || p < 1) {
      throw DataError(path.string() + ": transposed matrix needs at least one sample and feature");
    }
    out.X.resize(n, p);
    out.feature_names.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) {
      const auto& row = table.rows[static_cast<std::size_t>(j)];
      out.feature_names.push_back(row[0]);
      for (Index i = 0; i < n; ++i) {
        out.X(i, j) = parse_real(row[static_cast<std::size_t>(i + 1)], path,
                                 table.line_numbers[static_cast<std::size_t>(j)],
                                 table.header[static_cast<std::size_t>(i + 1)]);
      }
    }
    if (!options.label_file.empty()) {
      auto labels = read_label_file(options.label_file);
      if (static_cast<Index>(labels.size()) != n) {
        throw DataError(options.label_file.string() + ": " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(n) + " samples");
      }
      out.labels = std::move(labels);
    } else if (require_labels) {
      throw DataError("transposed input requires a label file");
    }
    return out;
  }

  const auto label_it =
      std::find(table.header.begin(), table.header.end(), options.label_column);
  const bool has_label = label_it != table.header.end();
  if (!has_label && require_labels) {
    throw DataError(path.string() + ": label column '" + options.label_column + "' not found");
  }
  const auto label_col = static_cast<std::size_t>(label_it - table.header.begin());
  const auto n = static_cast<Index>(table.rows.size());
  const auto p = static_cast<Index>(table.header.size()) - (has_label ? 1 : 0);
  if (p < 1) {
    throw DataError(path.string() + ": no feature columns");
  }
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (!has_label || c != label_col) {
      out.feature_names.push_back(table.header[c]);
    }
  }
  out.X.resize(n, p);
  std::vector<std::string> labels;
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    Index j = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (has_label && c == label_col) {
        labels.push_back(row[c]);
        continue;
      }
      out.X(i, j++) = parse_real(row[c], path, table.line_numbers[static_cast<std::size_t>(i)],
                                 table.header[c]);
    }
  }
  if (has_label) {
    out.labels = std::move(labels);
  }
  return out;
}

} // namespace

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  auto table = read_features(path, options, true);
  if (table.X.rows() < 1) {
    throw DataError(path.string() + ": no samples");
  }
  return LabeledDataset::from_raw_labels(std::move(table.X), *table.labels,
                                         std::move(table.feature_names));
}

FeatureTable load_features(const std::filesystem::path& path, const CsvOptions& options) {
  return read_features(path, options, false);
}

void save_csv(const LabeledDataset& ds, const std::filesystem::path& path,
              const std::string& label_column) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write '" + path.string() + "'");
  }
  out << label_column;
  for (Index j = 0; j < ds.p(); ++j) {
    out << ',';
    if (ds.has_feature_names()) {
      out << ds.feature_names()[static_cast<std::size_t>(j)];
    } else {
      out << 'f' << (j + 1);
    }
  }
  out << '\n';
  for (Index i = 0; i < ds.n(); ++i) {
    out << ds.group_names()[static_cast<std::size_t>(ds.labels()[static_cast<std::size_t>(i)])];
    for (Index j = 0; j < ds.p(); ++j) {
      out << ',' << format_real(ds.X()(i, j));
    }
    out << '\n';
  }
  if (!out) {
    throw DataError("failed writing '" + path.string() + "'");
  }
}

} // namespace crda
