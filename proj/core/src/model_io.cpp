#include "crda/model_io.hpp"

#include "crda/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace crda {

using nlohmann::json;

namespace {

json vector_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

std::string target_name(ShrinkageTarget t) {
  return t == ShrinkageTarget::Identity ? "identity" : "scaled-identity";
}

} // namespace

std::string model_to_json(const TrainedModel& model) {
  json doc;
  doc["format"] = kModelFormat;
  doc["p"] = model.p;
  doc["groups"] = model.groups();

  json hyper;
  hyper["alpha"] = model.hyper.alpha;
  hyper["target"] = target_name(model.hyper.target);
  hyper["kind"] = model.hyper.kind == SparsityKind::Hard ? "hard" : "soft";
  if (model.hyper.q) {
    hyper["q"] = to_string(*model.hyper.q);
  }
  hyper["k"] = model.hyper.k;
  hyper["delta"] = model.hyper.delta;
  doc["hyper"] = hyper;

  doc["group_names"] = model.group_names;
  doc["feature_names"] = model.feature_names;
  doc["log_priors"] = vector_json(model.log_priors);
  doc["diag_term"] = vector_json(model.diag_term);
  doc["support"] = model.coef.support;

  json coefficients = json::array();
  json mean_rows = json::array();
  for (Index i : model.coef.support) {
    coefficients.push_back(vector_json(model.coef.B.row(i).transpose()));
    mean_rows.push_back(vector_json(model.means.row(i).transpose()));
  }
  doc["coefficients"] = std::move(coefficients);
  doc["mean_rows"] = std::move(mean_rows);
  return doc.dump(1);
}

TrainedModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kModelFormat) {
      throw DataError("unsupported model format '" + doc.at("format").get<std::string>() + "'");
    }
    TrainedModel model;
    model.p = doc.at("p").get<Index>();
    const auto G = doc.at("groups").get<Index>();

    const auto& hyper = doc.at("hyper");
    model.hyper.alpha = hyper.at("alpha").get<double>();
    model.hyper.target = hyper.at("target").get<std::string>() == "identity"
                             ? ShrinkageTarget::Identity
                             : ShrinkageTarget::ScaledIdentity;
    model.hyper.kind =
        hyper.at("kind").get<std::string>() == "hard" ? SparsityKind::Hard : SparsityKind::Soft;
    if (hyper.contains("q")) {
      model.hyper.q = parse_row_norm(hyper.at("q").get<std::string>());
    }
    model.hyper.k = hyper.at("k").get<Index>();
    model.hyper.delta = hyper.at("delta").get<double>();

    model.group_names = doc.at("group_names").get<std::vector<std::string>>();
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.log_priors = vector_from(doc.at("log_priors"));
    model.diag_term = vector_from(doc.at("diag_term"));
    if (model.log_priors.size() != G || model.diag_term.size() != G ||
        static_cast<Index>(model.group_names.size()) != G) {
      throw DataError("model file: group-sized fields disagree with groups = " +
                      std::to_string(G));
    }

    model.coef.kind = model.hyper.kind;
    model.coef.q = model.hyper.q;
    model.coef.k = model.hyper.k;
    model.coef.delta = model.hyper.delta;
    model.coef.support = doc.at("support").get<std::vector<Index>>();
    model.coef.B = Matrix::Zero(model.p, G);
    model.means = Matrix::Zero(model.p, G);
    const auto& coefficients = doc.at("coefficients");
    const auto& mean_rows = doc.at("mean_rows");
    if (coefficients.size() != model.coef.support.size() ||
        mean_rows.size() != model.coef.support.size()) {
      throw DataError("model file: support and coefficient rows disagree");
    }
    for (std::size_t r = 0; r < model.coef.support.size(); ++r) {
      const Index i = model.coef.support[r];
      if (i < 0 || i >= model.p) {
        throw DataError("model file: support index out of range");
      }
      const Vector row = vector_from(coefficients[r]);
      const Vector mean = vector_from(mean_rows[r]);
      if (row.size() != G || mean.size() != G) {
        throw DataError("model file: coefficient row has wrong length");
      }
      model.coef.B.row(i) = row.transpose();
      model.means.row(i) = mean.transpose();
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is missing fields: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write model to '" + path.string() + "'");
  }
  out << model_to_json(model) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open model '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

} // namespace crda
