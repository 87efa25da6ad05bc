#include "windgrid/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "windgrid/errors.hpp"

namespace windgrid {

namespace {

using nlohmann::json;

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
  }
  return "linear";
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "linear") return Activation::Linear;
  throw ParseError("unknown activation '" + s + "'");
}

json spec_to_doc(const NetworkSpec& spec) {
  json layers = json::array();
  for (const LayerSpec& l : spec.layers) {
    json j;
    switch (l.kind) {
      case LayerSpec::Kind::Dense:
        j = {{"kind", "dense"}, {"units", l.units}};
        break;
      case LayerSpec::Kind::Lstm:
        j = {{"kind", "lstm"}, {"units", l.units}};
        break;
      case LayerSpec::Kind::Bilstm:
        j = {{"kind", "bilstm"}, {"units", l.units}};
        break;
      case LayerSpec::Kind::Conv1d:
        j = {{"kind", "conv1d"},
             {"units", l.units},
             {"kernel", l.kernel},
             {"stride", l.stride}};
        break;
      case LayerSpec::Kind::ActivationOnly:
        j = {{"kind", "activation"},
             {"activation", activation_name(l.activation)}};
        break;
    }
    layers.push_back(std::move(j));
  }
  std::string loss = "mse";
  if (spec.loss == LossKind::GanGenerator) loss = "gan-generator";
  if (spec.loss == LossKind::GanDiscriminator) loss = "gan-discriminator";
  return {{"layers", std::move(layers)}, {"loss", loss}};
}

NetworkSpec spec_from_doc(const json& doc) {
  NetworkSpec spec;
  if (!doc.contains("layers") || !doc["layers"].is_array())
    throw ParseError("model spec needs a 'layers' array");
  for (const json& j : doc["layers"]) {
    const std::string kind = j.at("kind").get<std::string>();
    LayerSpec l;
    if (kind == "dense") {
      l.kind = LayerSpec::Kind::Dense;
      l.units = j.at("units").get<int>();
    } else if (kind == "lstm") {
      l.kind = LayerSpec::Kind::Lstm;
      l.units = j.at("units").get<int>();
    } else if (kind == "bilstm") {
      l.kind = LayerSpec::Kind::Bilstm;
      l.units = j.at("units").get<int>();
    } else if (kind == "conv1d") {
      l.kind = LayerSpec::Kind::Conv1d;
      l.units = j.at("units").get<int>();
      l.kernel = j.at("kernel").get<int>();
      l.stride = j.value("stride", 1);
    } else if (kind == "activation") {
      l.kind = LayerSpec::Kind::ActivationOnly;
      l.activation = activation_from(j.at("activation").get<std::string>());
    } else {
      throw ParseError("unknown layer kind '" + kind + "'");
    }
    spec.layers.push_back(l);
  }
  const std::string loss = doc.value("loss", "mse");
  if (loss == "mse")
    spec.loss = LossKind::Mse;
  else if (loss == "gan-generator")
    spec.loss = LossKind::GanGenerator;
  else if (loss == "gan-discriminator")
    spec.loss = LossKind::GanDiscriminator;
  else
    throw ParseError("unknown loss '" + loss + "'");
  spec.check();
  return spec;
}

}  // namespace

std::string spec_to_json(const NetworkSpec& spec) {
  return spec_to_doc(spec).dump();
}

NetworkSpec spec_from_json(const std::string& text) {
  try {
    return spec_from_doc(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("model spec JSON: ") + e.what());
  }
}

void save_model(const std::string& path, const NetworkSpec& spec,
                const Eigen::VectorXd& params, std::uint64_t seed,
                const std::map<std::string, double>& extras) {
  json doc;
  doc["format_version"] = 1;
  doc["spec"] = spec_to_doc(spec);
  doc["seed"] = seed;
  std::vector<double> flat(params.data(), params.data() + params.size());
  doc["parameters"] = std::move(flat);
  doc["extras"] = extras;
  std::ofstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "' for writing");
  file << doc.dump(2) << '\n';
}

SavedModel load_model(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "'");
  json doc;
  try {
    file >> doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file JSON: ") + e.what());
  }
  SavedModel model;
  model.format_version = doc.value("format_version", 0);
  if (model.format_version != 1)
    throw ParseError("unsupported model format_version " +
                     std::to_string(model.format_version));
  if (!doc.contains("spec") || !doc.contains("parameters"))
    throw ParseError("model file needs 'spec' and 'parameters'");
  model.spec = spec_from_doc(doc["spec"]);
  model.seed = doc.value("seed", std::uint64_t{0});
  const auto& arr = doc["parameters"];
  if (!arr.is_array()) throw ParseError("'parameters' must be an array");
  model.params.resize(static_cast<Eigen::Index>(arr.size()));
  for (size_t i = 0; i < arr.size(); ++i)
    model.params(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  if (doc.contains("extras"))
    for (auto it = doc["extras"].begin(); it != doc["extras"].end(); ++it)
      model.extras[it.key()] = it.value().get<double>();
  return model;
}

void write_loss_trace(const std::string& path,
                      const std::vector<double>& loss) {
  std::ofstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "' for writing");
  file << "epoch,loss\n";
  char buf[32];
  for (size_t e = 0; e < loss.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%.10g", loss[e]);
    file << e << ',' << buf << '\n';
  }
}

void write_gan_trace(const std::string& path,
                     const std::vector<GanTraceRow>& trace) {
  std::ofstream file(path);
  if (!file) throw FileNotFound("cannot open '" + path + "' for writing");
  file << "epoch,loss_d,loss_g\n";
  char b1[32], b2[32];
  for (const GanTraceRow& row : trace) {
    std::snprintf(b1, sizeof(b1), "%.10g", row.loss_d);
    std::snprintf(b2, sizeof(b2), "%.10g", row.loss_g);
    file << row.epoch << ',' << b1 << ',' << b2 << '\n';
  }
}

}  // namespace windgrid
