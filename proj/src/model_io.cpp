#include "wtlstm/model_io.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "wtlstm/error.hpp"
#include "wtlstm/fileio.hpp"

namespace wtlstm {

using nlohmann::json;

namespace {

json config_to_json(const ModelConfig& c) {
  return json{{"window", c.window},
              {"hidden", c.hidden},
              {"channels", c.channels},
              {"wavelet", c.wavelet},
              {"wavelet_levels", c.wavelet_levels},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.adam.lr},
              {"beta1", c.adam.beta1},
              {"beta2", c.adam.beta2},
              {"adam_eps", c.adam.eps},
              {"lr_decay", c.schedule.factor},
              {"lr_decay_every", c.schedule.every},
              {"seed", c.seed},
              {"use_wtconv", c.use_wtconv},
              {"use_attention", c.use_attention}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.window = j.at("window").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.channels = j.at("channels").get<std::size_t>();
  c.wavelet = j.at("wavelet").get<std::string>();
  c.wavelet_levels = j.at("wavelet_levels").get<std::size_t>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.adam.lr = j.at("learning_rate").get<double>();
  c.adam.beta1 = j.at("beta1").get<double>();
  c.adam.beta2 = j.at("beta2").get<double>();
  c.adam.eps = j.at("adam_eps").get<double>();
  c.schedule.factor = j.at("lr_decay").get<double>();
  c.schedule.every = j.at("lr_decay_every").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.use_wtconv = j.at("use_wtconv").get<bool>();
  c.use_attention = j.at("use_attention").get<bool>();
  return c;
}

// Every parameter, including ablated stages, so files are shape-complete.
std::vector<const Parameter*> every_parameter(const ModelParameters& p) {
  ModelParameters& m = const_cast<ModelParameters&>(p);
  const bool wt = m.use_wtconv, at = m.use_attention;
  m.use_wtconv = m.use_attention = true;
  auto all = std::as_const(m).all();
  m.use_wtconv = wt;
  m.use_attention = at;
  return all;
}

}  // namespace

std::string serialize_model(const ModelArtifact& a) {
  json params = json::array();
  for (const auto* p : every_parameter(a.params))
    params.push_back(json{{"name", p->name}, {"shape", p->value.shape()}, {"values", p->value.vector()}});

  json scaler{{"features", std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end())},
              {"mean", a.scaler.mean},
              {"std", a.scaler.stddev},
              {"fit_rows", a.scaler.fit_rows},
              {"fit_first", a.scaler.fit_first.to_string()},
              {"fit_last", a.scaler.fit_last.to_string()}};

  json doc{{"format", kModelFormat},
           {"version", kModelFormatVersion},
           {"ticker", a.ticker},
           {"config", config_to_json(a.config)},
           {"bank",
            {{"name", a.bank.name},
             {"dec_lo", a.bank.dec_lo},
             {"dec_hi", a.bank.dec_hi},
             {"rec_lo", a.bank.rec_lo},
             {"rec_hi", a.bank.rec_hi}}},
           {"scaler", scaler},
           {"loss_curve", a.loss_curve},
           {"parameters", params}};
  return doc.dump() + "\n";
}

ModelArtifact deserialize_model(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ContractError(source + ": not a model file (" + e.what() + ")");
  }
  try {
    if (doc.at("format") != kModelFormat) throw ContractError(source + ": unexpected format tag");
    if (doc.at("version").get<int>() != kModelFormatVersion)
      throw ContractError(source + ": unsupported model version " + doc.at("version").dump());

    ModelArtifact a;
    a.ticker = doc.at("ticker").get<std::string>();
    a.config = config_from_json(doc.at("config"));
    const json& b = doc.at("bank");
    a.bank = FilterBank{b.at("name").get<std::string>(), b.at("dec_lo").get<std::vector<double>>(),
                        b.at("dec_hi").get<std::vector<double>>(), b.at("rec_lo").get<std::vector<double>>(),
                        b.at("rec_hi").get<std::vector<double>>()};
    a.bank.validate();

    const json& s = doc.at("scaler");
    a.scaler.mean = s.at("mean").get<std::array<double, kFeatureCount>>();
    a.scaler.stddev = s.at("std").get<std::array<double, kFeatureCount>>();
    a.scaler.fit_rows = s.at("fit_rows").get<std::size_t>();
    a.scaler.fit_first = Date::parse(s.at("fit_first").get<std::string>());
    a.scaler.fit_last = Date::parse(s.at("fit_last").get<std::string>());
    a.loss_curve = doc.at("loss_curve").get<std::vector<double>>();

    a.params = init_model(a.config, a.bank);
    std::map<std::string, const json*> stored;
    for (const auto& p : doc.at("parameters")) stored[p.at("name").get<std::string>()] = &p;
    for (const auto* cp : every_parameter(a.params)) {
      auto* p = const_cast<Parameter*>(cp);
      auto it = stored.find(p->name);
      if (it == stored.end()) throw ContractError(source + ": missing parameter '" + p->name + "'");
      const auto shape = it->second->at("shape").get<Shape>();
      if (shape != p->value.shape())
        throw ContractError(source + ": parameter '" + p->name + "' has shape " + shape_string(shape) +
                            ", expected " + shape_string(p->value.shape()));
      p->value = Tensor(shape, it->second->at("values").get<std::vector<double>>());
    }
    return a;
  } catch (const json::exception& e) {
    throw ContractError(source + ": malformed model file (" + e.what() + ")");
  }
}

void save_model(const ModelArtifact& artifact, const std::string& path) {
  write_file_atomic(path, serialize_model(artifact));
}

ModelArtifact load_model(const std::string& path) {
  return deserialize_model(read_file(path), path);
}

}  // namespace wtlstm
