#include "glaudio/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "glaudio/error.hpp"

namespace glaudio {

namespace {

const char* to_string(LossKind l) { return l == LossKind::l1 ? "l1" : "cross_entropy"; }
const char* to_string(Schedule s) { return s == Schedule::reduce_on_plateau ? "reduce_on_plateau" : "constant"; }

LossKind loss_from_string(const std::string& s) {
  if (s == "cross_entropy") return LossKind::cross_entropy;
  if (s == "l1") return LossKind::l1;
  throw Error(ErrorCode::InvalidConfig, "train.loss must be cross_entropy or l1");
}

Schedule schedule_from_string(const std::string& s) {
  if (s == "constant") return Schedule::constant;
  if (s == "reduce_on_plateau") return Schedule::reduce_on_plateau;
  throw Error(ErrorCode::InvalidConfig, "optim.schedule must be constant or reduce_on_plateau");
}

bool compatible(const Json& expected, const Json& given) {
  if (expected.is_boolean()) return given.is_boolean();
  if (expected.is_number_float()) return given.is_number();
  if (expected.is_number_integer()) return given.is_number_integer();
  if (expected.is_string()) return given.is_string();
  if (expected.is_object()) return given.is_object();
  return false;
}

void merge_strict(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object()) throw Error(ErrorCode::InvalidConfig, "'" + path + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + full + "'");
    Json& slot = base[key];
    if (!compatible(slot, value)) {
      throw Error(ErrorCode::InvalidConfig, "config key '" + full + "' expects " + std::string(slot.type_name()) +
                                                ", got " + std::string(value.type_name()));
    }
    if (slot.is_object()) {
      merge_strict(slot, value, full);
    } else if (slot.is_number_float()) {
      slot = value.get<double>();
    } else {
      slot = value;
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, m); };
  if (num_steps < 1) fail("encoder.num_steps must be >= 1");
  if (!(step_size > 0.0)) fail("encoder.step_size must be positive");
  if (num_layers < 1) fail("model.num_layers must be >= 1");
  if (hidden_dim < 1) fail("model.hidden_dim must be >= 1");
  if (!(learning_rate > 0.0)) fail("optim.learning_rate must be positive");
  if (weight_decay < 0.0) fail("optim.weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) fail("optim betas must lie in [0, 1)");
  if (!(eps > 0.0)) fail("optim.eps must be positive");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) fail("optim.plateau_factor must lie in (0, 1)");
  if (plateau_patience < 1) fail("optim.plateau_patience must be >= 1");
  if (min_lr < 0.0) fail("optim.min_lr must be >= 0");
  if (epochs < 1) fail("train.epochs must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("train.dropout must lie in [0, 1)");
  if (early_stopping_patience < 0) fail("train.early_stopping_patience must be >= 0");
  if (batch_size < 0) fail("train.batch_size must be >= 0");
  if (cornn.dt <= 0.0) fail("model.cornn.dt must be positive");
}

Json TrainConfig::to_json() const {
  Json j;
  j["dataset"] = {{"bundle", bundle}, {"split_seed", split_seed}};
  j["model"] = {{"architecture", glaudio::to_string(architecture)},
                {"num_layers", num_layers},
                {"hidden_dim", hidden_dim},
                {"activation", glaudio::to_string(activation)},
                {"embedding_placement", glaudio::to_string(placement)},
                {"embedding_activation", glaudio::to_string(embedding_activation)},
                {"train_embedding", train_embedding},
                {"include_velocity", include_velocity},
                {"cornn", {{"gamma", cornn.gamma}, {"epsilon", cornn.epsilon}, {"dt", cornn.dt}}}};
  j["encoder"] = {{"num_steps", num_steps},
                  {"step_size", step_size},
                  {"normalized_laplacian", normalized_laplacian},
                  {"self_loops", self_loops}};
  j["optim"] = {{"learning_rate", learning_rate}, {"weight_decay", weight_decay},
                {"beta1", beta1},                 {"beta2", beta2},
                {"eps", eps},                     {"schedule", to_string(schedule)},
                {"plateau_factor", plateau_factor}, {"plateau_patience", plateau_patience},
                {"min_lr", min_lr}};
  j["train"] = {{"epochs", epochs},
                {"dropout", dropout},
                {"loss", to_string(loss)},
                {"early_stopping_patience", early_stopping_patience},
                {"batch_size", batch_size},
                {"seed", seed},
                {"cache_signal", cache_signal}};
  return j;
}

TrainConfig TrainConfig::from_json(const Json& j) {
  Json merged = TrainConfig{}.to_json();
  merge_strict(merged, j, "");
  TrainConfig c;
  try {
    const auto& d = merged["dataset"];
    c.bundle = d["bundle"].get<std::string>();
    c.split_seed = d["split_seed"].get<std::uint64_t>();
    const auto& m = merged["model"];
    c.architecture = architecture_from_string(m["architecture"].get<std::string>());
    c.num_layers = m["num_layers"].get<int>();
    c.hidden_dim = m["hidden_dim"].get<int>();
    c.activation = activation_from_string(m["activation"].get<std::string>());
    c.placement = placement_from_string(m["embedding_placement"].get<std::string>());
    c.embedding_activation = activation_from_string(m["embedding_activation"].get<std::string>());
    c.train_embedding = m["train_embedding"].get<bool>();
    c.include_velocity = m["include_velocity"].get<bool>();
    c.cornn.gamma = m["cornn"]["gamma"].get<double>();
    c.cornn.epsilon = m["cornn"]["epsilon"].get<double>();
    c.cornn.dt = m["cornn"]["dt"].get<double>();
    const auto& e = merged["encoder"];
    c.num_steps = e["num_steps"].get<int>();
    c.step_size = e["step_size"].get<double>();
    c.normalized_laplacian = e["normalized_laplacian"].get<bool>();
    c.self_loops = e["self_loops"].get<bool>();
    const auto& o = merged["optim"];
    c.learning_rate = o["learning_rate"].get<double>();
    c.weight_decay = o["weight_decay"].get<double>();
    c.beta1 = o["beta1"].get<double>();
    c.beta2 = o["beta2"].get<double>();
    c.eps = o["eps"].get<double>();
    c.schedule = schedule_from_string(o["schedule"].get<std::string>());
    c.plateau_factor = o["plateau_factor"].get<double>();
    c.plateau_patience = o["plateau_patience"].get<int>();
    c.min_lr = o["min_lr"].get<double>();
    const auto& t = merged["train"];
    c.epochs = t["epochs"].get<int>();
    c.dropout = t["dropout"].get<double>();
    c.loss = loss_from_string(t["loss"].get<std::string>());
    c.early_stopping_patience = t["early_stopping_patience"].get<int>();
    c.batch_size = t["batch_size"].get<int>();
    c.seed = t["seed"].get<std::uint64_t>();
    c.cache_signal = t["cache_signal"].get<bool>();
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::InvalidConfig, ex.what());
  }
  c.validate();
  return c;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string TrainConfig::hash() const { return fnv1a_hex(to_json().dump()); }

Json apply_overrides(Json config, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::InvalidConfig, "override '" + ov + "' is not of the form key=value");
    }
    const std::string key = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    Json* node = &config;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->is_object()) throw Error(ErrorCode::InvalidConfig, "override path '" + key + "'");
      node = &(*node)[parts[i]];
      if (node->is_null()) *node = Json::object();
    }
    (*node)[parts.back()] = value;
  }
  return config;
}

TrainConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json j = Json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& ex) {
      throw Error(ErrorCode::ParseError, path + ": " + ex.what());
    }
  }
  return TrainConfig::from_json(apply_overrides(std::move(j), overrides));
}

}  // namespace glaudio
