// Copyright 2026 The SAJD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "sajd/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sajd/kernels.hpp"

namespace sajd {

namespace {

using nlohmann::json;

constexpr std::array<const char*, kNumFeatures> kFeatureNames{"snr_db", "bler", "mcs"};

std::vector<Activation> default_activations(std::size_t layers) {
  std::vector<Activation> acts(layers, Activation::Relu);
  if (!acts.empty()) acts.back() = Activation::Sigmoid;
  return acts;
}

MlpModel shaped(const std::vector<int>& dims, std::vector<Activation> acts) {
  if (dims.size() < 2) throw DimensionError("model needs at least one layer");
  if (acts.empty()) acts = default_activations(dims.size() - 1);
  if (acts.size() != dims.size() - 1) {
    throw DimensionError("activation count does not match layer count");
  }
  MlpModel m;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    if (layer.in <= 0 || layer.out <= 0) throw DimensionError("layer widths must be positive");
    layer.weights.assign(static_cast<std::size_t>(layer.in * layer.out), 0.0);
    layer.biases.assign(static_cast<std::size_t>(layer.out), 0.0);
    layer.activation = acts[l];
    m.layers.push_back(std::move(layer));
  }
  return m;
}

struct AdamState {
  Gradients m;
  Gradients v;
  long step = 0;
};

void apply_update(MlpModel& model, const Gradients& g, const TrainConfig& cfg, AdamState& st) {
  if (cfg.optimizer == Optimizer::Sgd) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      auto& layer = model.layers[l];
      for (std::size_t i = 0; i < layer.weights.size(); ++i) {
        layer.weights[i] -= cfg.learning_rate * g.weights[l][i];
      }
      for (std::size_t i = 0; i < layer.biases.size(); ++i) {
        layer.biases[i] -= cfg.learning_rate * g.biases[l][i];
      }
    }
    return;
  }
  ++st.step;
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(st.step));
  auto step = [&](double& param, double grad, double& m1, double& m2) {
    m1 = cfg.adam_beta1 * m1 + (1.0 - cfg.adam_beta1) * grad;
    m2 = cfg.adam_beta2 * m2 + (1.0 - cfg.adam_beta2) * grad * grad;
    param -= cfg.learning_rate * (m1 / c1) / (std::sqrt(m2 / c2) + cfg.adam_eps);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& layer = model.layers[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      step(layer.weights[i], g.weights[l][i], st.m.weights[l][i], st.v.weights[l][i]);
    }
    for (std::size_t i = 0; i < layer.biases.size(); ++i) {
      step(layer.biases[i], g.biases[l][i], st.m.biases[l][i], st.v.biases[l][i]);
    }
  }
}

void check_example(const Example& e) {
  if (e.y != 0 && e.y != 1) throw ValidationError("labels must be 0 or 1");
  if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
    throw ValidationError("example weights must be positive and finite");
  }
  if (!std::isfinite(e.x.snr_db) || !std::isfinite(e.x.bler) || !std::isfinite(e.x.mcs)) {
    throw ValidationError("non-finite feature in batch");
  }
}

double mean_loss(const MlpModel& m, std::span<const Example> data) {
  double loss = 0.0;
  double weight = 0.0;
  for (const auto& e : data) {
    loss += e.weight * bce_from_logit(logit(m, e.x), e.y);
    weight += e.weight;
  }
  return weight > 0.0 ? loss / weight : 0.0;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Identity:
      return "identity";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw UnknownActivation("unknown activation '" + std::string(name) + "'");
}

std::vector<int> MlpModel::dims() const {
  std::vector<int> d;
  if (layers.empty()) return d;
  d.push_back(layers.front().in);
  for (const auto& l : layers) d.push_back(l.out);
  return d;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

void MlpModel::validate() const {
  if (layers.empty()) throw DimensionError("model has no layers");
  if (layers.front().in != kNumFeatures) {
    throw DimensionError("layer 0 expects " + std::to_string(layers.front().in) +
                         " inputs, model takes " + std::to_string(kNumFeatures) + " features");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::string name = "layer " + std::to_string(l);
    if (l > 0 && layer.in != layers[l - 1].out) {
      throw DimensionError(name + " input width does not match previous layer output");
    }
    if (layer.weights.size() != static_cast<std::size_t>(layer.in) * layer.out) {
      throw DimensionError(name + " has " + std::to_string(layer.weights.size()) +
                           " weights, expected " + std::to_string(layer.in * layer.out));
    }
    if (layer.biases.size() != static_cast<std::size_t>(layer.out)) {
      throw DimensionError(name + " has " + std::to_string(layer.biases.size()) +
                           " biases, expected " + std::to_string(layer.out));
    }
    for (double w : layer.weights) {
      if (!std::isfinite(w)) throw ValidationError(name + " has a non-finite weight");
    }
    for (double b : layer.biases) {
      if (!std::isfinite(b)) throw ValidationError(name + " has a non-finite bias");
    }
  }
  if (layers.back().out != 1 || layers.back().activation != Activation::Sigmoid) {
    throw DimensionError("output layer must be a single sigmoid unit");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must lie in (0,1)");
  for (const auto& n : norm) {
    if (!std::isfinite(n.offset) || !std::isfinite(n.scale)) {
      throw ValidationError("non-finite normalization constant");
    }
  }
}

MlpModel zero_model(const std::vector<int>& dims, const std::vector<Activation>& acts) {
  return shaped(dims, acts);
}

MlpModel init_model(std::uint64_t seed, const std::vector<int>& dims,
                    const std::vector<Activation>& acts) {
  MlpModel m = shaped(dims, acts);
  std::mt19937_64 rng(seed);
  for (auto& layer : m.layers) {
    const double fan_in = layer.in;
    const double fan_out = layer.out;
    const double limit = layer.activation == Activation::Relu ? std::sqrt(6.0 / fan_in)
                                                              : std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& w : layer.weights) w = dist(rng);
  }
  return m;
}

std::array<double, kNumFeatures> normalize(const MlpModel& m, const Features& f) {
  if (!std::isfinite(f.snr_db) || !std::isfinite(f.bler) || !std::isfinite(f.mcs)) {
    throw ValidationError("non-finite feature passed to the detector model");
  }
  const double raw[kNumFeatures] = {f.snr_db, f.bler, f.mcs};
  std::array<double, kNumFeatures> out{};
  for (int i = 0; i < kNumFeatures; ++i) out[i] = (raw[i] + m.norm[i].offset) * m.norm[i].scale;
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_from_logit(double z, int label) {
  return std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
}

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Relu:
      return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid:
      return sigmoid(z);
    case Activation::Identity:
      return z;
  }
  return z;
}

}  // namespace

double logit(const MlpModel& m, const Features& f) {
  const auto x = normalize(m, f);
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> next;
  double z_last = 0.0;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& layer = m.layers[l];
    next.assign(static_cast<std::size_t>(layer.out), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      double z = layer.biases[static_cast<std::size_t>(o)];
      const double* w = &layer.weights[static_cast<std::size_t>(o * layer.in)];
      for (int i = 0; i < layer.in; ++i) z += w[i] * a[static_cast<std::size_t>(i)];
      if (l + 1 == m.layers.size()) {
        z_last = z;
      }
      next[static_cast<std::size_t>(o)] = activate(layer.activation, z);
    }
    a.swap(next);
  }
  return z_last;
}

double forward(const MlpModel& m, const Features& f) { return sigmoid(logit(m, f)); }

Gradients Gradients::zeros_like(const MlpModel& m) {
  Gradients g;
  for (const auto& l : m.layers) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.biases.emplace_back(l.biases.size(), 0.0);
  }
  return g;
}

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += other.weights[l][i];
    for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += other.biases[l][i];
  }
}

void Gradients::scale(double s) {
  for (auto& w : weights) {
    for (auto& v : w) v *= s;
  }
  for (auto& b : biases) {
    for (auto& v : b) v *= s;
  }
}

LossGrad loss_and_grad(const MlpModel& m, std::span<const Example> batch) {
  if (batch.empty()) throw ValidationError("loss_and_grad: empty batch");
  double total_weight = 0.0;
  for (const auto& e : batch) {
    check_example(e);
    total_weight += e.weight;
  }
  LossGrad out{0.0, Gradients::zeros_like(m)};
  out.loss = kernels::parallel::loss_grad_sum(m, batch, out.grad) / total_weight;
  out.grad.scale(1.0 / total_weight);
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ValidationError("val_fraction must lie in (0,1)");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must lie in (0,1)");
}

double accuracy(const MlpModel& m, std::span<const Example> data) {
  if (data.empty()) return 0.0;
  std::vector<Features> xs;
  xs.reserve(data.size());
  for (const auto& e : data) xs.push_back(e.x);
  const auto probs = kernels::parallel::predict(m, xs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int pred = verdict_for(m, probs[i]) == Verdict::Interference ? 1 : 0;
    correct += pred == data[i].y ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(std::span<const Example> dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.size() < 10) {
    throw DegenerateDataset("training needs at least 10 examples, got " +
                            std::to_string(dataset.size()));
  }
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    check_example(dataset[i]);
    by_class[static_cast<std::size_t>(dataset[i].y)].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw DegenerateDataset("training set holds a single class; refusing to train");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<Example> train_set;
  std::vector<Example> val_set;
  for (auto& idx : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n = static_cast<long>(idx.size());
    long k = std::lround(cfg.val_fraction * static_cast<double>(n));
    k = std::clamp(k, n >= 2 ? 1L : 0L, n - 1);
    for (long i = 0; i < n; ++i) {
      (i < k ? val_set : train_set).push_back(dataset[idx[static_cast<std::size_t>(i)]]);
    }
  }

  TrainReport report;
  report.train_count = static_cast<std::int64_t>(train_set.size());
  report.val_count = static_cast<std::int64_t>(val_set.size());

  std::array<double, 2> count{0.0, 0.0};
  for (const auto& e : train_set) count[static_cast<std::size_t>(e.y)] += 1.0;
  const double n_train = count[0] + count[1];
  if (std::min(count[0], count[1]) / n_train < cfg.imbalance_threshold) {
    report.class_weighted = true;
    for (auto& e : train_set) {
      e.weight *= n_train / (2.0 * count[static_cast<std::size_t>(e.y)]);
    }
  }

  MlpModel model = init_model(rng(), cfg.dims);
  model.threshold = cfg.threshold;
  AdamState adam{Gradients::zeros_like(model), Gradients::zeros_like(model), 0};

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Example> batch;
  batch.reserve(static_cast<std::size_t>(cfg.batch_size));

  MlpModel best = model;
  double best_val = -1.0;
  const auto& eval_set = val_set.empty() ? train_set : val_set;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      double w = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(train_set[order[i]]);
        w += batch.back().weight;
      }
      Gradients g = Gradients::zeros_like(model);
      kernels::parallel::loss_grad_sum(model, batch, g);
      g.scale(1.0 / w);
      apply_update(model, g, cfg, adam);
    }
    EpochStats stats{epoch, mean_loss(model, train_set), accuracy(model, eval_set)};
    report.epochs.push_back(stats);
    if (stats.val_accuracy > best_val) {
      best_val = stats.val_accuracy;
      best = model;
      report.best_epoch = epoch;
    }
  }

  report.val_accuracy = best_val;
  report.train_loss = mean_loss(best, train_set);
  report.train_accuracy = accuracy(best, train_set);

  best.trained_on.sample_count = static_cast<std::int64_t>(dataset.size());
  best.trained_on.interference_count = static_cast<std::int64_t>(by_class[1].size());
  best.trained_on.clean_count = static_cast<std::int64_t>(by_class[0].size());
  return {std::move(best), std::move(report)};
}

std::string model_to_json(const MlpModel& m) {
  json doc;
  doc["format"] = "sajd-mlp";
  doc["format_version"] = 1;
  doc["version"] = m.version;
  doc["threshold"] = m.threshold;
  doc["dims"] = m.dims();
  json acts = json::array();
  for (const auto& l : m.layers) acts.push_back(std::string(to_string(l.activation)));
  doc["activations"] = acts;
  json norm = json::array();
  for (int i = 0; i < kNumFeatures; ++i) {
    norm.push_back({{"feature", kFeatureNames[static_cast<std::size_t>(i)]},
                    {"offset", m.norm[static_cast<std::size_t>(i)].offset},
                    {"scale", m.norm[static_cast<std::size_t>(i)].scale}});
  }
  doc["normalization"] = norm;
  doc["trained_on"] = {{"sample_count", m.trained_on.sample_count},
                       {"clean_count", m.trained_on.clean_count},
                       {"interference_count", m.trained_on.interference_count},
                       {"first_seq", m.trained_on.first_seq},
                       {"last_seq", m.trained_on.last_seq}};
  json layers = json::array();
  for (const auto& l : m.layers) layers.push_back({{"weights", l.weights}, {"biases", l.biases}});
  doc["layers"] = layers;
  return doc.dump(1);
}

MlpModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model file: expected a JSON object");
  for (const char* key : {"format", "version", "threshold", "dims", "activations", "normalization", "layers"}) {
    if (!doc.contains(key)) throw SchemaError(std::string("model file: missing field '") + key + "'");
  }
  if (doc["format"] != "sajd-mlp") throw SchemaError("model file: not a sajd-mlp document");

  try {
    const auto dims = doc["dims"].get<std::vector<int>>();
    std::vector<Activation> acts;
    for (const auto& a : doc["activations"]) acts.push_back(parse_activation(a.get<std::string>()));
    if (dims.size() < 2 || acts.size() != dims.size() - 1) {
      throw DimensionError("model file: " + std::to_string(acts.size()) +
                           " activations for " + std::to_string(dims.size()) + " dims");
    }
    MlpModel m = shaped(dims, acts);
    m.version = doc["version"].get<std::int64_t>();
    m.threshold = doc["threshold"].get<double>();

    const auto& norm = doc["normalization"];
    if (!norm.is_array() || norm.size() != kNumFeatures) {
      throw SchemaError("model file: normalization must list 3 features");
    }
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      if (norm[i].at("feature").get<std::string>() != kFeatureNames[i]) {
        throw SchemaError("model file: normalization feature " + std::to_string(i) + " must be " +
                          kFeatureNames[i]);
      }
      m.norm[i] = {norm[i].at("offset").get<double>(), norm[i].at("scale").get<double>()};
    }

    if (doc.contains("trained_on")) {
      const auto& t = doc["trained_on"];
      m.trained_on.sample_count = t.value("sample_count", std::int64_t{0});
      m.trained_on.clean_count = t.value("clean_count", std::int64_t{0});
      m.trained_on.interference_count = t.value("interference_count", std::int64_t{0});
      m.trained_on.first_seq = t.value("first_seq", std::int64_t{0});
      m.trained_on.last_seq = t.value("last_seq", std::int64_t{0});
    }

    const auto& layers = doc["layers"];
    if (!layers.is_array() || layers.size() != m.layers.size()) {
      throw DimensionError("model file: expected " + std::to_string(m.layers.size()) +
                           " layers, found " + std::to_string(layers.size()));
    }
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      m.layers[l].weights = layers[l].at("weights").get<std::vector<double>>();
      m.layers[l].biases = layers[l].at("biases").get<std::vector<double>>();
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model file: ") + e.what());
  }
}

void save_model(const MlpModel& m, const std::filesystem::path& path) {
  m.validate();
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model file " + tmp);
    out << model_to_json(m) << '\n';
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace sajd
