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
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sajd/error.hpp"
#include "sajd/types.hpp"

namespace sajd {

enum class Activation { Relu, Sigmoid, Identity };

std::string_view to_string(Activation a);

class UnknownActivation : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

/// Throws UnknownActivation for unknown names.
Activation parse_activation(std::string_view name);

/// Dense layer y = act(W x + b), W row-major with shape out x in.
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> biases;
  Activation activation = Activation::Relu;
};

/// Affine feature scaling: (x + offset) * scale.
struct FeatureNorm {
  double offset = 0.0;
  double scale = 1.0;
};

inline constexpr int kNumFeatures = 3;

/// Detector inputs in model order.
struct Features {
  double snr_db = 0.0;
  double bler = 0.0;
  double mcs = 0.0;
};

inline Features features_of(const KpiObservation& o) {
  return {o.snr_db, o.bler, static_cast<double>(o.mcs)};
}

/// Provenance recorded in the model file. Scenario coverage is expressed as
/// the seq range and class balance the model was fitted on; scenario ids are
/// simulator ground truth and never reach the training path.
struct TrainedOn {
  std::int64_t sample_count = 0;
  std::int64_t clean_count = 0;
  std::int64_t interference_count = 0;
  std::int64_t first_seq = 0;
  std::int64_t last_seq = 0;
};

struct MlpModel {
  std::vector<DenseLayer> layers;
  /// snr_db, bler, mcs
  std::array<FeatureNorm, kNumFeatures> norm{{{10.0, 1.0 / 50.0}, {0.0, 1.0}, {0.0, 1.0 / 28.0}}};
  double threshold = 0.5;
  std::int64_t version = 0;
  TrainedOn trained_on;

  std::vector<int> dims() const;
  std::size_t parameter_count() const;
  /// Throws DimensionError/ValidationError when the chain or values are bad.
  void validate() const;
};

inline const std::vector<int> kDefaultDims{3, 16, 8, 1};

/// Architecture with every weight and bias zero.
MlpModel zero_model(const std::vector<int>& dims = kDefaultDims,
                    const std::vector<Activation>& acts = {});
/// He-uniform init for ReLU layers, Xavier-uniform otherwise; biases zero.
MlpModel init_model(std::uint64_t seed, const std::vector<int>& dims = kDefaultDims,
                    const std::vector<Activation>& acts = {});

std::array<double, kNumFeatures> normalize(const MlpModel& m, const Features& f);

/// Pre-sigmoid output. Throws ValidationError for non-finite features.
double logit(const MlpModel& m, const Features& f);
double forward(const MlpModel& m, const Features& f);
inline Verdict verdict_for(const MlpModel& m, double prob) {
  return prob >= m.threshold ? Verdict::Interference : Verdict::Clean;
}

double sigmoid(double z);
/// Binary cross-entropy evaluated from the logit, stable for large |z|.
double bce_from_logit(double z, int label);

struct Example {
  Features x;
  int y = 0;
  double weight = 1.0;
};

/// Same shapes as the model's layers.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const MlpModel& m);
  void add(const Gradients& other);
  void scale(double s);
};

struct LossGrad {
  double loss = 0.0;
  Gradients grad;
};

/// Weighted mean BCE over the batch and its exact gradient.
LossGrad loss_and_grad(const MlpModel& m, std::span<const Example> batch);

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-2;
  Optimizer optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
  double val_fraction = 0.2;
  /// Inverse-frequency weighting kicks in below this minority share.
  double imbalance_threshold = 0.3;
  std::vector<int> dims = kDefaultDims;
  double threshold = 0.5;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  std::int64_t train_count = 0;
  std::int64_t val_count = 0;
  bool class_weighted = false;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

/// Raised when the dataset has a single class or fewer than 10 examples.
class DegenerateDataset : public Error {
 public:
  using Error::Error;
};

/// Stratified split, minibatch training, best-validation-epoch checkpoint.
/// Bit-reproducible for a fixed seed.
TrainResult train(std::span<const Example> dataset, const TrainConfig& cfg);

double accuracy(const MlpModel& m, std::span<const Example> data);

std::string model_to_json(const MlpModel& m);
MlpModel model_from_json(const std::string& text);
void save_model(const MlpModel& m, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace sajd
