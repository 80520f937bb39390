/**
 * Copyright 2026 The MixSemi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mixsemi/autodiff.hpp"
#include "mixsemi/data.hpp"
#include "mixsemi/mixing.hpp"
#include "mixsemi/network.hpp"

namespace mixsemi {

enum class OptimizerKind { kAdam, kSgd };

struct SslConfig {
  std::vector<std::size_t> mix_layers{0, 2, 4};  // S
  double alpha_input = 1.0;
  double alpha_latent = 2.0;
  double lambda_u = 75.0;
  std::size_t guess_copies = 2;  // M
  std::size_t epochs = 256;
  double lr = 1e-4;
  std::vector<std::size_t> lr_decay_epochs{50, 125};
  double lr_decay_factor = 10.0;
  std::size_t batch_labeled = 32;
  std::size_t batch_unlabeled = 32;
  Task task = Task::kMultiClass;
  AugmentPolicy augment{};
  bool augment_labeled = true;
  /// Pins the folded coefficient instead of drawing it (1 disables mixing).
  std::optional<double> fixed_lambda;
  bool lambda_per_example = false;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 0;

  /// Throws ConfigError / ParameterError on an unusable combination.
  void validate(std::size_t boundary_count) const;

  friend bool operator==(const SslConfig&, const SslConfig&) = default;
};

/// Softmax rows (multi-class) or elementwise sigmoid (multi-label) of logits.
Tensor predict(const LayeredNetwork& net, const Tensor& x, Task task);

struct GuessedLabels {
  Tensor q;                    // [batch x classes]
  std::vector<Tensor> copies;  // the M augmented views that were scored
};

using Predictor = std::function<Tensor(const Tensor&)>;

/// q = mean over M augmented copies of predict(copy). No gradient is recorded.
GuessedLabels guess_labels(const Predictor& predict_fn, const Tensor& u_batch, std::size_t copies,
                           const AugmentPolicy& policy, Rng& rng);
GuessedLabels guess_labels(const LayeredNetwork& net, const Tensor& u_batch, std::size_t copies,
                           const AugmentPolicy& policy, Task task, Rng& rng);

/// Cross-entropy with soft targets (multi-class) or binary cross-entropy (multi-label).
Var supervised_loss(Var logits, const Tensor& mixed_labels, Task task);
/// Mean squared error between predicted probabilities and targets, per row and class.
Var unsupervised_loss(Var logits, const Tensor& mixed_labels, Task task);
Var total_loss(Var loss_x, Var loss_u, double lambda_u);
double total_loss(double loss_x, double loss_u, double lambda_u);

struct LossTerms {
  Var loss_x;
  Var loss_u;
  Var total;
};

/// Encodes the pool to boundary `layer`, mixes each row with its partner
/// using `lambda_prime` (one weight per row), decodes, and routes rows to the
/// supervised or unsupervised loss by origin. An empty subset contributes 0.
LossTerms mixed_loss(Tape& tape, const LayeredNetwork& net, const PairedBatch& pairs, std::size_t layer,
                     const std::vector<double>& lambda_prime, double lambda_u, Task task);

struct StepResult {
  double loss_x = 0.0;
  double loss_u = 0.0;
  std::size_t layer = 0;
  double lambda_prime = 1.0;  // first row's coefficient when drawn per example
};

/// One optimization step: augment the labeled batch, guess labels, pair,
/// pick a layer, mix, route losses, backpropagate and update.
StepResult train_step(LayeredNetwork& net, const LabeledBatch& labeled, const Tensor& unlabeled,
                      const SslConfig& config, double lr, Rng& rng);

/// Ordinary supervised step on the (augmented) labeled batch.
double supervised_step(LayeredNetwork& net, const LabeledBatch& labeled, const SslConfig& config, double lr,
                       Rng& rng);

/// lr / factor^k, k = number of decay epochs <= epoch.
double lr_at(std::size_t epoch, const SslConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss_x = 0.0;
  double loss_u = 0.0;
  double loss_total = 0.0;
  double lr = 0.0;
  double val_metric = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> best_epoch;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainData {
  Dataset labeled;
  Dataset unlabeled;
  Dataset validation;
};

struct TrainResult {
  LayeredNetwork net;
  TrainHistory history;
};

/// Accuracy (multi-class) or mean AUROC (multi-label) on `data`.
double validation_metric(const LayeredNetwork& net, const Dataset& data, Task task);

/// Runs config.epochs epochs (one epoch = one pass over the unlabeled pool)
/// and returns the parameters of the best validation epoch; ties go to the
/// later epoch.
TrainResult train(const Architecture& arch, const SslConfig& config, const TrainData& data);

}  // namespace mixsemi
