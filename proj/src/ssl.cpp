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

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixsemi/error.hpp"
#include "mixsemi/metrics.hpp"
#include "mixsemi/ssl.hpp"

namespace mixsemi {

void SslConfig::validate(std::size_t boundary_count) const {
  validate_layers(mix_layers, boundary_count);
  if (!(alpha_input > 0.0) || !(alpha_latent > 0.0)) throw ConfigError("alpha values must be positive");
  if (!(lambda_u >= 0.0)) throw ConfigError("lambda_u must be non-negative");
  if (guess_copies < 1) throw ConfigError("guess_copies (M) must be at least 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(lr_decay_factor > 1.0)) throw ConfigError("lr_decay_factor must exceed 1");
  if (batch_labeled < 1 || batch_unlabeled < 1) throw ConfigError("batch sizes must be positive");
  if (fixed_lambda && !(*fixed_lambda >= 0.5 && *fixed_lambda <= 1.0)) {
    throw ConfigError("a pinned mixing coefficient must lie in [0.5, 1]");
  }
}

Tensor predict(const LayeredNetwork& net, const Tensor& x, Task task) {
  const Tensor logits = net.logits(x);
  return task == Task::kMultiClass ? softmax_rows(logits) : sigmoid(logits);
}

GuessedLabels guess_labels(const Predictor& predict_fn, const Tensor& u_batch, std::size_t copies,
                           const AugmentPolicy& policy, Rng& rng) {
  if (copies < 1) throw ParameterError("label guessing needs at least one copy (M >= 1)");
  GuessedLabels g;
  g.copies.reserve(copies);
  for (std::size_t m = 0; m < copies; ++m) {
    g.copies.push_back(policy.apply(u_batch, rng));
    const Tensor p = predict_fn(g.copies.back());
    if (m == 0) {
      g.q = p;
      continue;
    }
    // Running mean: exact when every copy predicts the same values.
    const double inv = 1.0 / static_cast<double>(m + 1);
    for (std::size_t k = 0; k < p.size(); ++k) g.q[k] += (p[k] - g.q[k]) * inv;
  }
  return g;
}

GuessedLabels guess_labels(const LayeredNetwork& net, const Tensor& u_batch, std::size_t copies,
                           const AugmentPolicy& policy, Task task, Rng& rng) {
  return guess_labels([&](const Tensor& x) { return predict(net, x, task); }, u_batch, copies, policy, rng);
}

Var supervised_loss(Var logits, const Tensor& mixed_labels, Task task) {
  if (logits.value().rows() == 0) {
    spdlog::warn("supervised loss over an empty near-labeled subset; using 0");
    return logits.tape()->constant(Tensor::scalar(0.0));
  }
  return task == Task::kMultiClass ? ad::soft_cross_entropy(logits, mixed_labels)
                                   : ad::binary_cross_entropy(logits, mixed_labels);
}

Var unsupervised_loss(Var logits, const Tensor& mixed_labels, Task task) {
  if (logits.value().rows() == 0) {
    spdlog::warn("unsupervised loss over an empty near-unlabeled subset; using 0");
    return logits.tape()->constant(Tensor::scalar(0.0));
  }
  const Var probs = task == Task::kMultiClass ? ad::softmax_rows(logits) : ad::sigmoid(logits);
  return ad::l2_loss(probs, mixed_labels);
}

Var total_loss(Var loss_x, Var loss_u, double lambda_u) { return ad::add(loss_x, ad::scale(loss_u, lambda_u)); }

double total_loss(double loss_x, double loss_u, double lambda_u) { return loss_x + lambda_u * loss_u; }

LossTerms mixed_loss(Tape& tape, const LayeredNetwork& net, const PairedBatch& pairs, std::size_t layer,
                     const std::vector<double>& lambda_prime, double lambda_u, Task task) {
  const std::size_t n = pairs.x1.rows();
  Shape in_shape{n};
  in_shape.insert(in_shape.end(), net.arch().input.begin(), net.arch().input.end());
  const Var x = tape.constant(pairs.x1.reshaped(in_shape));

  // x2 is a permutation of the same pool, so e_l(x2) is a row gather of e_l(x1).
  const Var h1 = net.forward_to(tape, layer, x);
  const Var h2 = ad::gather_rows(h1, pairs.partner);
  const Var mixed = ad::lerp_rows(lambda_prime, h1, h2);
  const Tensor mixed_labels = mix_rows(lambda_prime, pairs.y1, pairs.y2());
  const Var logits = net.forward_from(tape, layer, mixed);

  std::vector<std::size_t> near_l, near_u;
  for (std::size_t i = 0; i < n; ++i) (pairs.origin[i] == Origin::kLabeled ? near_l : near_u).push_back(i);

  LossTerms terms;
  terms.loss_x = near_l.empty() ? tape.constant(Tensor::scalar(0.0))
                                : supervised_loss(ad::gather_rows(logits, near_l), mixed_labels.gather_rows(near_l), task);
  terms.loss_u = near_u.empty()
                     ? tape.constant(Tensor::scalar(0.0))
                     : unsupervised_loss(ad::gather_rows(logits, near_u), mixed_labels.gather_rows(near_u), task);
  terms.total = total_loss(terms.loss_x, terms.loss_u, lambda_u);
  return terms;
}

namespace {

void apply_update(LayeredNetwork& net, const Tape& tape, const SslConfig& config, double lr) {
  const std::vector<Tensor> grads = tape.param_grads(net.params());
  if (config.optimizer == OptimizerKind::kAdam) {
    adam_step(net.params(), grads, lr);
  } else {
    sgd_step(net.params(), grads, lr);
  }
}

Tensor with_batch_shape(const Tensor& x, const Architecture& arch) {
  Shape s{x.rows()};
  s.insert(s.end(), arch.input.begin(), arch.input.end());
  return x.reshaped(s);
}

}  // namespace

StepResult train_step(LayeredNetwork& net, const LabeledBatch& labeled, const Tensor& unlabeled,
                      const SslConfig& config, double lr, Rng& rng) {
  if (labeled.x.rows() == 0) throw ParameterError("train_step needs a nonempty labeled batch");
  LabeledBatch lab{with_batch_shape(labeled.x, net.arch()), labeled.y};
  if (config.augment_labeled) lab.x = config.augment.apply(lab.x, rng);

  // With lambda_u == 0 the unlabeled rows cannot affect the update; leave them out.
  LabeledBatch pool_u{lab.x.row_slice(0, 0), lab.y.row_slice(0, 0)};
  if (config.lambda_u > 0.0 && unlabeled.rows() > 0) {
    const Tensor u = with_batch_shape(unlabeled, net.arch());
    GuessedLabels g = guess_labels(net, u, config.guess_copies, config.augment, config.task, rng);
    std::vector<Tensor> ys(config.guess_copies, g.q);
    pool_u.x = concat_rows(g.copies);
    pool_u.y = concat_rows(ys);
  }
  const PairedBatch pairs = assemble_pairs(lab, pool_u, rng);

  const std::size_t layer = select_layer(config.mix_layers, rng);
  const double alpha = layer == 0 ? config.alpha_input : config.alpha_latent;
  std::vector<double> weights(pairs.x1.rows());
  if (config.fixed_lambda) {
    std::fill(weights.begin(), weights.end(), *config.fixed_lambda);
  } else if (config.lambda_per_example) {
    for (double& w : weights) w = MixCoefficient::draw(alpha, rng).lambda_prime;
  } else {
    std::fill(weights.begin(), weights.end(), MixCoefficient::draw(alpha, rng).lambda_prime);
  }

  Tape tape;
  const LossTerms terms = mixed_loss(tape, net, pairs, layer, weights, config.lambda_u, config.task);
  tape.backward(terms.total);
  apply_update(net, tape, config, lr);
  return StepResult{terms.loss_x.value()[0], terms.loss_u.value()[0], layer, weights.front()};
}

double supervised_step(LayeredNetwork& net, const LabeledBatch& labeled, const SslConfig& config, double lr,
                       Rng& rng) {
  Tensor x = with_batch_shape(labeled.x, net.arch());
  if (config.augment_labeled) x = config.augment.apply(x, rng);
  Tape tape;
  const Var loss = supervised_loss(net.forward(tape, tape.constant(std::move(x))), labeled.y, config.task);
  tape.backward(loss);
  apply_update(net, tape, config, lr);
  return loss.value()[0];
}

double lr_at(std::size_t epoch, const SslConfig& config) {
  double lr = config.lr;
  for (std::size_t e : config.lr_decay_epochs)
    if (e <= epoch) lr /= config.lr_decay_factor;
  return lr;
}

double validation_metric(const LayeredNetwork& net, const Dataset& data, Task task) {
  const Tensor probs = predict(net, data.inputs, task);
  if (task == Task::kMultiClass) return accuracy(probs, data.labels);
  try {
    return mean_auroc(probs, data.labels).mean;
  } catch (const UndefinedMetricError& e) {
    spdlog::warn("validation metric undefined ({}); using 0", e.what());
    return 0.0;
  }
}

TrainResult train(const Architecture& arch, const SslConfig& config, const TrainData& data) {
  LayeredNetwork net = LayeredNetwork::build(arch, config.seed);
  config.validate(net.boundary_count());
  if (data.labeled.size() == 0) throw ParameterError("labeled partition is empty");
  if (data.validation.size() == 0) throw ParameterError("validation partition is empty");
  if (config.lambda_u > 0.0 && data.unlabeled.size() == 0) {
    throw ParameterError("unlabeled partition is empty but lambda_u > 0");
  }
  if (data.labeled.classes() != net.output_width()) {
    throw DimensionError("network emits " + std::to_string(net.output_width()) + " outputs for " +
                         std::to_string(data.labeled.classes()) + " classes");
  }

  TrainResult result{net, {}};
  if (config.epochs == 0) return result;

  Rng rng = make_rng(config.seed, 1);
  const std::size_t n_l = data.labeled.size();
  const std::size_t n_u = data.unlabeled.size();
  const std::size_t bl = std::min(config.batch_labeled, n_l);
  const std::size_t steps =
      n_u > 0 ? (n_u + config.batch_unlabeled - 1) / config.batch_unlabeled : (n_l + bl - 1) / bl;

  std::vector<std::size_t> l_order(n_l), u_order(n_u);
  std::iota(l_order.begin(), l_order.end(), std::size_t{0});
  std::iota(u_order.begin(), u_order.end(), std::size_t{0});
  std::shuffle(l_order.begin(), l_order.end(), rng);
  std::size_t l_cursor = 0;

  double best_metric = -1.0;
  std::vector<double> best_params = net.params().flatten();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    std::shuffle(u_order.begin(), u_order.end(), rng);
    double sum_x = 0.0, sum_u = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      std::vector<std::size_t> li(bl);
      for (std::size_t& i : li) {
        if (l_cursor == n_l) {
          std::shuffle(l_order.begin(), l_order.end(), rng);
          l_cursor = 0;
        }
        i = l_order[l_cursor++];
      }
      const LabeledBatch lab{data.labeled.inputs.gather_rows(li), data.labeled.labels.gather_rows(li)};
      Tensor u_batch;
      if (n_u > 0) {
        const std::size_t lo = s * config.batch_unlabeled;
        const std::size_t hi = std::min(n_u, lo + config.batch_unlabeled);
        u_batch = data.unlabeled.inputs.gather_rows(std::span(u_order).subspan(lo, hi - lo));
      }
      const StepResult r = train_step(net, lab, u_batch, config, lr, rng);
      sum_x += r.loss_x;
      sum_u += r.loss_u;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss_x = sum_x / static_cast<double>(steps);
    rec.loss_u = sum_u / static_cast<double>(steps);
    rec.loss_total = total_loss(rec.loss_x, rec.loss_u, config.lambda_u);
    rec.lr = lr;
    rec.val_metric = validation_metric(net, data.validation, config.task);
    result.history.epochs.push_back(rec);
    if (rec.val_metric >= best_metric) {
      best_metric = rec.val_metric;
      result.history.best_epoch = epoch;
      best_params = net.params().flatten();
    }
    spdlog::debug("epoch {} loss_x {:.6f} loss_u {:.6f} val {:.4f}", epoch, rec.loss_x, rec.loss_u, rec.val_metric);
  }
  net.params().assign_flat(best_params);
  result.net = std::move(net);
  return result;
}

}  // namespace mixsemi
