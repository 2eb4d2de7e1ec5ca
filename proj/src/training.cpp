// src/training.cpp

// Copyright 2026  The wsed authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "wsed/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wsed/errors.hpp"

namespace wsed {

namespace {

void check_targets(const Tensor &targets, const char *op) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double v = targets.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError(std::string(op) + ": targets must lie in [0, 1]");
    }
  }
}

double bce_sum(const Tensor &pred, const Tensor &targets, const char *op) {
  check_same_shape(pred, targets, op);
  check_targets(targets, op);
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double o = std::min(std::max(pred.data()[i], kBceEps), 1.0 - kBceEps);
    double p = targets.data()[i];
    loss -= p * std::log(o) + (1.0 - p) * std::log(1.0 - o);
  }
  return loss;
}

}  // namespace

double bce_clip_loss(const Tensor &pred, const Tensor &targets) {
  if (pred.rank() > 2) {
    throw DimensionError("bce_clip_loss: expected [N x K] or [K], got " +
                         shape_str(pred.shape()));
  }
  return bce_sum(pred, targets, "bce_clip_loss");
}

double bce_segment_loss(const Tensor &segment_pred,
                        const Tensor &segment_targets) {
  if (segment_pred.rank() != 2) {
    throw DimensionError("bce_segment_loss: expected [M x K], got " +
                         shape_str(segment_pred.shape()));
  }
  return bce_sum(segment_pred, segment_targets, "bce_segment_loss");
}

Tensor inherit_segment_targets(const Tensor &tags, int segments) {
  if (tags.rank() != 1) {
    throw DimensionError("inherit_segment_targets: tags must be [K], got " +
                         shape_str(tags.shape()));
  }
  if (segments < 1) {
    throw ArgumentError("inherit_segment_targets: need at least one segment");
  }
  int k = tags.dim(0);
  Tensor out({segments, k});
  for (int s = 0; s < segments; ++s) {
    for (int j = 0; j < k; ++j) out(s, j) = tags(j);
  }
  return out;
}

BalancedBatchSampler::BalancedBatchSampler(const Tensor &labels,
                                           int batch_size, uint64_t seed)
    : batch_size_(batch_size), rng_(seed) {
  if (labels.rank() != 2) {
    throw DimensionError("sampler: labels must be [N x K], got " +
                         shape_str(labels.shape()));
  }
  if (batch_size < 1) {
    throw ConfigError("sampler: batch size must be at least 1");
  }
  int n = labels.dim(0), kk = labels.dim(1);
  std::vector<long long> counts(static_cast<std::size_t>(kk), 0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kk; ++k) {
      double v = labels(i, k);
      if (v != 0.0 && v != 1.0) {
        throw ValidationError("sampler: labels must be 0 or 1");
      }
      if (v == 1.0) ++counts[static_cast<std::size_t>(k)];
    }
  }
  long long min_count = std::numeric_limits<long long>::max();
  for (int k = 0; k < kk; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) {
      throw ConfigError("sampler: class " + std::to_string(k) +
                        " has no clips");
    }
    min_count = std::min(min_count, counts[static_cast<std::size_t>(k)]);
  }

  // Each clip is owned by the rarest class it carries.
  clips_by_class_.assign(static_cast<std::size_t>(kk), {});
  for (int i = 0; i < n; ++i) {
    int owner = -1;
    for (int k = 0; k < kk; ++k) {
      if (labels(i, k) != 1.0) continue;
      if (owner < 0 || counts[static_cast<std::size_t>(k)] <
                           counts[static_cast<std::size_t>(owner)]) {
        owner = k;
      }
    }
    if (owner < 0) {
      throw ValidationError("sampler: clip " + std::to_string(i) +
                            " carries no class");
    }
    clips_by_class_[static_cast<std::size_t>(owner)].push_back(i);
  }

  weights_.assign(static_cast<std::size_t>(kk), 0);
  credits_.assign(static_cast<std::size_t>(kk), 0);
  cursor_.assign(static_cast<std::size_t>(kk), 0);
  for (int k = 0; k < kk; ++k) {
    std::size_t ku = static_cast<std::size_t>(k);
    if (clips_by_class_[ku].empty()) continue;
    weights_[ku] = std::min(5 * min_count, counts[ku]);
    weight_total_ += weights_[ku];
    rng_.shuffle(clips_by_class_[ku]);
  }
}

int BalancedBatchSampler::pick_class() {
  int best = -1;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (weights_[k] == 0) continue;
    credits_[k] += weights_[k];
    if (best < 0 || credits_[k] > credits_[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(k);
    }
  }
  credits_[static_cast<std::size_t>(best)] -= weight_total_;
  return best;
}

int BalancedBatchSampler::pick_clip(int cls) {
  std::size_t ku = static_cast<std::size_t>(cls);
  std::vector<int> &list = clips_by_class_[ku];
  if (cursor_[ku] >= list.size()) {
    rng_.shuffle(list);
    cursor_[ku] = 0;
  }
  return list[cursor_[ku]++];
}

std::vector<int> BalancedBatchSampler::next_batch() {
  std::vector<int> batch;
  batch.reserve(static_cast<std::size_t>(batch_size_));
  for (int i = 0; i < batch_size_; ++i) {
    batch.push_back(pick_clip(pick_class()));
  }
  return batch;
}

MixupResult mixup_with_lambda(const Tensor &x1, const Tensor &y1,
                              const Tensor &x2, const Tensor &y2,
                              double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ArgumentError("mixup: lambda must lie in [0, 1]");
  }
  check_same_shape(x1, x2, "mixup features");
  check_same_shape(y1, y2, "mixup targets");
  MixupResult out;
  out.lambda = lambda;
  out.x = x1;
  out.y = y1;
  for (std::size_t i = 0; i < out.x.size(); ++i) {
    out.x.data()[i] = lambda * x1.data()[i] + (1.0 - lambda) * x2.data()[i];
  }
  for (std::size_t i = 0; i < out.y.size(); ++i) {
    out.y.data()[i] = lambda * y1.data()[i] + (1.0 - lambda) * y2.data()[i];
  }
  return out;
}

MixupResult mixup(const Tensor &x1, const Tensor &y1, const Tensor &x2,
                  const Tensor &y2, double alpha, Rng &rng) {
  if (!(alpha > 0.0)) {
    throw ArgumentError("mixup: alpha must be positive");
  }
  return mixup_with_lambda(x1, y1, x2, y2, rng.beta(alpha, alpha));
}

AdamState init_adam(const std::vector<Tensor *> &params, AdamConfig config) {
  if (!(config.alpha >= 0.0) || !(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
      !(config.beta2 >= 0.0 && config.beta2 < 1.0) || !(config.eps > 0.0)) {
    throw ConfigError("adam: invalid hyperparameters");
  }
  AdamState state;
  state.config = config;
  for (const Tensor *p : params) {
    state.m.push_back(Tensor(p->shape()));
    state.v.push_back(Tensor(p->shape()));
  }
  return state;
}

void adam_step(const std::vector<Tensor *> &params,
               const std::vector<Tensor> &grads, AdamState &state,
               double alpha) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw DimensionError("adam: params, grads and state disagree in count");
  }
  double a = alpha >= 0.0 ? alpha : state.config.alpha;
  double b1 = state.config.beta1, b2 = state.config.beta2;
  state.t += 1;
  double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor &p = *params[i];
    const Tensor &g = grads[i];
    check_same_shape(p, g, "adam");
    check_finite(g, "adam gradient");
    Tensor &m = state.m[i];
    Tensor &v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      double gj = g.data()[j];
      m.data()[j] = b1 * m.data()[j] + (1.0 - b1) * gj;
      v.data()[j] = b2 * v.data()[j] + (1.0 - b2) * gj * gj;
      double mhat = m.data()[j] / corr1;
      double vhat = v.data()[j] / corr2;
      p.data()[j] -= a * mhat / (std::sqrt(vhat) + state.config.eps);
    }
  }
}

void validate(const SyntheticDatasetSpec &spec) {
  if (spec.num_classes < 1 || spec.clips_per_class < 1 || spec.frames < 1) {
    throw ConfigError("synth: classes, clips and frames must be positive");
  }
  if (spec.freq_bins < spec.num_classes) {
    throw ConfigError("synth: need at least one frequency bin per class");
  }
  if (spec.min_event_frames < 1 ||
      spec.min_event_frames > spec.max_event_frames ||
      spec.max_event_frames > spec.frames) {
    throw ConfigError("synth: event frame bounds must satisfy 1 <= min <= "
                      "max <= frames");
  }
  if (!(spec.noise_level >= 0.0) || !(spec.frame_seconds > 0.0) ||
      !(spec.extra_event_prob >= 0.0 && spec.extra_event_prob <= 1.0)) {
    throw ConfigError("synth: invalid noise, frame length or extra-event "
                      "probability");
  }
}

Tensor SyntheticDataset::label_matrix() const {
  int n = static_cast<int>(clips.size());
  int kk = spec.num_classes;
  Tensor out({std::max(n, 1), kk});
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kk; ++k) {
      out(i, k) = clips[static_cast<std::size_t>(i)]
                              .tags[static_cast<std::size_t>(k)] != 0
                      ? 1.0
                      : 0.0;
    }
  }
  return out;
}

namespace {

void add_event(SyntheticClip &clip, const SyntheticDatasetSpec &spec,
               int cls, Rng &rng) {
  int dur = rng.uniform_int(spec.min_event_frames, spec.max_event_frames);
  int onset = rng.uniform_int(0, spec.frames - dur);
  double amp = rng.uniform(0.8, 1.2);
  int rows = spec.freq_bins / spec.num_classes;
  int row0 = cls * rows;
  for (int t = onset; t < onset + dur; ++t) {
    for (int r = row0; r < row0 + rows; ++r) clip.features(t, r) += amp;
  }
  clip.tags[static_cast<std::size_t>(cls)] = 1;
  Event e;
  e.clip_id = clip.id;
  e.class_id = cls;
  e.onset_sec = onset * spec.frame_seconds;
  e.offset_sec = (onset + dur) * spec.frame_seconds;
  clip.events.push_back(e);
}

}  // namespace

SyntheticDataset synth_dataset(const SyntheticDatasetSpec &spec) {
  validate(spec);
  SyntheticDataset ds;
  ds.spec = spec;
  for (int k = 0; k < spec.num_classes; ++k) {
    ds.class_names.push_back("class_" + std::to_string(k));
  }

  Rng rng(spec.seed);
  int total = spec.num_classes * spec.clips_per_class;
  for (int i = 0; i < total; ++i) {
    SyntheticClip clip;
    std::string num = std::to_string(i);
    clip.id = "clip_" + std::string(4 - std::min<std::size_t>(4, num.size()), '0') + num;
    clip.primary_class = i % spec.num_classes;
    clip.features = Tensor({spec.frames, spec.freq_bins});
    clip.tags.assign(static_cast<std::size_t>(spec.num_classes), 0);
    if (spec.noise_level > 0.0) {
      for (std::size_t c = 0; c < clip.features.size(); ++c) {
        clip.features.data()[c] = rng.uniform(0.0, spec.noise_level);
      }
    }
    add_event(clip, spec, clip.primary_class, rng);
    if (spec.num_classes > 1 && rng.uniform() < spec.extra_event_prob) {
      int other = rng.uniform_int(0, spec.num_classes - 2);
      if (other >= clip.primary_class) ++other;
      add_event(clip, spec, other, rng);
    }
    ds.clips.push_back(std::move(clip));
  }
  return ds;
}

DatasetSplit split_dataset(const SyntheticDataset &ds,
                           double holdout_fraction) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw ArgumentError("split: holdout fraction must lie in [0, 1)");
  }
  std::vector<std::vector<int>> by_class(
      static_cast<std::size_t>(ds.spec.num_classes));
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.clips[i].primary_class)].push_back(
        static_cast<int>(i));
  }
  DatasetSplit split;
  for (const std::vector<int> &list : by_class) {
    if (list.empty()) continue;
    std::size_t h = static_cast<std::size_t>(
        std::ceil(holdout_fraction * static_cast<double>(list.size())));
    if (h >= list.size()) h = list.size() - 1;
    std::size_t cut = list.size() - h;
    for (std::size_t i = 0; i < list.size(); ++i) {
      (i < cut ? split.train : split.holdout).push_back(list[i]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  return split;
}

namespace {

Tensor tags_tensor(const SyntheticClip &clip) {
  Tensor out({static_cast<int>(clip.tags.size())});
  for (std::size_t k = 0; k < clip.tags.size(); ++k) {
    out(static_cast<int>(k)) = clip.tags[k] != 0 ? 1.0 : 0.0;
  }
  return out;
}

// Mean per-clip loss of the model over the listed clips, outside any
// training tape.
double eval_loss(const ToyModel &model, const SyntheticDataset &ds,
                 const std::vector<int> &indices, const TrainConfig &cfg) {
  if (indices.empty()) return 0.0;
  double total = 0.0;
  for (int idx : indices) {
    const SyntheticClip &clip = ds.clips[static_cast<std::size_t>(idx)];
    Inference inf = run_model(model, clip.features);
    Tensor tags = tags_tensor(clip);
    if (cfg.regime == TrainRegime::kClipWise) {
      total += bce_clip_loss(inf.clip_probs, tags);
    } else {
      Tape t;
      Var seg = t.window_mean(t.constant(inf.frame_probs), cfg.segment_frames);
      int s = t.value(seg).dim(0);
      total += bce_segment_loss(t.value(seg), inherit_segment_targets(tags, s));
    }
  }
  return total / static_cast<double>(indices.size());
}

}  // namespace

TrainResult train_toy(const SyntheticDataset &ds, const TrainConfig &cfg) {
  if (ds.clips.empty()) {
    throw ValidationError("train: dataset is empty");
  }
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.learning_rate >= 0.0) ||
      !(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0) || cfg.plateau_epochs < 1 ||
      !(cfg.mixup_alpha >= 0.0)) {
    throw ConfigError("train: invalid training configuration");
  }
  if (cfg.regime == TrainRegime::kSegmentWise && cfg.segment_frames < 1) {
    throw ConfigError("train: segment_frames must be positive");
  }

  TrainResult result;
  result.split = split_dataset(ds, cfg.holdout_fraction);
  const std::vector<int> &train_idx = result.split.train;
  if (train_idx.empty()) {
    throw ValidationError("train: no training clips after the split");
  }

  Rng rng(cfg.seed);
  ToyModel model = init_toy_model(cfg.kind, cfg.aggregation,
                                  ds.spec.num_classes, ds.spec.freq_bins, rng);
  model.frame_seconds = ds.spec.frame_seconds;

  double mean = 0.0;
  std::size_t cells = 0;
  for (int idx : train_idx) {
    const Tensor &f = ds.clips[static_cast<std::size_t>(idx)].features;
    for (std::size_t i = 0; i < f.size(); ++i) mean += f.data()[i];
    cells += f.size();
  }
  mean /= static_cast<double>(cells);
  double var = 0.0;
  for (int idx : train_idx) {
    const Tensor &f = ds.clips[static_cast<std::size_t>(idx)].features;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double d = f.data()[i] - mean;
      var += d * d;
    }
  }
  double stddev = std::sqrt(var / static_cast<double>(cells));
  model.norm_mean = mean;
  model.norm_std = stddev > 1e-12 ? stddev : 1.0;

  std::vector<Tensor> normalized(ds.clips.size());
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    normalized[i] = normalize_features(model, ds.clips[i].features);
  }

  Tensor train_labels({static_cast<int>(train_idx.size()),
                       ds.spec.num_classes});
  for (std::size_t i = 0; i < train_idx.size(); ++i) {
    const SyntheticClip &clip =
        ds.clips[static_cast<std::size_t>(train_idx[i])];
    for (int k = 0; k < ds.spec.num_classes; ++k) {
      train_labels(static_cast<int>(i), k) =
          clip.tags[static_cast<std::size_t>(k)] != 0 ? 1.0 : 0.0;
    }
  }
  BalancedBatchSampler sampler(train_labels, cfg.batch_size, rng.next_u64());
  Rng mix_rng(rng.next_u64());

  std::vector<std::pair<std::string, Tensor *>> named = named_params(model);
  std::vector<Tensor *> params;
  for (auto &entry : named) params.push_back(entry.second);
  AdamConfig adam_cfg;
  adam_cfg.alpha = cfg.learning_rate;
  AdamState adam = init_adam(params, adam_cfg);

  double lr = cfg.learning_rate;
  double best_val = std::numeric_limits<double>::infinity();
  int since_improve = 0;
  long long step = 0;
  int steps_per_epoch = static_cast<int>(
      (train_idx.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
      static_cast<std::size_t>(cfg.batch_size));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    long long clip_count = 0;
    for (int s = 0; s < steps_per_epoch; ++s, ++step) {
      std::vector<int> batch = sampler.next_batch();
      Tape tape;
      ModelVars vars = lift_params(tape, model, true);
      std::vector<Var> losses;
      for (std::size_t b = 0; b < batch.size(); ++b) {
        int idx = train_idx[static_cast<std::size_t>(batch[b])];
        const SyntheticClip &clip = ds.clips[static_cast<std::size_t>(idx)];
        Tensor feat = normalized[static_cast<std::size_t>(idx)];
        Tensor target = tags_tensor(clip);
        if (cfg.mixup_alpha > 0.0) {
          int jdx = train_idx[static_cast<std::size_t>(
              batch[(b + 1) % batch.size()])];
          const SyntheticClip &other =
              ds.clips[static_cast<std::size_t>(jdx)];
          MixupResult mix = mixup(feat, target,
                                  normalized[static_cast<std::size_t>(jdx)],
                                  tags_tensor(other), cfg.mixup_alpha,
                                  mix_rng);
          feat = std::move(mix.x);
          target = std::move(mix.y);
        }
        ModelOutput out = model_forward(tape, model, vars, feat);
        if (cfg.regime == TrainRegime::kClipWise) {
          losses.push_back(tape.bce(out.clip_probs, tape.constant(target),
                                    kBceEps));
        } else {
          Var seg = tape.window_mean(out.frame_probs, cfg.segment_frames);
          Tensor seg_targets =
              inherit_segment_targets(target, tape.value(seg).dim(0));
          losses.push_back(tape.bce(seg, tape.constant(seg_targets), kBceEps));
        }
      }
      Var batch_loss = tape.add_n(losses);
      double loss_value = tape.value(batch_loss)(0);
      if (!std::isfinite(loss_value)) {
        throw TrainingError("training diverged at step " +
                            std::to_string(step));
      }
      tape.backward(batch_loss);

      std::vector<Var> pvars = param_vars(vars, model);
      std::vector<Tensor> grads;
      grads.reserve(pvars.size());
      for (Var v : pvars) grads.push_back(tape.grad(v));
      adam_step(params, grads, adam, lr);

      epoch_loss += loss_value;
      clip_count += static_cast<long long>(batch.size());
    }

    result.loss_history.push_back(epoch_loss /
                                  static_cast<double>(clip_count));
    double val = result.split.holdout.empty()
                     ? result.loss_history.back()
                     : eval_loss(model, ds, result.split.holdout, cfg);
    result.val_loss_history.push_back(val);
    result.lr_history.push_back(lr);

    if (val < best_val - 1e-9) {
      best_val = val;
      since_improve = 0;
    } else {
      ++since_improve;
      if (since_improve >= cfg.plateau_epochs) {
        lr *= cfg.lr_decay;
        since_improve = 0;
      }
    }
  }

  result.model = std::move(model);
  return result;
}

}  // namespace wsed
