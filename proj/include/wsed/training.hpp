// include/wsed/training.hpp

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

#ifndef WSED_TRAINING_HPP_
#define WSED_TRAINING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "wsed/decoding.hpp"
#include "wsed/model.hpp"
#include "wsed/rng.hpp"
#include "wsed/tensor.hpp"

namespace wsed {

// --- losses ---

// Summed binary cross-entropy -sum[P log O + (1-P) log(1-O)] with
// predictions clamped to [kBceEps, 1 - kBceEps] before the logs.
// pred and targets are [N x K] (or both [K] for a single clip); targets
// may be fractional in [0, 1] (mixup produces such targets).
inline constexpr double kBceEps = 1e-7;
double bce_clip_loss(const Tensor &pred, const Tensor &targets);

// Identical functional form over [M x K] segment predictions whose
// targets inherit the clip tags.
double bce_segment_loss(const Tensor &segment_pred,
                        const Tensor &segment_targets);

// Each of the clip's tag rows repeated `segments` times -> [S x K].
Tensor inherit_segment_targets(const Tensor &tags, int segments);

// --- balanced sampling ---

// Deterministic weighted round-robin over classes with per-class weight
// min(5 * min_count, count); each clip is scheduled under the rarest of
// its classes. Integer credit arithmetic keeps the schedule exactly
// periodic, so over windows of whole periods the emitted class ratio
// meets max/min <= 5 exactly; other windows can overshoot by at most one
// draw per class.
class BalancedBatchSampler {
 public:
  // labels: binary [N x K]; a class with no clip raises ConfigError.
  BalancedBatchSampler(const Tensor &labels, int batch_size, uint64_t seed);

  std::vector<int> next_batch();
  const std::vector<long long> &class_weights() const { return weights_; }

 private:
  int pick_class();
  int pick_clip(int cls);

  int batch_size_;
  std::vector<long long> weights_;
  std::vector<long long> credits_;
  long long weight_total_ = 0;
  std::vector<std::vector<int>> clips_by_class_;
  std::vector<std::size_t> cursor_;
  Rng rng_;
};

// --- mixup ---

struct MixupResult {
  Tensor x;
  Tensor y;
  double lambda = 1.0;
};

// lambda ~ Beta(alpha, alpha); x = lambda x1 + (1 - lambda) x2, same for y.
MixupResult mixup(const Tensor &x1, const Tensor &y1, const Tensor &x2,
                  const Tensor &y2, double alpha, Rng &rng);
MixupResult mixup_with_lambda(const Tensor &x1, const Tensor &y1,
                              const Tensor &x2, const Tensor &y2,
                              double lambda);

// --- Adam ---

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  long long t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

AdamState init_adam(const std::vector<Tensor *> &params, AdamConfig config);

// One bias-corrected moment update over every parameter tensor.
// Non-finite gradients raise NumericError. `alpha` overrides the stored
// learning rate when >= 0 (the trainer's schedule mutates it per epoch).
void adam_step(const std::vector<Tensor *> &params,
               const std::vector<Tensor> &grads, AdamState &state,
               double alpha = -1.0);

// --- synthetic data ---

struct SyntheticDatasetSpec {
  int num_classes = 4;
  int clips_per_class = 50;
  int frames = 80;
  int freq_bins = 16;
  uint64_t seed = 1;
  int min_event_frames = 8;
  int max_event_frames = 24;
  double noise_level = 0.05;
  double frame_seconds = 0.1;
  // Chance that a clip carries one extra event of another class.
  double extra_event_prob = 0.3;
};

void validate(const SyntheticDatasetSpec &spec);

struct SyntheticClip {
  std::string id;
  int primary_class = 0;
  Tensor features;        // [T x F]
  std::vector<int> tags;  // length K, 0/1
  EventList events;       // strong reference with clip_id filled
};

struct SyntheticDataset {
  SyntheticDatasetSpec spec;
  std::vector<std::string> class_names;
  std::vector<SyntheticClip> clips;

  Tensor label_matrix() const;  // [N x K]
  double clip_duration() const {
    return spec.frames * spec.frame_seconds;
  }
};

// Each class owns a disjoint frequency band; events add a positive
// rectangular pattern to that band over uniform-random frame windows, on
// top of uniform noise in [0, noise_level). Identical specs produce
// bit-identical datasets.
SyntheticDataset synth_dataset(const SyntheticDatasetSpec &spec);

// Last ceil(fraction * count) clips of every primary class, in index order.
struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> holdout;
};
DatasetSplit split_dataset(const SyntheticDataset &ds, double holdout_fraction);

// --- trainer ---

enum class TrainRegime { kClipWise, kSegmentWise };

struct TrainConfig {
  ModelKind kind = ModelKind::kCnnTransformer;
  AggregationMethod aggregation = AggregationMethod::kAttention;
  TrainRegime regime = TrainRegime::kClipWise;
  int segment_frames = 10;
  int epochs = 200;
  int batch_size = 8;
  double learning_rate = 1e-3;
  double lr_decay = 0.9;
  int plateau_epochs = 5;
  double mixup_alpha = 0.0;  // 0 disables mixup
  double holdout_fraction = 0.25;
  uint64_t seed = 1;
};

struct TrainResult {
  ToyModel model;
  DatasetSplit split;
  std::vector<double> loss_history;      // mean training loss per clip
  std::vector<double> val_loss_history;  // mean holdout loss per clip
  std::vector<double> lr_history;
};

// Deterministic full pipeline: split, normalize, init, balanced batches,
// Adam, plateau-decayed learning rate. Divergence raises TrainingError
// naming the step.
TrainResult train_toy(const SyntheticDataset &ds, const TrainConfig &cfg);

}  // namespace wsed

#endif  // WSED_TRAINING_HPP_
