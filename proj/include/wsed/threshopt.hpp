// include/wsed/threshopt.hpp

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

#ifndef WSED_THRESHOPT_HPP_
#define WSED_THRESHOPT_HPP_

#include <map>
#include <string>
#include <vector>

#include "wsed/decoding.hpp"
#include "wsed/tensor.hpp"

namespace wsed {

// Detection loss minimized over thresholds. Negative F1 turns F1
// maximization into minimization; error rate is minimized directly.
enum class ObjectiveMetric { kNegativeF1, kErrorRate };

// Tagging scores clip-level predictions with macro F1; detection decodes
// events and scores 1-second-style segments with micro statistics.
enum class ObjectiveTask { kTagging, kDetection };

// Joint mode updates all 3K thresholds together; two-pass optimizes the
// clip gates mu first, then the frame thresholds with mu frozen. Each pass
// spends the full iteration budget.
enum class OptimizeMode { kJoint, kTwoPass };

ObjectiveMetric parse_objective_metric(const std::string &name);
ObjectiveTask parse_objective_task(const std::string &name);
OptimizeMode parse_optimize_mode(const std::string &name);
std::string objective_metric_name(ObjectiveMetric metric);
std::string objective_task_name(ObjectiveTask task);
std::string optimize_mode_name(OptimizeMode mode);

// Frozen validation-set predictions plus references the objective scores
// against. Clip i owns clip_probs[i] of shape [K], frame_probs[i] of shape
// [T_i x K], and row i of the binary weak-label matrix tags [N x K].
struct ThresholdDataset {
  std::vector<std::string> clip_ids;
  std::vector<Tensor> clip_probs;
  std::vector<Tensor> frame_probs;
  Tensor tags;
  EventList reference_events;
  double frame_seconds = 0.1;

  int num_clips() const { return static_cast<int>(clip_ids.size()); }
  int num_classes() const;
  std::map<std::string, double> durations() const;
};

void validate(const ThresholdDataset &data);

struct ObjectiveSpec {
  ObjectiveMetric metric = ObjectiveMetric::kNegativeF1;
  ObjectiveTask task = ObjectiveTask::kTagging;
  OptimizeMode mode = OptimizeMode::kJoint;
  double segment_seconds = 1.0;
  const ThresholdDataset *data = nullptr;  // non-owning
  double delta = 0.05;
  int iterations = 100;
  double learning_rate = 0.01;
};

// ConfigError on delta <= 0, iterations < 1, negative learning rate,
// non-positive segment length, a missing dataset, or the error-rate metric
// paired with the tagging task (error rate is segment-based).
void validate(const ObjectiveSpec &spec);

// Scores `th` over the whole dataset. Tagging: threshold every clip and
// return minus the macro F1 against the weak labels. Detection: decode
// events per clip, grid them, and return minus the micro segment F1 or the
// micro error rate. An undefined metric (no reference activity for the
// error rate) raises ObjectiveError.
double evaluate_objective(const ThresholdSet &th, const ObjectiveSpec &spec);

// Flat parameter order: [mu_0..mu_{K-1}, tau_high_0.., tau_low_0..].
std::vector<double> pack_thresholds(const ThresholdSet &th);
ThresholdSet unpack_thresholds(const std::vector<double> &packed);

// Clamp every threshold to [0, 1], then tau_low to <= tau_high.
ThresholdSet clamp_thresholds(ThresholdSet th);

// Forward difference per coordinate: (J(theta + delta e_i) - J(theta)) /
// delta, with the baseline J(theta) evaluated once and shared. Each probe
// is clamped valid before evaluation, so a probe pushed past 1 or past its
// tau_high reads as a zero difference.
std::vector<double> numerical_gradient(const ObjectiveSpec &spec,
                                       const ThresholdSet &th);

struct OptimizeResult {
  ThresholdSet thresholds;
  double objective = 0.0;        // J at the returned thresholds
  std::vector<double> trace;     // J before each step, plus the final J
};

// Iterative moment-based descent on the packed threshold vector: each
// iteration takes one numerical gradient and one optimizer step, then
// clamps the iterate valid. Returns the best iterate ever evaluated
// (the initializer included), so the result never scores worse than
// `init`. Deterministic. Non-finite objectives raise OptimizationError
// naming the iteration.
OptimizeResult optimize_thresholds(const ObjectiveSpec &spec,
                                   const ThresholdSet &init);

}  // namespace wsed

#endif  // WSED_THRESHOPT_HPP_
