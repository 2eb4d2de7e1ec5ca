// src/threshopt.cpp

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

#include "wsed/threshopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "wsed/errors.hpp"
#include "wsed/metrics.hpp"
#include "wsed/training.hpp"

namespace wsed {

ObjectiveMetric parse_objective_metric(const std::string &name) {
  if (name == "f1") return ObjectiveMetric::kNegativeF1;
  if (name == "er") return ObjectiveMetric::kErrorRate;
  throw ArgumentError("unknown objective metric '" + name +
                      "', expected f1 or er");
}

ObjectiveTask parse_objective_task(const std::string &name) {
  if (name == "at") return ObjectiveTask::kTagging;
  if (name == "sed") return ObjectiveTask::kDetection;
  throw ArgumentError("unknown objective task '" + name +
                      "', expected at or sed");
}

OptimizeMode parse_optimize_mode(const std::string &name) {
  if (name == "joint") return OptimizeMode::kJoint;
  if (name == "two-pass") return OptimizeMode::kTwoPass;
  throw ArgumentError("unknown optimize mode '" + name +
                      "', expected joint or two-pass");
}

std::string objective_metric_name(ObjectiveMetric metric) {
  return metric == ObjectiveMetric::kNegativeF1 ? "f1" : "er";
}

std::string objective_task_name(ObjectiveTask task) {
  return task == ObjectiveTask::kTagging ? "at" : "sed";
}

std::string optimize_mode_name(OptimizeMode mode) {
  return mode == OptimizeMode::kJoint ? "joint" : "two-pass";
}

int ThresholdDataset::num_classes() const {
  if (clip_probs.empty()) return 0;
  return clip_probs[0].dim(0);
}

std::map<std::string, double> ThresholdDataset::durations() const {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < clip_ids.size(); ++i) {
    out[clip_ids[i]] = frame_probs[i].dim(0) * frame_seconds;
  }
  return out;
}

void validate(const ThresholdDataset &data) {
  if (data.clip_ids.empty()) {
    throw ValidationError("threshold dataset is empty");
  }
  if (data.clip_probs.size() != data.clip_ids.size() ||
      data.frame_probs.size() != data.clip_ids.size()) {
    throw DimensionError("threshold dataset has " +
                         std::to_string(data.clip_ids.size()) + " ids, " +
                         std::to_string(data.clip_probs.size()) +
                         " clip rows, " +
                         std::to_string(data.frame_probs.size()) +
                         " frame matrices");
  }
  if (!(data.frame_seconds > 0.0)) {
    throw ValidationError("threshold dataset frame_seconds must be positive");
  }
  int k = data.num_classes();
  std::set<std::string> ids;
  for (std::size_t i = 0; i < data.clip_ids.size(); ++i) {
    if (!ids.insert(data.clip_ids[i]).second) {
      throw ValidationError("duplicate clip id '" + data.clip_ids[i] +
                            "' in threshold dataset");
    }
    if (data.clip_probs[i].rank() != 1 || data.clip_probs[i].dim(0) != k) {
      throw DimensionError("clip probabilities for '" + data.clip_ids[i] +
                           "' must have shape [" + std::to_string(k) + "]");
    }
    if (data.frame_probs[i].rank() != 2 || data.frame_probs[i].dim(1) != k) {
      throw DimensionError("frame probabilities for '" + data.clip_ids[i] +
                           "' must have shape [T x " + std::to_string(k) +
                           "]");
    }
    for (std::size_t j = 0; j < data.clip_probs[i].size(); ++j) {
      double v = data.clip_probs[i].data()[j];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("clip probability " + std::to_string(v) +
                              " outside [0, 1]");
      }
    }
    for (std::size_t j = 0; j < data.frame_probs[i].size(); ++j) {
      double v = data.frame_probs[i].data()[j];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("frame probability " + std::to_string(v) +
                              " outside [0, 1]");
      }
    }
  }
  if (data.tags.rank() != 2 || data.tags.dim(0) != data.num_clips() ||
      data.tags.dim(1) != k) {
    throw DimensionError("weak label matrix must have shape [" +
                         std::to_string(data.num_clips()) + " x " +
                         std::to_string(k) + "], got " +
                         shape_str(data.tags.shape()));
  }
  for (std::size_t i = 0; i < data.tags.size(); ++i) {
    double v = data.tags.data()[i];
    if (v != 0.0 && v != 1.0) {
      throw ValidationError("weak labels must be 0 or 1");
    }
  }
  for (const Event &e : data.reference_events) {
    if (!ids.count(e.clip_id)) {
      throw ValidationError("reference event for unknown clip '" + e.clip_id +
                            "'");
    }
    if (e.class_id < 0 || e.class_id >= k) {
      throw ValidationError("reference event class " +
                            std::to_string(e.class_id) + " outside [0, " +
                            std::to_string(k) + ")");
    }
  }
}

void validate(const ObjectiveSpec &spec) {
  if (!(spec.delta > 0.0)) {
    throw ConfigError("objective delta must be positive");
  }
  if (spec.iterations < 1) {
    throw ConfigError("objective iteration budget must be at least 1");
  }
  if (spec.learning_rate < 0.0) {
    throw ConfigError("objective learning rate must be non-negative");
  }
  if (!(spec.segment_seconds > 0.0)) {
    throw ConfigError("objective segment length must be positive");
  }
  if (spec.data == nullptr) {
    throw ConfigError("objective spec has no dataset");
  }
  if (spec.metric == ObjectiveMetric::kErrorRate &&
      spec.task == ObjectiveTask::kTagging) {
    throw ConfigError(
        "error rate is segment-based and requires the detection task");
  }
  validate(*spec.data);
}

double evaluate_objective(const ThresholdSet &th, const ObjectiveSpec &spec) {
  validate(spec);
  validate(th);
  const ThresholdDataset &data = *spec.data;
  int k = data.num_classes();
  if (th.num_classes() != k) {
    throw DimensionError("threshold set covers " +
                         std::to_string(th.num_classes()) +
                         " classes, dataset has " + std::to_string(k));
  }
  if (spec.task == ObjectiveTask::kTagging) {
    Tensor pred({data.num_clips(), k});
    for (int i = 0; i < data.num_clips(); ++i) {
      std::vector<int> tags =
          predict_tags(data.clip_probs[static_cast<std::size_t>(i)], th);
      for (int c = 0; c < k; ++c) {
        pred(i, c) = tags[static_cast<std::size_t>(c)];
      }
    }
    return -f1_macro(pred, data.tags).f1;
  }
  EventList pred;
  for (int i = 0; i < data.num_clips(); ++i) {
    std::size_t u = static_cast<std::size_t>(i);
    EventList events = decode_events(data.frame_probs[u], data.clip_probs[u],
                                     th, data.frame_seconds, data.clip_ids[u]);
    pred.insert(pred.end(), events.begin(), events.end());
  }
  std::map<std::string, double> durations = data.durations();
  if (spec.metric == ObjectiveMetric::kErrorRate) {
    ErResult r = segment_error_rate(data.reference_events, pred,
                                    spec.segment_seconds, durations, k);
    if (!r.er.has_value()) {
      throw ObjectiveError(
          "error rate undefined: reference grid has no active segments");
    }
    return *r.er;
  }
  return -segment_f1_micro(data.reference_events, pred, spec.segment_seconds,
                           durations, k)
              .f1;
}

std::vector<double> pack_thresholds(const ThresholdSet &th) {
  std::vector<double> packed;
  packed.reserve(3 * th.mu.size());
  packed.insert(packed.end(), th.mu.begin(), th.mu.end());
  packed.insert(packed.end(), th.tau_high.begin(), th.tau_high.end());
  packed.insert(packed.end(), th.tau_low.begin(), th.tau_low.end());
  return packed;
}

ThresholdSet unpack_thresholds(const std::vector<double> &packed) {
  if (packed.empty() || packed.size() % 3 != 0) {
    throw DimensionError("packed threshold vector must have length 3K, got " +
                         std::to_string(packed.size()));
  }
  std::size_t k = packed.size() / 3;
  ThresholdSet th;
  th.mu.assign(packed.begin(), packed.begin() + static_cast<long>(k));
  th.tau_high.assign(packed.begin() + static_cast<long>(k),
                     packed.begin() + static_cast<long>(2 * k));
  th.tau_low.assign(packed.begin() + static_cast<long>(2 * k), packed.end());
  return th;
}

ThresholdSet clamp_thresholds(ThresholdSet th) {
  for (std::size_t i = 0; i < th.mu.size(); ++i) {
    th.mu[i] = std::clamp(th.mu[i], 0.0, 1.0);
    th.tau_high[i] = std::clamp(th.tau_high[i], 0.0, 1.0);
    th.tau_low[i] = std::clamp(th.tau_low[i], 0.0, 1.0);
    th.tau_low[i] = std::min(th.tau_low[i], th.tau_high[i]);
  }
  return th;
}

namespace {

// Shared-baseline forward differences over the packed coordinates.
double gradient_impl(const ObjectiveSpec &spec, const ThresholdSet &th,
                     std::vector<double> &grads) {
  double baseline = evaluate_objective(th, spec);
  std::vector<double> packed = pack_thresholds(th);
  grads.assign(packed.size(), 0.0);
  for (std::size_t i = 0; i < packed.size(); ++i) {
    std::vector<double> probe = packed;
    probe[i] += spec.delta;
    ThresholdSet pth = clamp_thresholds(unpack_thresholds(probe));
    grads[i] = (evaluate_objective(pth, spec) - baseline) / spec.delta;
  }
  return baseline;
}

}  // namespace

std::vector<double> numerical_gradient(const ObjectiveSpec &spec,
                                       const ThresholdSet &th) {
  std::vector<double> grads;
  gradient_impl(spec, th, grads);
  return grads;
}

OptimizeResult optimize_thresholds(const ObjectiveSpec &spec,
                                   const ThresholdSet &init) {
  validate(spec);
  validate(init);
  std::size_t k = init.mu.size();
  ThresholdSet theta = init;
  OptimizeResult result;
  result.thresholds = init;
  result.objective = std::numeric_limits<double>::infinity();

  int passes = spec.mode == OptimizeMode::kTwoPass ? 2 : 1;
  long long iteration = 0;
  for (int pass = 0; pass < passes; ++pass) {
    Tensor packed({static_cast<int>(3 * k)}, pack_thresholds(theta));
    std::vector<Tensor *> params = {&packed};
    AdamConfig acfg;
    acfg.alpha = spec.learning_rate;
    AdamState adam = init_adam(params, acfg);
    for (int it = 0; it < spec.iterations; ++it, ++iteration) {
      std::vector<double> grads;
      double j = gradient_impl(spec, theta, grads);
      if (!std::isfinite(j)) {
        throw OptimizationError("non-finite objective at iteration " +
                                std::to_string(iteration));
      }
      result.trace.push_back(j);
      if (j < result.objective) {
        result.objective = j;
        result.thresholds = theta;
      }
      if (spec.mode == OptimizeMode::kTwoPass) {
        // Pass 0 moves only mu; pass 1 only the frame thresholds.
        std::size_t lo = pass == 0 ? 0 : k;
        std::size_t hi = pass == 0 ? k : 3 * k;
        for (std::size_t c = 0; c < 3 * k; ++c) {
          if (c < lo || c >= hi) grads[c] = 0.0;
        }
      }
      adam_step(params, {Tensor({static_cast<int>(3 * k)}, grads)}, adam);
      theta = clamp_thresholds(unpack_thresholds(packed.vals()));
      packed = Tensor({static_cast<int>(3 * k)}, pack_thresholds(theta));
    }
  }
  double final_j = evaluate_objective(theta, spec);
  if (!std::isfinite(final_j)) {
    throw OptimizationError("non-finite objective at iteration " +
                            std::to_string(iteration));
  }
  result.trace.push_back(final_j);
  if (final_j < result.objective) {
    result.objective = final_j;
    result.thresholds = theta;
  }
  return result;
}

}  // namespace wsed
