// src/decoding.cpp

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

#include "wsed/decoding.hpp"

#include <algorithm>
#include <cmath>

#include "wsed/errors.hpp"

namespace wsed {

namespace {

void check_prob_range(const Tensor &x, const char *op) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = x.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError(std::string(op) +
                            ": probabilities must lie in [0, 1]");
    }
  }
}

void check_class_count(const Tensor &clip, const ThresholdSet &th,
                       const char *op) {
  if (clip.rank() != 1) {
    throw DimensionError(std::string(op) + ": clip probs must be [K], got " +
                         shape_str(clip.shape()));
  }
  if (clip.dim(0) != th.num_classes()) {
    throw DimensionError(std::string(op) + ": " + std::to_string(clip.dim(0)) +
                         " classes vs " + std::to_string(th.num_classes()) +
                         " thresholds");
  }
}

}  // namespace

void validate(const ThresholdSet &t) {
  std::size_t k = t.mu.size();
  if (t.tau_high.size() != k || t.tau_low.size() != k || k == 0) {
    throw ValidationError("thresholds: mu, tau_high, tau_low must share a "
                          "positive length");
  }
  for (std::size_t i = 0; i < k; ++i) {
    bool in01 = t.mu[i] >= 0.0 && t.mu[i] <= 1.0 && t.tau_high[i] >= 0.0 &&
                t.tau_high[i] <= 1.0 && t.tau_low[i] >= 0.0 &&
                t.tau_low[i] <= 1.0;
    if (!in01) {
      throw ValidationError("thresholds: class " + std::to_string(i) +
                            " outside [0, 1]");
    }
    if (t.tau_low[i] > t.tau_high[i]) {
      throw ValidationError("thresholds: class " + std::to_string(i) +
                            " has tau_low > tau_high");
    }
  }
}

ThresholdSet uniform_thresholds(int k, double mu, double tau_high,
                                double tau_low) {
  if (k < 1) throw ArgumentError("thresholds: need at least one class");
  ThresholdSet t;
  t.mu.assign(static_cast<std::size_t>(k), mu);
  t.tau_high.assign(static_cast<std::size_t>(k), tau_high);
  t.tau_low.assign(static_cast<std::size_t>(k), tau_low);
  validate(t);
  return t;
}

std::vector<int> predict_tags(const Tensor &clip, const ThresholdSet &th) {
  validate(th);
  check_class_count(clip, th, "predict_tags");
  check_prob_range(clip, "predict_tags");
  std::vector<int> tags(static_cast<std::size_t>(clip.dim(0)), 0);
  for (int k = 0; k < clip.dim(0); ++k) {
    tags[static_cast<std::size_t>(k)] = clip(k) >= th.mu[static_cast<std::size_t>(k)] ? 1 : 0;
  }
  return tags;
}

EventList decode_events(const Tensor &frames, const Tensor &clip,
                        const ThresholdSet &th, double frame_duration,
                        const std::string &clip_id) {
  validate(th);
  check_class_count(clip, th, "decode_events");
  if (frames.rank() != 2) {
    throw DimensionError("decode_events: frames must be [T x K], got " +
                         shape_str(frames.shape()));
  }
  if (frames.dim(1) != clip.dim(0)) {
    throw DimensionError("decode_events: frames carry " +
                         std::to_string(frames.dim(1)) + " classes, clip " +
                         std::to_string(clip.dim(0)));
  }
  if (!(frame_duration > 0.0)) {
    throw ArgumentError("decode_events: frame duration must be positive");
  }
  check_prob_range(frames, "decode_events");
  check_prob_range(clip, "decode_events");

  int t = frames.dim(0), kk = frames.dim(1);
  EventList events;
  for (int k = 0; k < kk; ++k) {
    std::size_t ku = static_cast<std::size_t>(k);
    if (clip(k) < th.mu[ku]) continue;
    int run_start = -1;
    bool seeded = false;
    for (int i = 0; i <= t; ++i) {
      bool low = i < t && frames(i, k) >= th.tau_low[ku];
      if (low) {
        if (run_start < 0) run_start = i;
        seeded = seeded || frames(i, k) >= th.tau_high[ku];
      } else if (run_start >= 0) {
        if (seeded) {
          Event e;
          e.clip_id = clip_id;
          e.class_id = k;
          e.onset_sec = run_start * frame_duration;
          e.offset_sec = i * frame_duration;
          events.push_back(e);
        }
        run_start = -1;
        seeded = false;
      }
    }
  }
  return events;
}

Tensor events_to_segment_grid(const EventList &events, double segment_len,
                              double clip_duration, int num_classes) {
  if (!(segment_len > 0.0)) {
    throw ArgumentError("segment_grid: segment length must be positive");
  }
  if (!(clip_duration > 0.0)) {
    throw ArgumentError("segment_grid: clip duration must be positive");
  }
  if (num_classes < 1) {
    throw ArgumentError("segment_grid: need at least one class");
  }
  int s = static_cast<int>(std::ceil(clip_duration / segment_len - kTimeEps));
  s = std::max(s, 1);
  Tensor grid({s, num_classes});
  for (const Event &e : events) {
    if (e.class_id < 0 || e.class_id >= num_classes) {
      throw ArgumentError("segment_grid: class id " +
                          std::to_string(e.class_id) + " outside [0, " +
                          std::to_string(num_classes) + ")");
    }
    if (!(e.onset_sec < e.offset_sec)) {
      throw ValidationError("segment_grid: event onset must precede offset");
    }
    if (e.onset_sec < -kTimeEps || e.offset_sec > clip_duration + kTimeEps) {
      throw ValidationError("segment_grid: event [" +
                            std::to_string(e.onset_sec) + ", " +
                            std::to_string(e.offset_sec) +
                            ") outside the clip");
    }
    for (int i = 0; i < s; ++i) {
      double seg_a = i * segment_len;
      double seg_b = std::min(seg_a + segment_len, clip_duration);
      double overlap = std::min(e.offset_sec, seg_b) - std::max(e.onset_sec, seg_a);
      if (overlap > kTimeEps) grid(i, e.class_id) = 1.0;
    }
  }
  return grid;
}

}  // namespace wsed
