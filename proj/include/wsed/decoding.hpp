// include/wsed/decoding.hpp

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

#ifndef WSED_DECODING_HPP_
#define WSED_DECODING_HPP_

#include <string>
#include <vector>

#include "wsed/tensor.hpp"

namespace wsed {

// Per-class decision thresholds. All entries lie in [0, 1] and
// tau_low[k] <= tau_high[k]. Every comparison in this module uses >=.
struct ThresholdSet {
  std::vector<double> mu;
  std::vector<double> tau_high;
  std::vector<double> tau_low;

  int num_classes() const { return static_cast<int>(mu.size()); }
};

// Throws ValidationError on range or ordering violations.
void validate(const ThresholdSet &t);

// K copies of the defaults mu=0.5, tau_high=0.3, tau_low=0.1.
ThresholdSet uniform_thresholds(int k, double mu = 0.5, double tau_high = 0.3,
                                double tau_low = 0.1);

struct Event {
  std::string clip_id;
  int class_id = -1;
  double onset_sec = 0.0;
  double offset_sec = 0.0;
};
using EventList = std::vector<Event>;

// tag[k] = 1 iff clip[k] >= mu[k].
std::vector<int> predict_tags(const Tensor &clip, const ThresholdSet &th);

// Double-threshold hysteresis per class: classes whose clip probability
// falls below mu emit nothing; otherwise each maximal run of frames with
// probability >= tau_low that contains at least one frame >= tau_high
// becomes one event. A single frame below tau_low splits runs. Events are
// emitted class-major with ascending onsets; times are frame_duration
// multiples.
EventList decode_events(const Tensor &frames, const Tensor &clip,
                        const ThresholdSet &th, double frame_duration,
                        const std::string &clip_id = "");

// Binary activity grid [S x K] with S = ceil(clip_duration / segment_len);
// the trailing partial segment counts. Cell (s, k) is 1 iff a class-k event
// overlaps segment s by more than kTimeEps seconds. Events must lie inside
// [0, clip_duration] and carry class ids in [0, num_classes).
Tensor events_to_segment_grid(const EventList &events, double segment_len,
                              double clip_duration, int num_classes);

// Overlap slop for the segment grid, in seconds.
inline constexpr double kTimeEps = 1e-9;

}  // namespace wsed

#endif  // WSED_DECODING_HPP_
