// include/wsed/metrics.hpp

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

#ifndef WSED_METRICS_HPP_
#define WSED_METRICS_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsed/decoding.hpp"
#include "wsed/tensor.hpp"

namespace wsed {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R).
// Zero denominators yield 0 so downstream objectives stay finite.
Prf precision_recall_f1(long long tp, long long fp, long long fn);

struct BinaryCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

// pred and ref are binary matrices [N x K] with identical shapes.
BinaryCounts pooled_counts(const Tensor &pred, const Tensor &ref);
std::vector<BinaryCounts> per_class_counts(const Tensor &pred,
                                           const Tensor &ref);
// micro: P/R/F1 from counts pooled over all cells.
Prf f1_micro(const Tensor &pred, const Tensor &ref);
// macro: unweighted mean of the per-class P, R and F1 values.
Prf f1_macro(const Tensor &pred, const Tensor &ref);

// Non-interpolated average precision: mean over positives of the precision
// at that positive's rank, scores sorted descending with stable ties.
// Returns nullopt when labels contain no positive (AP undefined).
std::optional<double> average_precision(const std::vector<double> &scores,
                                        const std::vector<int> &labels);

struct MeanApResult {
  std::optional<double> map;
  std::vector<std::optional<double>> per_class;
  // Classes without positives, excluded from the mean.
  std::vector<int> excluded;
};

// Column-wise AP over scores [N x K] against binary labels [N x K];
// the mean skips undefined classes and is nullopt if every class is.
MeanApResult mean_ap(const Tensor &scores, const Tensor &labels);

struct SegmentStats {
  long long substitutions = 0;
  long long deletions = 0;
  long long insertions = 0;
  long long reference_active = 0;
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

struct ErResult {
  // nullopt when the reference activates nothing (zero total N).
  std::optional<double> er;
  SegmentStats stats;
};

// Grids both event lists per clip and accumulates per-segment counts:
// with FN(s), FP(s) the per-segment class-count errors,
// S = min(FN, FP), D = max(0, FN - FP), I = max(0, FP - FN),
// ER = sum(S + D + I) / sum(N) micro-averaged over every segment of every
// clip in `durations`. Events for clips absent from `durations` are a
// ValidationError.
ErResult segment_error_rate(const EventList &ref, const EventList &pred,
                            double segment_len,
                            const std::map<std::string, double> &durations,
                            int num_classes);

// Segment-based F1 from the same grids; micro pools counts over segments
// and classes, macro averages per-class F1.
Prf segment_f1_micro(const EventList &ref, const EventList &pred,
                     double segment_len,
                     const std::map<std::string, double> &durations,
                     int num_classes);
Prf segment_f1_macro(const EventList &ref, const EventList &pred,
                     double segment_len,
                     const std::map<std::string, double> &durations,
                     int num_classes);

}  // namespace wsed

#endif  // WSED_METRICS_HPP_
