// src/metrics.cpp

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

#include "wsed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wsed/errors.hpp"

namespace wsed {

namespace {

void check_binary_pair(const Tensor &pred, const Tensor &ref, const char *op) {
  if (pred.rank() != 2 || ref.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected [N x K] matrices, got " +
                         shape_str(pred.shape()) + " and " +
                         shape_str(ref.shape()));
  }
  check_same_shape(pred, ref, op);
  for (const Tensor *m : {&pred, &ref}) {
    for (std::size_t i = 0; i < m->size(); ++i) {
      double v = m->data()[i];
      if (v != 0.0 && v != 1.0) {
        throw ValidationError(std::string(op) + ": entries must be 0 or 1");
      }
    }
  }
}

struct GriddedCounts {
  SegmentStats stats;
  std::vector<BinaryCounts> per_class;
};

GriddedCounts grid_counts(const EventList &ref, const EventList &pred,
                          double segment_len,
                          const std::map<std::string, double> &durations,
                          int num_classes) {
  if (durations.empty()) {
    throw ValidationError("segment metrics: no clip durations given");
  }
  for (const EventList *list : {&ref, &pred}) {
    for (const Event &e : *list) {
      if (durations.find(e.clip_id) == durations.end()) {
        throw ValidationError("segment metrics: event for unknown clip '" +
                              e.clip_id + "'");
      }
    }
  }

  GriddedCounts out;
  out.per_class.assign(static_cast<std::size_t>(num_classes), BinaryCounts{});
  EventList ref_clip, pred_clip;
  for (const auto &entry : durations) {
    ref_clip.clear();
    pred_clip.clear();
    for (const Event &e : ref)
      if (e.clip_id == entry.first) ref_clip.push_back(e);
    for (const Event &e : pred)
      if (e.clip_id == entry.first) pred_clip.push_back(e);
    Tensor rg = events_to_segment_grid(ref_clip, segment_len, entry.second,
                                       num_classes);
    Tensor pg = events_to_segment_grid(pred_clip, segment_len, entry.second,
                                       num_classes);
    for (int s = 0; s < rg.dim(0); ++s) {
      long long seg_fn = 0, seg_fp = 0, seg_n = 0;
      for (int k = 0; k < num_classes; ++k) {
        bool r = rg(s, k) != 0.0, p = pg(s, k) != 0.0;
        BinaryCounts &c = out.per_class[static_cast<std::size_t>(k)];
        if (r && p) ++c.tp;
        if (!r && p) ++c.fp;
        if (r && !p) ++c.fn;
        seg_n += r ? 1 : 0;
        seg_fn += (r && !p) ? 1 : 0;
        seg_fp += (!r && p) ? 1 : 0;
      }
      out.stats.substitutions += std::min(seg_fn, seg_fp);
      out.stats.deletions += std::max(0LL, seg_fn - seg_fp);
      out.stats.insertions += std::max(0LL, seg_fp - seg_fn);
      out.stats.reference_active += seg_n;
    }
  }
  for (const BinaryCounts &c : out.per_class) {
    out.stats.tp += c.tp;
    out.stats.fp += c.fp;
    out.stats.fn += c.fn;
  }
  return out;
}

}  // namespace

Prf precision_recall_f1(long long tp, long long fp, long long fn) {
  if (tp < 0 || fp < 0 || fn < 0) {
    throw ArgumentError("precision_recall_f1: counts must be non-negative");
  }
  Prf out;
  if (tp + fp > 0) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

BinaryCounts pooled_counts(const Tensor &pred, const Tensor &ref) {
  check_binary_pair(pred, ref, "pooled_counts");
  BinaryCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    bool p = pred.data()[i] != 0.0, r = ref.data()[i] != 0.0;
    if (p && r) ++c.tp;
    if (p && !r) ++c.fp;
    if (!p && r) ++c.fn;
  }
  return c;
}

std::vector<BinaryCounts> per_class_counts(const Tensor &pred,
                                           const Tensor &ref) {
  check_binary_pair(pred, ref, "per_class_counts");
  int n = pred.dim(0), kk = pred.dim(1);
  std::vector<BinaryCounts> out(static_cast<std::size_t>(kk));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kk; ++k) {
      bool p = pred(i, k) != 0.0, r = ref(i, k) != 0.0;
      BinaryCounts &c = out[static_cast<std::size_t>(k)];
      if (p && r) ++c.tp;
      if (p && !r) ++c.fp;
      if (!p && r) ++c.fn;
    }
  }
  return out;
}

Prf f1_micro(const Tensor &pred, const Tensor &ref) {
  BinaryCounts c = pooled_counts(pred, ref);
  return precision_recall_f1(c.tp, c.fp, c.fn);
}

Prf f1_macro(const Tensor &pred, const Tensor &ref) {
  std::vector<BinaryCounts> counts = per_class_counts(pred, ref);
  Prf mean;
  for (const BinaryCounts &c : counts) {
    Prf p = precision_recall_f1(c.tp, c.fp, c.fn);
    mean.precision += p.precision;
    mean.recall += p.recall;
    mean.f1 += p.f1;
  }
  double kk = static_cast<double>(counts.size());
  mean.precision /= kk;
  mean.recall /= kk;
  mean.f1 /= kk;
  return mean;
}

std::optional<double> average_precision(const std::vector<double> &scores,
                                        const std::vector<int> &labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("average_precision: " + std::to_string(scores.size()) +
                         " scores vs " + std::to_string(labels.size()) +
                         " labels");
  }
  long long positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ValidationError("average_precision: labels must be 0 or 1");
    }
    if (!std::isfinite(scores[i])) {
      throw ValidationError("average_precision: scores must be finite");
    }
    positives += labels[i];
  }
  if (positives == 0) return std::nullopt;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double ap = 0.0;
  long long hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 1) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return ap / static_cast<double>(positives);
}

MeanApResult mean_ap(const Tensor &scores, const Tensor &labels) {
  if (scores.rank() != 2 || labels.rank() != 2) {
    throw DimensionError("mean_ap: expected [N x K] matrices, got " +
                         shape_str(scores.shape()) + " and " +
                         shape_str(labels.shape()));
  }
  check_same_shape(scores, labels, "mean_ap");
  int n = scores.dim(0), kk = scores.dim(1);
  MeanApResult out;
  double total = 0.0;
  int included = 0;
  for (int k = 0; k < kk; ++k) {
    std::vector<double> col(static_cast<std::size_t>(n));
    std::vector<int> lab(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      col[static_cast<std::size_t>(i)] = scores(i, k);
      double l = labels(i, k);
      if (l != 0.0 && l != 1.0) {
        throw ValidationError("mean_ap: labels must be 0 or 1");
      }
      lab[static_cast<std::size_t>(i)] = l != 0.0 ? 1 : 0;
    }
    std::optional<double> ap = average_precision(col, lab);
    out.per_class.push_back(ap);
    if (ap.has_value()) {
      total += *ap;
      ++included;
    } else {
      out.excluded.push_back(k);
    }
  }
  if (included > 0) out.map = total / static_cast<double>(included);
  return out;
}

ErResult segment_error_rate(const EventList &ref, const EventList &pred,
                            double segment_len,
                            const std::map<std::string, double> &durations,
                            int num_classes) {
  GriddedCounts g = grid_counts(ref, pred, segment_len, durations, num_classes);
  ErResult out;
  out.stats = g.stats;
  if (g.stats.reference_active > 0) {
    out.er = static_cast<double>(g.stats.substitutions + g.stats.deletions +
                                 g.stats.insertions) /
             static_cast<double>(g.stats.reference_active);
  }
  return out;
}

Prf segment_f1_micro(const EventList &ref, const EventList &pred,
                     double segment_len,
                     const std::map<std::string, double> &durations,
                     int num_classes) {
  GriddedCounts g = grid_counts(ref, pred, segment_len, durations, num_classes);
  return precision_recall_f1(g.stats.tp, g.stats.fp, g.stats.fn);
}

Prf segment_f1_macro(const EventList &ref, const EventList &pred,
                     double segment_len,
                     const std::map<std::string, double> &durations,
                     int num_classes) {
  GriddedCounts g = grid_counts(ref, pred, segment_len, durations, num_classes);
  Prf mean;
  for (const BinaryCounts &c : g.per_class) {
    Prf p = precision_recall_f1(c.tp, c.fp, c.fn);
    mean.precision += p.precision;
    mean.recall += p.recall;
    mean.f1 += p.f1;
  }
  double kk = static_cast<double>(g.per_class.size());
  mean.precision /= kk;
  mean.recall /= kk;
  mean.f1 /= kk;
  return mean;
}

}  // namespace wsed
