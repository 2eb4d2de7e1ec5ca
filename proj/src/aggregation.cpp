// src/aggregation.cpp

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

#include "wsed/aggregation.hpp"

#include <algorithm>
#include <vector>

#include "wsed/errors.hpp"

namespace wsed {

namespace {

void check_frame_matrix(const Tensor &frames, const char *op) {
  if (frames.rank() != 2) {
    throw DimensionError(std::string(op) + ": frames must be [T x K], got " +
                         shape_str(frames.shape()));
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    double v = frames.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError(std::string(op) +
                            ": frame probabilities must lie in [0, 1]");
    }
  }
}

// Non-negative entries, positive sum per class column. Returns column sums.
std::vector<double> check_weight_columns(const Tensor &w, const char *op) {
  int t = w.dim(0), k = w.dim(1);
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < k; ++j) {
      double v = w(i, j);
      if (!(v >= 0.0)) {
        throw ValidationError(std::string(op) +
                              ": weights must be non-negative");
      }
      sums[static_cast<std::size_t>(j)] += v;
    }
  }
  for (int j = 0; j < k; ++j) {
    if (sums[static_cast<std::size_t>(j)] <= 0.0) {
      throw DegenerateWeightsError(std::string(op) + ": weight column " +
                                   std::to_string(j) + " sums to zero");
    }
  }
  return sums;
}

}  // namespace

AggregationMethod parse_aggregation_method(const std::string &name) {
  if (name == "max") return AggregationMethod::kMax;
  if (name == "avg") return AggregationMethod::kAvg;
  if (name == "attention") return AggregationMethod::kAttention;
  throw ArgumentError("unknown aggregation method '" + name +
                      "', expected max, avg or attention");
}

std::string aggregation_method_name(AggregationMethod method) {
  switch (method) {
    case AggregationMethod::kMax: return "max";
    case AggregationMethod::kAvg: return "avg";
    case AggregationMethod::kAttention: return "attention";
  }
  throw ArgumentError("invalid aggregation method value");
}

Tensor aggregate(const Tensor &frames, AggregationMethod method) {
  if (method == AggregationMethod::kAttention) {
    throw ArgumentError("aggregate: attention requires weights");
  }
  check_frame_matrix(frames, "aggregate");
  int t = frames.dim(0), k = frames.dim(1);
  Tensor out({k});
  if (method == AggregationMethod::kMax) {
    for (int j = 0; j < k; ++j) {
      double mx = frames(0, j);
      for (int i = 1; i < t; ++i) mx = std::max(mx, frames(i, j));
      out(j) = mx;
    }
  } else {
    double inv = 1.0 / static_cast<double>(t);
    for (int j = 0; j < k; ++j) {
      double acc = 0.0;
      for (int i = 0; i < t; ++i) acc += frames(i, j);
      out(j) = acc * inv;
    }
  }
  return out;
}

Tensor aggregate(const Tensor &frames, AggregationMethod method,
                 const Tensor &weights) {
  if (method != AggregationMethod::kAttention) {
    throw ArgumentError("aggregate: weights are only valid with attention");
  }
  check_frame_matrix(frames, "aggregate");
  check_same_shape(frames, weights, "aggregate");
  std::vector<double> sums = check_weight_columns(weights, "aggregate");
  int t = frames.dim(0), k = frames.dim(1);
  Tensor out({k});
  for (int j = 0; j < k; ++j) {
    double acc = 0.0;
    for (int i = 0; i < t; ++i) {
      acc += frames(i, j) * (weights(i, j) / sums[static_cast<std::size_t>(j)]);
    }
    out(j) = acc;
  }
  return out;
}

Tensor global_weighted_average(const Tensor &frames, const Tensor &loc) {
  check_frame_matrix(frames, "global_weighted_average");
  check_same_shape(frames, loc, "global_weighted_average");
  std::vector<double> sums = check_weight_columns(loc, "global_weighted_average");
  int t = frames.dim(0), k = frames.dim(1);
  Tensor out({k});
  for (int j = 0; j < k; ++j) {
    double num = 0.0;
    for (int i = 0; i < t; ++i) num += frames(i, j) * loc(i, j);
    out(j) = num / sums[static_cast<std::size_t>(j)];
  }
  return out;
}

Var aggregate(Tape &t, Var frames, AggregationMethod method) {
  if (method == AggregationMethod::kAttention) {
    throw ArgumentError("aggregate: attention requires weights");
  }
  const Tensor &f = t.value(frames);
  if (f.rank() != 2) {
    throw DimensionError("aggregate: frames must be [T x K], got " +
                         shape_str(f.shape()));
  }
  if (method == AggregationMethod::kMax) return t.colmax(frames);
  return t.scale(t.colsum(frames), 1.0 / static_cast<double>(f.dim(0)));
}

Var aggregate(Tape &t, Var frames, AggregationMethod method, Var weights) {
  if (method != AggregationMethod::kAttention) {
    throw ArgumentError("aggregate: weights are only valid with attention");
  }
  const Tensor &f = t.value(frames);
  if (f.rank() != 2) {
    throw DimensionError("aggregate: frames must be [T x K], got " +
                         shape_str(f.shape()));
  }
  check_same_shape(f, t.value(weights), "aggregate");
  check_weight_columns(t.value(weights), "aggregate");
  Var p = t.div_cols(weights, t.colsum(weights));
  return t.colsum(t.mul(frames, p));
}

Var global_weighted_average(Tape &t, Var frames, Var loc) {
  const Tensor &f = t.value(frames);
  if (f.rank() != 2) {
    throw DimensionError("global_weighted_average: frames must be [T x K], "
                         "got " + shape_str(f.shape()));
  }
  check_same_shape(f, t.value(loc), "global_weighted_average");
  check_weight_columns(t.value(loc), "global_weighted_average");
  Var num = t.colsum(t.mul(frames, loc));
  return t.div(num, t.colsum(loc));
}

}  // namespace wsed
