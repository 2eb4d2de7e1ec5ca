// include/wsed/aggregation.hpp

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

#ifndef WSED_AGGREGATION_HPP_
#define WSED_AGGREGATION_HPP_

#include <string>

#include "wsed/tape.hpp"
#include "wsed/tensor.hpp"

namespace wsed {

// Collapses frame probabilities [T x K] into clip probabilities [K].
enum class AggregationMethod { kMax, kAvg, kAttention };

// Accepts "max", "avg", "attention"; anything else is an ArgumentError.
AggregationMethod parse_aggregation_method(const std::string &name);
std::string aggregation_method_name(AggregationMethod method);

// max: per-class maximum over frames. avg: per-class mean.
// attention requires the weights overload.
Tensor aggregate(const Tensor &frames, AggregationMethod method);

// attention: weights [T x K] are normalized per class column to sum to one
// over time, then each clip probability is the weighted sum of the frame
// column. Weights must be non-negative with a positive sum per column;
// an all-zero column raises DegenerateWeightsError. Passing weights with
// max or avg is an ArgumentError.
Tensor aggregate(const Tensor &frames, AggregationMethod method,
                 const Tensor &weights);

// out[k] = sum_t frames[t][k] * loc[t][k] / sum_t loc[t][k].
// loc must be non-negative; a zero column sum raises DegenerateWeightsError.
Tensor global_weighted_average(const Tensor &frames, const Tensor &loc);

// Tape overloads used inside training graphs. Value validation is limited
// to degenerate weight columns; probability ranges are the caller's concern.
Var aggregate(Tape &t, Var frames, AggregationMethod method);
Var aggregate(Tape &t, Var frames, AggregationMethod method, Var weights);
Var global_weighted_average(Tape &t, Var frames, Var loc);

}  // namespace wsed

#endif  // WSED_AGGREGATION_HPP_
