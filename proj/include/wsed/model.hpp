// include/wsed/model.hpp

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

#ifndef WSED_MODEL_HPP_
#define WSED_MODEL_HPP_

#include <string>
#include <utility>
#include <vector>

#include "wsed/aggregation.hpp"
#include "wsed/blocks.hpp"
#include "wsed/rng.hpp"
#include "wsed/tape.hpp"
#include "wsed/tensor.hpp"

namespace wsed {

// Toy architectures. All share two gated-conv stages with frequency-only
// 1x2 pooling, a frequency mean and the classification plus localization
// heads; they differ in the stage type and the presence of the encoder:
//   cnn-transformer    3x3 GLU stages (16, 32 filters) + transformer layer
//   cnn-glu            3x3 GLU stages only
//   inception-attention  inception stages (budgets 16, 32), no transformer
enum class ModelKind { kCnnTransformer, kCnnGlu, kInceptionAttention };

ModelKind parse_model_kind(const std::string &name);
std::string model_kind_name(ModelKind kind);

struct ToyModel {
  ModelKind kind = ModelKind::kCnnTransformer;
  AggregationMethod aggregation = AggregationMethod::kAttention;
  int num_classes = 4;
  int freq_bins = 16;
  double frame_seconds = 0.1;
  // Static input normalization, fixed from the training split.
  double norm_mean = 0.0;
  double norm_std = 1.0;

  GluBlockParams glu1, glu2;
  InceptionAttentionConfig inc1_cfg, inc2_cfg;
  InceptionAttentionParams inc1, inc2;
  TransformerLayerParams transformer;
  HeadParams heads;
};

// Fresh random parameters for the requested architecture.
ToyModel init_toy_model(ModelKind kind, AggregationMethod aggregation,
                        int num_classes, int freq_bins, Rng &rng);

// Stable name -> tensor view of every trainable parameter, in a fixed
// order shared by the optimizer and the serializer.
std::vector<std::pair<std::string, Tensor *>> named_params(ToyModel &m);
std::vector<std::pair<std::string, const Tensor *>> named_params(
    const ToyModel &m);

// (features - norm_mean) / norm_std.
Tensor normalize_features(const ToyModel &m, const Tensor &features);

struct ModelOutput {
  Var frame_probs;  // [T x K]
  Var clip_probs;   // [K]
};

// Builds the forward graph for one clip of already-normalized features
// [T x F]. `params` are the lifted model parameters from lift_params, so a
// batch shares one set of Vars and gradients accumulate across clips.
// Attention aggregation draws its weights from the localization head; the
// inception-attention variant aggregates through the global weighted
// average, the others through the normalized-weight sum (equal up to
// rounding).
struct ModelVars {
  std::vector<GluVars> glu;             // two stages for the glu kinds
  std::vector<InceptionVars> inception; // two stages for inception
  TransformerVars transformer;
  HeadVars heads;
};

ModelVars lift_params(Tape &t, const ToyModel &m, bool trainable);

// Lifted parameter Vars in exactly the named_params order, so grads line
// up with the optimizer's tensor list.
std::vector<Var> param_vars(const ModelVars &vars, const ToyModel &m);

ModelOutput model_forward(Tape &t, const ToyModel &m, const ModelVars &vars,
                          const Tensor &normalized_features);

struct Inference {
  Tensor frame_probs;  // [T x K]
  Tensor clip_probs;   // [K]
};

// Normalizes raw features and runs the forward graph on a local tape.
Inference run_model(const ToyModel &m, const Tensor &features);

}  // namespace wsed

#endif  // WSED_MODEL_HPP_
