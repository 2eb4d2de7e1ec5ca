// src/model.cpp

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

#include "wsed/model.hpp"

#include "wsed/errors.hpp"
#include "wsed/ops.hpp"

namespace wsed {

namespace {

constexpr int kStage1Filters = 16;
constexpr int kStage2Filters = 32;

}  // namespace

ModelKind parse_model_kind(const std::string &name) {
  if (name == "cnn-transformer") return ModelKind::kCnnTransformer;
  if (name == "cnn-glu") return ModelKind::kCnnGlu;
  if (name == "inception-attention") return ModelKind::kInceptionAttention;
  throw ArgumentError("unknown model kind '" + name +
                      "', expected cnn-transformer, cnn-glu or "
                      "inception-attention");
}

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kCnnTransformer: return "cnn-transformer";
    case ModelKind::kCnnGlu: return "cnn-glu";
    case ModelKind::kInceptionAttention: return "inception-attention";
  }
  throw ArgumentError("invalid model kind value");
}

ToyModel init_toy_model(ModelKind kind, AggregationMethod aggregation,
                        int num_classes, int freq_bins, Rng &rng) {
  if (num_classes < 1) {
    throw ConfigError("model: need at least one class");
  }
  if (freq_bins < 4 || freq_bins % 4 != 0) {
    throw ConfigError("model: freq_bins must be a positive multiple of 4, "
                      "got " + std::to_string(freq_bins));
  }
  ToyModel m;
  m.kind = kind;
  m.aggregation = aggregation;
  m.num_classes = num_classes;
  m.freq_bins = freq_bins;

  if (kind == ModelKind::kInceptionAttention) {
    m.inc1_cfg = inception_v1(kStage1Filters);
    m.inc2_cfg = inception_v1(kStage2Filters);
    m.inc1 = init_inception(rng, 1, m.inc1_cfg);
    m.inc2 = init_inception(rng, kStage1Filters, m.inc2_cfg);
  } else {
    m.glu1 = init_glu(rng, 1, kStage1Filters, 3, 3);
    m.glu2 = init_glu(rng, kStage1Filters, kStage2Filters, 3, 3);
  }
  if (kind == ModelKind::kCnnTransformer) {
    m.transformer = init_transformer(rng, kStage2Filters, kStage2Filters,
                                     kStage2Filters);
  }
  m.heads = init_heads(rng, kStage2Filters, num_classes);
  return m;
}

namespace {

template <typename M, typename T>
std::vector<std::pair<std::string, T *>> collect_params(M &m) {
  std::vector<std::pair<std::string, T *>> out;
  auto add = [&out](const std::string &name, T &tensor) {
    out.emplace_back(name, &tensor);
  };
  if (m.kind == ModelKind::kInceptionAttention) {
    auto add_stage = [&add](const char *prefix, auto &stage) {
      for (std::size_t b = 0; b < stage.branches.size(); ++b) {
        std::string base = std::string(prefix) + ".b" + std::to_string(b);
        auto &br = stage.branches[b];
        if (br.pre_w.size() > 0) {
          add(base + ".pre_w", br.pre_w);
          add(base + ".pre_b", br.pre_b);
        }
        add(base + ".w", br.glu.w);
        add(base + ".b", br.glu.b);
        add(base + ".v", br.glu.v);
        add(base + ".c", br.glu.c);
      }
    };
    add_stage("inc1", m.inc1);
    add_stage("inc2", m.inc2);
  } else {
    add("glu1.w", m.glu1.w);
    add("glu1.b", m.glu1.b);
    add("glu1.v", m.glu1.v);
    add("glu1.c", m.glu1.c);
    add("glu2.w", m.glu2.w);
    add("glu2.b", m.glu2.b);
    add("glu2.v", m.glu2.v);
    add("glu2.c", m.glu2.c);
  }
  if (m.kind == ModelKind::kCnnTransformer) {
    add("transformer.wq", m.transformer.wq);
    add("transformer.wk", m.transformer.wk);
    add("transformer.wv", m.transformer.wv);
  }
  add("heads.cls_w", m.heads.cls_w);
  add("heads.cls_b", m.heads.cls_b);
  add("heads.loc_w", m.heads.loc_w);
  add("heads.loc_b", m.heads.loc_b);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Tensor *>> named_params(ToyModel &m) {
  return collect_params<ToyModel, Tensor>(m);
}

std::vector<std::pair<std::string, const Tensor *>> named_params(
    const ToyModel &m) {
  return collect_params<const ToyModel, const Tensor>(m);
}

std::vector<Var> param_vars(const ModelVars &vars, const ToyModel &m) {
  std::vector<Var> out;
  if (m.kind == ModelKind::kInceptionAttention) {
    for (const InceptionVars &stage : vars.inception) {
      for (const InceptionBranchVars &br : stage.branches) {
        if (br.has_pre) {
          out.push_back(br.pre_w);
          out.push_back(br.pre_b);
        }
        out.push_back(br.glu.w);
        out.push_back(br.glu.b);
        out.push_back(br.glu.v);
        out.push_back(br.glu.c);
      }
    }
  } else {
    for (const GluVars &stage : vars.glu) {
      out.push_back(stage.w);
      out.push_back(stage.b);
      out.push_back(stage.v);
      out.push_back(stage.c);
    }
  }
  if (m.kind == ModelKind::kCnnTransformer) {
    out.push_back(vars.transformer.wq);
    out.push_back(vars.transformer.wk);
    out.push_back(vars.transformer.wv);
  }
  out.push_back(vars.heads.cls_w);
  out.push_back(vars.heads.cls_b);
  out.push_back(vars.heads.loc_w);
  out.push_back(vars.heads.loc_b);
  return out;
}

Tensor normalize_features(const ToyModel &m, const Tensor &features) {
  if (features.rank() != 2 || features.dim(1) != m.freq_bins) {
    throw DimensionError("model: features must be [T x " +
                         std::to_string(m.freq_bins) + "], got " +
                         shape_str(features.shape()));
  }
  if (!(m.norm_std > 0.0)) {
    throw ConfigError("model: norm_std must be positive");
  }
  Tensor out = features;
  double inv = 1.0 / m.norm_std;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = (out.data()[i] - m.norm_mean) * inv;
  }
  return out;
}

ModelVars lift_params(Tape &t, const ToyModel &m, bool trainable) {
  ModelVars vars;
  if (m.kind == ModelKind::kInceptionAttention) {
    vars.inception.push_back(lift(t, m.inc1, trainable));
    vars.inception.push_back(lift(t, m.inc2, trainable));
  } else {
    vars.glu.push_back(lift(t, m.glu1, trainable));
    vars.glu.push_back(lift(t, m.glu2, trainable));
  }
  if (m.kind == ModelKind::kCnnTransformer) {
    vars.transformer = lift(t, m.transformer, trainable);
  }
  vars.heads = lift(t, m.heads, trainable);
  return vars;
}

ModelOutput model_forward(Tape &t, const ToyModel &m, const ModelVars &vars,
                          const Tensor &normalized_features) {
  if (normalized_features.rank() != 2 ||
      normalized_features.dim(1) != m.freq_bins) {
    throw DimensionError("model: features must be [T x " +
                         std::to_string(m.freq_bins) + "], got " +
                         shape_str(normalized_features.shape()));
  }
  int frames = normalized_features.dim(0);
  Var x = t.constant(
      Tensor({1, frames, m.freq_bins}, normalized_features.vals()));

  if (m.kind == ModelKind::kInceptionAttention) {
    x = inception_attention_forward(t, x, m.inc1_cfg, vars.inception[0]);
    x = t.avg_pool2d(x, 1, 2);
    x = inception_attention_forward(t, x, m.inc2_cfg, vars.inception[1]);
    x = t.avg_pool2d(x, 1, 2);
  } else {
    x = glu_forward(t, x, vars.glu[0]);
    x = t.avg_pool2d(x, 1, 2);
    x = glu_forward(t, x, vars.glu[1]);
    x = t.avg_pool2d(x, 1, 2);
  }
  Var h = t.freq_mean(x);
  if (m.kind == ModelKind::kCnnTransformer) {
    h = transformer_encoder_forward(t, h, vars.transformer);
  }

  ModelOutput out;
  out.frame_probs = framewise_head(t, h, vars.heads);
  if (m.aggregation == AggregationMethod::kAttention) {
    Var z = localization_head(t, h, vars.heads);
    if (m.kind == ModelKind::kInceptionAttention) {
      out.clip_probs = global_weighted_average(t, out.frame_probs, z);
    } else {
      out.clip_probs = aggregate(t, out.frame_probs, m.aggregation, z);
    }
  } else {
    out.clip_probs = aggregate(t, out.frame_probs, m.aggregation);
  }
  return out;
}

Inference run_model(const ToyModel &m, const Tensor &features) {
  Tensor normalized = normalize_features(m, features);
  Tape t;
  ModelVars vars = lift_params(t, m, false);
  ModelOutput out = model_forward(t, m, vars, normalized);
  Inference inf;
  inf.frame_probs = t.value(out.frame_probs);
  inf.clip_probs = t.value(out.clip_probs);
  return inf;
}

}  // namespace wsed
