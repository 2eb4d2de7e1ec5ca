// tools/wsed_main.cpp

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

// Command line driver. Subcommands cover the whole pipeline: synthetic
// training, frame-to-clip aggregation, event decoding, evaluation,
// threshold optimization and the gradient self check. Exit codes: 0 on
// success, 1 on validation or parse errors, 2 on numeric or optimization
// errors. Diagnostics go to stderr; results go to files or stdout, and
// every file is staged to `<path>.tmp` and renamed so failures leave no
// partial outputs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "wsed/aggregation.hpp"
#include "wsed/blocks.hpp"
#include "wsed/decoding.hpp"
#include "wsed/errors.hpp"
#include "wsed/io.hpp"
#include "wsed/metrics.hpp"
#include "wsed/model.hpp"
#include "wsed/rng.hpp"
#include "wsed/tape.hpp"
#include "wsed/tensor.hpp"
#include "wsed/threshopt.hpp"
#include "wsed/training.hpp"

namespace {

using namespace wsed;

std::string fmt3(double v) { return format_time(v); }

TrainRegime parse_regime(const std::string &name) {
  if (name == "clip") return TrainRegime::kClipWise;
  if (name == "segment") return TrainRegime::kSegmentWise;
  throw ArgumentError("unknown training regime '" + name +
                      "' (expected clip or segment)");
}

// Index of every row id; duplicate ids are rejected by the readers.
template <typename Rows>
std::map<std::string, int> index_rows(const Rows &rows) {
  std::map<std::string, int> idx;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    idx.emplace(rows[i].first, static_cast<int>(i));
  }
  return idx;
}

void check_same_classes(const std::vector<std::string> &a,
                        const std::vector<std::string> &b,
                        const std::string &what) {
  if (a != b) {
    throw ValidationError(what + " disagree on the class registry");
  }
}

// --- train-toy ---

struct TrainToyArgs {
  std::string out_dir;
  std::string model = "cnn-transformer";
  std::string aggregation = "attention";
  std::string regime = "clip";
  int segment_frames = 10;
  int classes = 4;
  int clips_per_class = 50;
  int frames = 80;
  int freq_bins = 16;
  int min_event = 8;
  int max_event = 24;
  double noise = 0.05;
  double frame_seconds = 0.1;
  double extra_event_prob = 0.3;
  int epochs = 200;
  int batch_size = 8;
  double lr = 1e-3;
  double lr_decay = 0.9;
  int plateau = 5;
  double mixup_alpha = 0.0;
  double holdout = 0.25;
  uint64_t seed = 1;
};

void run_train_toy(const TrainToyArgs &a) {
  SyntheticDatasetSpec sspec;
  sspec.num_classes = a.classes;
  sspec.clips_per_class = a.clips_per_class;
  sspec.frames = a.frames;
  sspec.freq_bins = a.freq_bins;
  sspec.seed = a.seed;
  sspec.min_event_frames = a.min_event;
  sspec.max_event_frames = a.max_event;
  sspec.noise_level = a.noise;
  sspec.frame_seconds = a.frame_seconds;
  sspec.extra_event_prob = a.extra_event_prob;

  TrainConfig tc;
  tc.kind = parse_model_kind(a.model);
  tc.aggregation = parse_aggregation_method(a.aggregation);
  tc.regime = parse_regime(a.regime);
  tc.segment_frames = a.segment_frames;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch_size;
  tc.learning_rate = a.lr;
  tc.lr_decay = a.lr_decay;
  tc.plateau_epochs = a.plateau;
  tc.mixup_alpha = a.mixup_alpha;
  tc.holdout_fraction = a.holdout;
  tc.seed = a.seed;

  std::cerr << "synthesizing " << a.classes * a.clips_per_class
            << " clips and training " << a.model << "\n";
  SyntheticDataset ds = synth_dataset(sspec);
  TrainResult res = train_toy(ds, tc);
  for (std::size_t e = 0; e < res.loss_history.size(); ++e) {
    std::cerr << "epoch " << e << ": train=" << format_double(res.loss_history[e])
              << " val=" << format_double(res.val_loss_history[e])
              << " lr=" << format_double(res.lr_history[e]) << "\n";
  }

  std::error_code ec;
  std::filesystem::create_directories(a.out_dir, ec);
  if (ec) {
    throw ArgumentError("cannot create directory '" + a.out_dir + "': " +
                        ec.message());
  }
  auto file = [&](const char *name) {
    return (std::filesystem::path(a.out_dir) / name).string();
  };

  Manifest mf;
  mf.class_names = ds.class_names;
  ProbTable cp;
  cp.class_names = ds.class_names;
  FrameTable fp;
  fp.class_names = ds.class_names;
  LabelTable lb;
  lb.class_names = ds.class_names;
  EventList refs;
  for (int idx : res.split.holdout) {
    const SyntheticClip &c = ds.clips[idx];
    mf.clips.push_back({c.id, ds.clip_duration(), "synthetic", c.tags});
    Inference inf = run_model(res.model, c.features);
    cp.rows.emplace_back(c.id, inf.clip_probs);
    fp.clips.emplace_back(c.id, inf.frame_probs);
    lb.rows.emplace_back(c.id, c.tags);
    refs.insert(refs.end(), c.events.begin(), c.events.end());
  }

  write_model(file("model.txt"), res.model);
  write_manifest(file("manifest.txt"), mf);
  write_clip_probs(file("clip_probs.csv"), cp);
  write_frame_probs(file("frame_probs.csv"), fp);
  write_weak_labels(file("weak_labels.csv"), lb);
  write_events(file("ref_events.csv"), ds.class_names, refs);

  std::string hist = "epoch,train_loss,val_loss,lr\n";
  for (std::size_t e = 0; e < res.loss_history.size(); ++e) {
    hist += std::to_string(e) + "," + format_double(res.loss_history[e]) + "," +
            format_double(res.val_loss_history[e]) + "," +
            format_double(res.lr_history[e]) + "\n";
  }
  write_text(file("history.csv"), hist);

  int h = static_cast<int>(res.split.holdout.size());
  int k = a.classes;
  Tensor scores({h, k});
  Tensor labels({h, k});
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < k; ++j) {
      scores(i, j) = cp.rows[i].second(j);
      labels(i, j) = static_cast<double>(lb.rows[i].second[j]);
    }
  }
  MeanApResult ap = mean_ap(scores, labels);

  std::cout << "model=" << model_kind_name(tc.kind) << "\n"
            << "aggregation=" << aggregation_method_name(tc.aggregation) << "\n"
            << "regime=" << a.regime << "\n"
            << "epochs_run=" << res.loss_history.size() << "\n"
            << "final_train_loss=" << format_double(res.loss_history.back())
            << "\n"
            << "final_val_loss=" << format_double(res.val_loss_history.back())
            << "\n"
            << "holdout_clips=" << h << "\n"
            << "holdout_clip_map="
            << (ap.map ? format_double(*ap.map) : std::string("undefined"))
            << "\n";
}

// --- aggregate ---

struct AggregateArgs {
  std::string frames;
  std::string method;
  std::string out;
};

void run_aggregate(const AggregateArgs &a) {
  FrameTable ft = read_frame_probs(a.frames);
  AggregationMethod method = parse_aggregation_method(a.method);
  ProbTable out;
  out.class_names = ft.class_names;
  for (const auto &clip : ft.clips) {
    Tensor agg = method == AggregationMethod::kAttention
                     ? aggregate(clip.second, method, clip.second)
                     : aggregate(clip.second, method);
    out.rows.emplace_back(clip.first, agg);
  }
  if (a.out.empty()) {
    write_clip_probs(std::cout, out);
  } else {
    write_clip_probs(a.out, out);
    std::cerr << "wrote " << out.rows.size() << " clips to " << a.out << "\n";
  }
}

// --- decode ---

struct DecodeArgs {
  std::string frames;
  std::string clips;
  std::string thresholds;
  std::string out;
  std::string tags;
  double mu = 0.5;
  double tau_high = 0.3;
  double tau_low = 0.1;
  double frame_seconds = 0.1;
};

void run_decode(const DecodeArgs &a) {
  FrameTable ft = read_frame_probs(a.frames);
  ProbTable ct = read_clip_probs(a.clips);
  check_same_classes(ft.class_names, ct.class_names,
                     "frame and clip tables");
  if (ft.clips.size() != ct.rows.size()) {
    throw ValidationError("frame and clip tables list different clip counts");
  }
  std::map<std::string, int> frame_idx = index_rows(ft.clips);

  int k = static_cast<int>(ct.class_names.size());
  ThresholdSet th;
  if (a.thresholds.empty()) {
    th = uniform_thresholds(k, a.mu, a.tau_high, a.tau_low);
  } else {
    NamedThresholds nt = read_thresholds(a.thresholds);
    check_same_classes(nt.class_names, ct.class_names,
                       "threshold file and probability tables");
    th = nt.thresholds;
  }

  EventList events;
  LabelTable tags;
  tags.class_names = ct.class_names;
  for (const auto &row : ct.rows) {
    auto it = frame_idx.find(row.first);
    if (it == frame_idx.end()) {
      throw ValidationError("clip '" + row.first + "' has no frame rows");
    }
    const Tensor &frames = ft.clips[it->second].second;
    EventList ev = decode_events(frames, row.second, th, a.frame_seconds,
                                 row.first);
    events.insert(events.end(), ev.begin(), ev.end());
    tags.rows.emplace_back(row.first, predict_tags(row.second, th));
  }

  write_events(a.out, ct.class_names, events);
  std::cerr << "wrote " << events.size() << " events to " << a.out << "\n";
  if (a.tags.empty()) {
    write_weak_labels(std::cout, tags);
  } else {
    write_weak_labels(a.tags, tags);
    std::cerr << "wrote tags for " << tags.rows.size() << " clips to "
              << a.tags << "\n";
  }
}

// --- evaluate ---

struct EvaluateArgs {
  std::string ref;
  std::string pred;
  std::string manifest;
  std::string clip_probs;
  std::string labels;
  std::string out;
  double segment = 1.0;
};

// Collects class names and a per-clip duration floor (the largest offset)
// without validating; read_events performs the strict pass afterwards.
void scan_event_file(const std::string &path, std::set<std::string> *classes,
                     std::map<std::string, double> *durations) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ArgumentError("cannot open '" + path + "' for reading");
  }
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) continue;
    classes->insert(fields[1]);
    try {
      double offset = parse_double(fields[3]);
      double &d = (*durations)[fields[0]];
      d = std::max(d, offset);
    } catch (const ParseError &) {
    }
  }
}

Prf class_segment_prf(const EventList &ref, const EventList &pred, int cls,
                      double segment,
                      const std::map<std::string, double> &durations, int k) {
  EventList r, p;
  for (const Event &e : ref) {
    if (e.class_id == cls) r.push_back(e);
  }
  for (const Event &e : pred) {
    if (e.class_id == cls) p.push_back(e);
  }
  return segment_f1_micro(r, p, segment, durations, k);
}

void run_evaluate(const EvaluateArgs &a) {
  if (a.clip_probs.empty() != a.labels.empty()) {
    throw ConfigError(
        "--clip-probs and --labels must be given together");
  }

  std::vector<std::string> classes;
  std::map<std::string, double> durations;
  if (a.manifest.empty()) {
    std::set<std::string> names;
    scan_event_file(a.ref, &names, &durations);
    scan_event_file(a.pred, &names, &durations);
    classes.assign(names.begin(), names.end());
    if (classes.empty()) {
      throw ValidationError("no events found in '" + a.ref + "' or '" +
                            a.pred + "'");
    }
  } else {
    Manifest mf = read_manifest(a.manifest);
    classes = mf.class_names;
    for (const ManifestClip &c : mf.clips) {
      durations[c.id] = c.duration_sec;
    }
  }
  int k = static_cast<int>(classes.size());

  EventList ref = read_events(a.ref, classes);
  EventList pred = read_events(a.pred, classes);
  ErResult er = segment_error_rate(ref, pred, a.segment, durations, k);
  Prf micro = segment_f1_micro(ref, pred, a.segment, durations, k);
  Prf macro = segment_f1_macro(ref, pred, a.segment, durations, k);

  std::string report;
  report += "segment_seconds=" + fmt3(a.segment) + "\n";
  report += "ER=" + (er.er ? fmt3(*er.er) : std::string("undefined")) + "\n";
  report += "substitutions=" + std::to_string(er.stats.substitutions) + "\n";
  report += "deletions=" + std::to_string(er.stats.deletions) + "\n";
  report += "insertions=" + std::to_string(er.stats.insertions) + "\n";
  report +=
      "reference_active=" + std::to_string(er.stats.reference_active) + "\n";
  report += "F1=" + fmt3(micro.f1) + "\n";
  report += "precision=" + fmt3(micro.precision) + "\n";
  report += "recall=" + fmt3(micro.recall) + "\n";
  report += "F1_macro=" + fmt3(macro.f1) + "\n";
  report += "class,precision,recall,f1\n";
  for (int c = 0; c < k; ++c) {
    Prf prf = class_segment_prf(ref, pred, c, a.segment, durations, k);
    report += classes[c] + "," + fmt3(prf.precision) + "," + fmt3(prf.recall) +
              "," + fmt3(prf.f1) + "\n";
  }

  if (!a.clip_probs.empty()) {
    ProbTable probs = read_clip_probs(a.clip_probs);
    LabelTable labels = read_weak_labels(a.labels);
    check_same_classes(probs.class_names, labels.class_names,
                       "clip probability and label tables");
    if (probs.rows.size() != labels.rows.size()) {
      throw ValidationError(
          "clip probability and label tables list different clip counts");
    }
    std::map<std::string, int> prob_idx = index_rows(probs.rows);
    int n = static_cast<int>(labels.rows.size());
    int ak = static_cast<int>(labels.class_names.size());
    Tensor scores({n, ak});
    Tensor truth({n, ak});
    for (int i = 0; i < n; ++i) {
      auto it = prob_idx.find(labels.rows[i].first);
      if (it == prob_idx.end()) {
        throw ValidationError("clip '" + labels.rows[i].first +
                              "' has labels but no probabilities");
      }
      for (int j = 0; j < ak; ++j) {
        scores(i, j) = probs.rows[it->second].second(j);
        truth(i, j) = static_cast<double>(labels.rows[i].second[j]);
      }
    }
    MeanApResult ap = mean_ap(scores, truth);
    report +=
        "mAP=" + (ap.map ? fmt3(*ap.map) : std::string("undefined")) + "\n";
    report += "class,ap\n";
    for (int j = 0; j < ak; ++j) {
      report += labels.class_names[j] + "," +
                (ap.per_class[j] ? fmt3(*ap.per_class[j])
                                 : std::string("undefined")) +
                "\n";
    }
  }

  std::cout << report;
  if (!a.out.empty()) {
    write_text(a.out, report);
    std::cerr << "wrote report to " << a.out << "\n";
  }
}

// --- optimize-thresholds ---

struct OptimizeArgs {
  std::string clips;
  std::string frames;
  std::string labels;
  std::string ref;
  std::string init;
  std::string out;
  std::string trace;
  std::string task = "at";
  std::string metric = "f1";
  std::string mode = "joint";
  double segment = 1.0;
  double frame_seconds = 0.1;
  double delta = 0.05;
  int iterations = 100;
  double lr = 0.01;
  double mu = 0.5;
  double tau_high = 0.3;
  double tau_low = 0.1;
};

void run_optimize(const OptimizeArgs &a) {
  ObjectiveSpec spec;
  spec.task = parse_objective_task(a.task);
  spec.metric = parse_objective_metric(a.metric);
  spec.mode = parse_optimize_mode(a.mode);
  spec.segment_seconds = a.segment;
  spec.delta = a.delta;
  spec.iterations = a.iterations;
  spec.learning_rate = a.lr;

  ProbTable ct = read_clip_probs(a.clips);
  int n = static_cast<int>(ct.rows.size());
  int k = static_cast<int>(ct.class_names.size());

  ThresholdDataset data;
  data.frame_seconds = a.frame_seconds;
  for (const auto &row : ct.rows) {
    data.clip_ids.push_back(row.first);
    data.clip_probs.push_back(row.second);
  }

  if (a.frames.empty()) {
    if (spec.task == ObjectiveTask::kDetection) {
      throw ConfigError("--frames is required for --task sed");
    }
    for (const auto &row : ct.rows) {
      data.frame_probs.emplace_back(Tensor({1, k}, row.second.vals()));
    }
  } else {
    FrameTable ft = read_frame_probs(a.frames);
    check_same_classes(ft.class_names, ct.class_names,
                       "frame and clip tables");
    if (ft.clips.size() != ct.rows.size()) {
      throw ValidationError(
          "frame and clip tables list different clip counts");
    }
    std::map<std::string, int> frame_idx = index_rows(ft.clips);
    for (const auto &row : ct.rows) {
      auto it = frame_idx.find(row.first);
      if (it == frame_idx.end()) {
        throw ValidationError("clip '" + row.first + "' has no frame rows");
      }
      data.frame_probs.push_back(ft.clips[it->second].second);
    }
  }

  data.tags = Tensor({n, k});
  if (a.labels.empty()) {
    if (spec.task == ObjectiveTask::kTagging) {
      throw ConfigError("--labels is required for --task at");
    }
  } else {
    LabelTable lt = read_weak_labels(a.labels);
    check_same_classes(lt.class_names, ct.class_names,
                       "label and clip tables");
    if (lt.rows.size() != ct.rows.size()) {
      throw ValidationError("label and clip tables list different clip counts");
    }
    std::map<std::string, int> label_idx = index_rows(lt.rows);
    for (int i = 0; i < n; ++i) {
      auto it = label_idx.find(data.clip_ids[i]);
      if (it == label_idx.end()) {
        throw ValidationError("clip '" + data.clip_ids[i] + "' has no labels");
      }
      for (int j = 0; j < k; ++j) {
        data.tags(i, j) = static_cast<double>(lt.rows[it->second].second[j]);
      }
    }
  }

  if (a.ref.empty()) {
    if (spec.task == ObjectiveTask::kDetection) {
      throw ConfigError("--ref is required for --task sed");
    }
  } else {
    data.reference_events = read_events(a.ref, ct.class_names);
  }

  spec.data = &data;

  ThresholdSet init;
  if (a.init.empty()) {
    init = uniform_thresholds(k, a.mu, a.tau_high, a.tau_low);
  } else {
    NamedThresholds nt = read_thresholds(a.init);
    check_same_classes(nt.class_names, ct.class_names,
                       "initial thresholds and clip table");
    init = nt.thresholds;
  }

  OptimizeResult res = optimize_thresholds(spec, init);
  write_thresholds(a.out, ct.class_names, res.thresholds);
  std::cerr << "wrote thresholds to " << a.out << "\n";

  if (!a.trace.empty()) {
    std::string text = "iteration,objective\n";
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
      text += std::to_string(i) + "," + format_double(res.trace[i]) + "\n";
    }
    write_text(a.trace, text);
    std::cerr << "wrote trace to " << a.trace << "\n";
  }

  std::cout << "initial_objective=" << format_double(res.trace.front()) << "\n"
            << "objective=" << format_double(res.objective) << "\n"
            << "evaluations=" << res.trace.size() << "\n";
}

// --- gradcheck ---

struct GradcheckArgs {
  uint64_t seed = 1;
  int trials = 5;
  double tolerance = 1e-4;
  double delta = 1e-4;
};

Tensor random_tensor(Rng &rng, const std::vector<int> &shape, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.data()[i] = rng.uniform(lo, hi);
  }
  return t;
}

// Each case builds one random small instance and returns the max relative
// gradient error against central differences.
double gradcase_glu(Rng &rng, double delta) {
  GluBlockParams p = init_glu(rng, 2, 2, 3, 3);
  Tensor x = random_tensor(rng, {2, 4, 4});
  return grad_check(
      [](Tape &t, const std::vector<Var> &v) {
        GluVars gv{v[1], v[2], v[3], v[4]};
        return glu_forward(t, v[0], gv);
      },
      {x, p.w, p.b, p.v, p.c}, delta);
}

double gradcase_inception(Rng &rng, double delta) {
  InceptionAttentionConfig cfg = inception_v1(8);
  InceptionAttentionParams p = init_inception(rng, 2, cfg);
  Tensor x = random_tensor(rng, {2, 4, 4});
  std::vector<Tensor> inputs = {x};
  for (const auto &bp : p.branches) {
    inputs.push_back(bp.glu.w);
    inputs.push_back(bp.glu.b);
    inputs.push_back(bp.glu.v);
    inputs.push_back(bp.glu.c);
  }
  return grad_check(
      [&cfg](Tape &t, const std::vector<Var> &v) {
        InceptionVars iv;
        const std::size_t nb = (v.size() - 1) / 4;
        for (std::size_t bi = 0; bi < nb; ++bi) {
          InceptionBranchVars bv;
          bv.glu = GluVars{v[1 + 4 * bi], v[2 + 4 * bi], v[3 + 4 * bi],
                           v[4 + 4 * bi]};
          iv.branches.push_back(bv);
        }
        return inception_attention_forward(t, v[0], cfg, iv);
      },
      inputs, delta);
}

double gradcase_transformer(Rng &rng, double delta, bool residual) {
  TransformerLayerParams p = init_transformer(rng, 3, 2, 3);
  Tensor x = random_tensor(rng, {4, 3});
  return grad_check(
      [residual](Tape &t, const std::vector<Var> &v) {
        TransformerVars tv{v[1], v[2], v[3], residual};
        return transformer_encoder_forward(t, v[0], tv);
      },
      {x, p.wq, p.wk, p.wv}, delta);
}

double gradcase_head(Rng &rng, double delta, bool localization) {
  HeadParams p = init_heads(rng, 3, 2);
  Tensor x = random_tensor(rng, {4, 3});
  return grad_check(
      [localization](Tape &t, const std::vector<Var> &v) {
        HeadVars hv{v[1], v[2], v[3], v[4]};
        return localization ? localization_head(t, v[0], hv)
                            : framewise_head(t, v[0], hv);
      },
      {x, p.cls_w, p.cls_b, p.loc_w, p.loc_b}, delta);
}

double gradcase_aggregation(Rng &rng, double delta, AggregationMethod method) {
  Tensor frames = random_tensor(rng, {5, 3}, -2.0, 2.0);
  Tensor weights = random_tensor(rng, {5, 3}, -2.0, 2.0);
  if (method == AggregationMethod::kAttention) {
    return grad_check(
        [](Tape &t, const std::vector<Var> &v) {
          return aggregate(t, t.sigmoid(v[0]), AggregationMethod::kAttention,
                           t.sigmoid(v[1]));
        },
        {frames, weights}, delta);
  }
  return grad_check(
      [method](Tape &t, const std::vector<Var> &v) {
        return aggregate(t, t.sigmoid(v[0]), method);
      },
      {frames}, delta);
}

double gradcase_gwa(Rng &rng, double delta) {
  Tensor frames = random_tensor(rng, {5, 3}, -2.0, 2.0);
  Tensor weights = random_tensor(rng, {5, 3}, -2.0, 2.0);
  return grad_check(
      [](Tape &t, const std::vector<Var> &v) {
        return global_weighted_average(t, t.sigmoid(v[0]), t.sigmoid(v[1]));
      },
      {frames, weights}, delta);
}

double gradcase_bce(Rng &rng, double delta) {
  Tensor target({3, 2});
  for (std::size_t i = 0; i < target.size(); ++i) {
    target.data()[i] = static_cast<double>(rng.uniform_int(0, 1));
  }
  Tensor logits = random_tensor(rng, {3, 2}, -2.0, 2.0);
  return grad_check(
      [target](Tape &t, const std::vector<Var> &v) {
        return t.bce(t.sigmoid(v[0]), t.constant(target));
      },
      {logits}, delta);
}

void run_gradcheck(const GradcheckArgs &a) {
  if (a.trials < 1) {
    throw ArgumentError("--trials must be at least 1");
  }
  struct GradCase {
    std::string name;
    std::function<double(Rng &, double)> run;
  };
  std::vector<GradCase> cases = {
      {"glu", gradcase_glu},
      {"inception-attention", gradcase_inception},
      {"transformer",
       [](Rng &r, double d) { return gradcase_transformer(r, d, false); }},
      {"transformer-residual",
       [](Rng &r, double d) { return gradcase_transformer(r, d, true); }},
      {"framewise-head",
       [](Rng &r, double d) { return gradcase_head(r, d, false); }},
      {"localization-head",
       [](Rng &r, double d) { return gradcase_head(r, d, true); }},
      {"attention-aggregation",
       [](Rng &r, double d) {
         return gradcase_aggregation(r, d, AggregationMethod::kAttention);
       }},
      {"avg-aggregation",
       [](Rng &r, double d) {
         return gradcase_aggregation(r, d, AggregationMethod::kAvg);
       }},
      {"global-weighted-average", gradcase_gwa},
      {"bce", gradcase_bce},
  };

  int failed = 0;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    double worst = 0.0;
    for (int trial = 0; trial < a.trials; ++trial) {
      Rng rng(a.seed + 1000 * ci + static_cast<uint64_t>(trial));
      worst = std::max(worst, cases[ci].run(rng, a.delta));
    }
    bool ok = worst < a.tolerance;
    if (!ok) ++failed;
    std::cout << cases[ci].name << ": trials=" << a.trials
              << " max_rel_err=" << format_double(worst)
              << (ok ? " PASS" : " FAIL") << "\n";
  }
  if (failed > 0) {
    throw NumericError("gradient check failed for " + std::to_string(failed) +
                       " case(s)");
  }
  std::cout << "gradcheck: all " << cases.size() << " cases passed\n";
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Weakly supervised sound event detection toolkit"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.footer(
      "Exit codes: 0 success, 1 validation or parse error, 2 numeric or "
      "optimization error.");

  TrainToyArgs ta;
  CLI::App *tt = app.add_subcommand(
      "train-toy",
      "Synthesize a toy dataset, train a model and dump holdout predictions");
  tt->add_option("--out-dir", ta.out_dir,
                 "Directory for the model, manifest, prediction, reference "
                 "and history files")
      ->required();
  tt->add_option("--model", ta.model,
                 "Architecture: cnn-transformer, cnn-glu or "
                 "inception-attention");
  tt->add_option("--aggregation", ta.aggregation,
                 "Clip aggregation: max, avg or attention");
  tt->add_option("--regime", ta.regime, "Training regime: clip or segment");
  tt->add_option("--segment-frames", ta.segment_frames,
                 "Frames per training segment in the segment regime");
  tt->add_option("--classes", ta.classes, "Number of synthetic classes");
  tt->add_option("--clips-per-class", ta.clips_per_class,
                 "Synthetic clips per class");
  tt->add_option("--frames", ta.frames, "Frames per synthetic clip");
  tt->add_option("--freq-bins", ta.freq_bins,
                 "Frequency bins per frame (positive multiple of 4)");
  tt->add_option("--min-event", ta.min_event, "Shortest event in frames");
  tt->add_option("--max-event", ta.max_event, "Longest event in frames");
  tt->add_option("--noise", ta.noise, "Background noise level");
  tt->add_option("--frame-seconds", ta.frame_seconds, "Seconds per frame");
  tt->add_option("--extra-event-prob", ta.extra_event_prob,
                 "Probability of one extra event from another class");
  tt->add_option("--epochs", ta.epochs, "Training epochs");
  tt->add_option("--batch-size", ta.batch_size, "Clips per batch");
  tt->add_option("--lr", ta.lr, "Adam learning rate");
  tt->add_option("--lr-decay", ta.lr_decay,
                 "Learning rate factor applied on validation plateau");
  tt->add_option("--plateau", ta.plateau,
                 "Epochs without improvement before the rate decays");
  tt->add_option("--mixup-alpha", ta.mixup_alpha,
                 "Mixup beta parameter, 0 disables mixup");
  tt->add_option("--holdout", ta.holdout, "Holdout fraction per class");
  tt->add_option("--seed", ta.seed, "Seed for synthesis and training");
  tt->callback([&ta] { run_train_toy(ta); });

  AggregateArgs aa;
  CLI::App *ag = app.add_subcommand(
      "aggregate", "Aggregate frame probabilities into clip probabilities");
  ag->add_option("--frames", aa.frames, "Frame probability table (csv)")
      ->required();
  ag->add_option("--method", aa.method,
                 "Aggregation method: max, avg or attention; attention "
                 "weights the frame probabilities by themselves")
      ->required();
  ag->add_option("--out", aa.out,
                 "Output clip probability table; stdout when omitted");
  ag->callback([&aa] { run_aggregate(aa); });

  DecodeArgs da;
  CLI::App *de = app.add_subcommand(
      "decode", "Decode clip tags and events with hysteresis thresholds");
  de->add_option("--frames", da.frames, "Frame probability table (csv)")
      ->required();
  de->add_option("--clips", da.clips, "Clip probability table (csv)")
      ->required();
  de->add_option("--thresholds", da.thresholds,
                 "Threshold file; defaults apply when omitted");
  de->add_option("--out", da.out, "Output event list (csv)")->required();
  de->add_option("--tags", da.tags,
                 "Output tag table; stdout when omitted");
  de->add_option("--mu", da.mu, "Clip threshold when no file is given");
  de->add_option("--tau-high", da.tau_high,
                 "High frame threshold when no file is given");
  de->add_option("--tau-low", da.tau_low,
                 "Low frame threshold when no file is given");
  de->add_option("--frame-seconds", da.frame_seconds, "Seconds per frame");
  de->callback([&da] { run_decode(da); });

  EvaluateArgs ea;
  CLI::App *ev = app.add_subcommand(
      "evaluate", "Segment based ER and F1 report for two event lists");
  ev->add_option("--ref", ea.ref, "Reference event list (csv)")->required();
  ev->add_option("--pred", ea.pred, "Predicted event list (csv)")->required();
  ev->add_option("--segment", ea.segment, "Segment length in seconds");
  ev->add_option("--manifest", ea.manifest,
                 "Manifest supplying the class registry and clip durations; "
                 "inferred from the event lists when omitted");
  ev->add_option("--clip-probs", ea.clip_probs,
                 "Clip probability table for the mAP section");
  ev->add_option("--labels", ea.labels,
                 "Weak label table for the mAP section");
  ev->add_option("--out", ea.out, "Also write the report to this file");
  ev->callback([&ea] { run_evaluate(ea); });

  OptimizeArgs oa;
  CLI::App *op = app.add_subcommand(
      "optimize-thresholds",
      "Tune decision thresholds against a tagging or detection objective");
  op->add_option("--clips", oa.clips, "Clip probability table (csv)")
      ->required();
  op->add_option("--frames", oa.frames,
                 "Frame probability table; required for --task sed");
  op->add_option("--labels", oa.labels,
                 "Weak label table; required for --task at");
  op->add_option("--ref", oa.ref,
                 "Reference event list; required for --task sed");
  op->add_option("--out", oa.out, "Output threshold file")->required();
  op->add_option("--trace", oa.trace, "Output objective trace (csv)");
  op->add_option("--task", oa.task, "Objective task: at or sed");
  op->add_option("--metric", oa.metric, "Objective metric: f1 or er");
  op->add_option("--mode", oa.mode, "Coordinate schedule: joint or two-pass");
  op->add_option("--segment", oa.segment, "Segment length in seconds");
  op->add_option("--frame-seconds", oa.frame_seconds, "Seconds per frame");
  op->add_option("--delta", oa.delta, "Forward difference step");
  op->add_option("--iterations", oa.iterations, "Optimization iterations");
  op->add_option("--lr", oa.lr, "Adam learning rate");
  op->add_option("--init-thresholds", oa.init,
                 "Initial threshold file; defaults apply when omitted");
  op->add_option("--mu", oa.mu, "Initial clip threshold");
  op->add_option("--tau-high", oa.tau_high, "Initial high frame threshold");
  op->add_option("--tau-low", oa.tau_low, "Initial low frame threshold");
  op->callback([&oa] { run_optimize(oa); });

  GradcheckArgs ga;
  CLI::App *gc = app.add_subcommand(
      "gradcheck",
      "Check analytic gradients of every smooth block against central "
      "finite differences");
  gc->add_option("--seed", ga.seed, "Base seed for the random instances");
  gc->add_option("--trials", ga.trials, "Random instances per case");
  gc->add_option("--tolerance", ga.tolerance,
                 "Max accepted relative gradient error");
  gc->add_option("--delta", ga.delta, "Central difference step");
  gc->callback([&ga] { run_gradcheck(ga); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const wsed::NumericError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const wsed::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
