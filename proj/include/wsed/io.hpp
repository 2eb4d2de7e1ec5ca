// include/wsed/io.hpp

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

#ifndef WSED_IO_HPP_
#define WSED_IO_HPP_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wsed/decoding.hpp"
#include "wsed/model.hpp"
#include "wsed/tensor.hpp"

// Text persistence for every pipeline artifact. All formats are
// line-oriented with comma delimiters, dot decimals and LF newlines.
// Reading a conforming file and writing it back is byte-identical:
// general numbers serialize as shortest round-trip decimals, times and
// durations as fixed 3-decimal seconds. Path-taking writers stage into
// `<path>.tmp` and rename over the target.

namespace wsed {

std::string format_double(double v);
std::string format_time(double seconds);

// Strict full-consumption finite decimal, ParseError otherwise.
double parse_double(const std::string &text);

// Index of `name` in the registry order; unknown names raise
// RegistryError. The registry order is the single source of class index
// k for every file format here.
int class_index(const std::vector<std::string> &class_names,
                const std::string &name);

// Atomic whole-file write with the same `<path>.tmp` staging as every
// other path-taking writer; ArgumentError on any filesystem failure.
void write_text(const std::string &path, const std::string &text);

// --- manifest ---

struct ManifestClip {
  std::string id;
  double duration_sec = 0.0;
  std::string feature_path;
  std::vector<int> tags;  // length K, 0/1
};

struct Manifest {
  std::vector<std::string> class_names;
  std::vector<ManifestClip> clips;
};

void validate(const Manifest &m);

void write_manifest(std::ostream &out, const Manifest &m);
void write_manifest(const std::string &path, const Manifest &m);
Manifest read_manifest(std::istream &in);
Manifest read_manifest(const std::string &path);

// --- probability and label tables ---

// One row per clip: id -> [K] clip probabilities.
struct ProbTable {
  std::vector<std::string> class_names;
  std::vector<std::pair<std::string, Tensor>> rows;
};

// A block of consecutive frame rows per clip: id -> [T x K].
struct FrameTable {
  std::vector<std::string> class_names;
  std::vector<std::pair<std::string, Tensor>> clips;
};

// One row per clip: id -> binary weak labels, length K.
struct LabelTable {
  std::vector<std::string> class_names;
  std::vector<std::pair<std::string, std::vector<int>>> rows;
};

void validate(const ProbTable &table);
void validate(const FrameTable &table);
void validate(const LabelTable &table);

void write_clip_probs(std::ostream &out, const ProbTable &table);
void write_clip_probs(const std::string &path, const ProbTable &table);
ProbTable read_clip_probs(std::istream &in);
ProbTable read_clip_probs(const std::string &path);

void write_frame_probs(std::ostream &out, const FrameTable &table);
void write_frame_probs(const std::string &path, const FrameTable &table);
FrameTable read_frame_probs(std::istream &in);
FrameTable read_frame_probs(const std::string &path);

void write_weak_labels(std::ostream &out, const LabelTable &table);
void write_weak_labels(const std::string &path, const LabelTable &table);
LabelTable read_weak_labels(std::istream &in);
LabelTable read_weak_labels(const std::string &path);

// --- events ---

void write_events(std::ostream &out,
                  const std::vector<std::string> &class_names,
                  const EventList &events);
void write_events(const std::string &path,
                  const std::vector<std::string> &class_names,
                  const EventList &events);
EventList read_events(std::istream &in,
                      const std::vector<std::string> &class_names);
EventList read_events(const std::string &path,
                      const std::vector<std::string> &class_names);

// --- thresholds ---

struct NamedThresholds {
  std::vector<std::string> class_names;
  ThresholdSet thresholds;
};

void write_thresholds(std::ostream &out,
                      const std::vector<std::string> &class_names,
                      const ThresholdSet &thresholds);
void write_thresholds(const std::string &path,
                      const std::vector<std::string> &class_names,
                      const ThresholdSet &thresholds);
NamedThresholds read_thresholds(std::istream &in);
NamedThresholds read_thresholds(const std::string &path);

// --- model parameters ---

void write_model(std::ostream &out, const ToyModel &m);
void write_model(const std::string &path, const ToyModel &m);
ToyModel read_model(std::istream &in);
ToyModel read_model(const std::string &path);

}  // namespace wsed

#endif  // WSED_IO_HPP_
