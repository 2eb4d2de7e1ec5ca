// src/io.cpp

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

#include "wsed/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "wsed/errors.hpp"
#include "wsed/rng.hpp"

namespace wsed {

namespace {

constexpr const char *kManifestVersion = "wsed-manifest v1";
constexpr const char *kThresholdVersion = "wsed-thresholds v1";
constexpr const char *kModelVersion = "wsed-model v1";
constexpr const char *kEventHeader = "clip_id,class_name,onset_sec,offset_sec";
constexpr const char *kThresholdHeader = "class,mu,tau_high,tau_low";

// Identifiers, class names and paths are delimiter-free tokens.
void check_token(const std::string &s, const char *what) {
  if (s.empty()) {
    throw ValidationError(std::string(what) + " must not be empty");
  }
  if (s.front() == ' ' || s.back() == ' ') {
    throw ValidationError(std::string(what) + " '" + s +
                          "' has surrounding whitespace");
  }
  for (char c : s) {
    if (c == ',' || c == '|' || c == '\n' || c == '\r') {
      throw ValidationError(std::string(what) + " '" + s +
                            "' contains a delimiter character");
    }
  }
}

void check_class_names(const std::vector<std::string> &names) {
  if (names.empty()) {
    throw ValidationError("class registry must not be empty");
  }
  std::set<std::string> seen;
  for (const std::string &name : names) {
    check_token(name, "class name");
    if (!seen.insert(name).second) {
      throw ValidationError("duplicate class name '" + name + "'");
    }
  }
}

[[noreturn]] void parse_fail(long long line, const std::string &msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split(const std::string &s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool next_line(std::istream &in, std::string &line, long long &lineno) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++lineno;
  return true;
}

void expect_line(std::istream &in, const char *expected, long long &lineno) {
  std::string line;
  if (!next_line(in, line, lineno)) {
    parse_fail(lineno + 1, std::string("expected '") + expected +
                               "', found end of file");
  }
  if (line != expected) {
    parse_fail(lineno, std::string("expected '") + expected + "', found '" +
                           line + "'");
  }
}

double parse_double_at(const std::string &text, long long line) {
  try {
    return parse_double(text);
  } catch (const ParseError &e) {
    parse_fail(line, e.what());
  }
}

double parse_prob_at(const std::string &text, long long line) {
  double v = parse_double_at(text, line);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError("line " + std::to_string(line) + ": probability " +
                          text + " outside [0, 1]");
  }
  return v;
}

long long parse_int_at(const std::string &text, long long line) {
  long long v = 0;
  const char *first = text.data();
  const char *last = first + text.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    parse_fail(line, "expected an integer, found '" + text + "'");
  }
  return v;
}

int parse_label_at(const std::string &text, long long line) {
  long long v = parse_int_at(text, line);
  if (v != 0 && v != 1) {
    throw ValidationError("line " + std::to_string(line) + ": weak label " +
                          text + " must be 0 or 1");
  }
  return static_cast<int>(v);
}

std::string table_header(const std::vector<std::string> &class_names,
                         bool frame_column) {
  std::string header = "clip_id";
  if (frame_column) header += ",frame_idx";
  for (const std::string &name : class_names) header += "," + name;
  return header;
}

std::vector<std::string> parse_table_header(const std::string &line,
                                            bool frame_column,
                                            long long lineno) {
  std::vector<std::string> fields = split(line, ',');
  std::size_t fixed = frame_column ? 2 : 1;
  if (fields.size() < fixed + 1 || fields[0] != "clip_id" ||
      (frame_column && fields[1] != "frame_idx")) {
    parse_fail(lineno, "malformed table header '" + line + "'");
  }
  std::vector<std::string> names(fields.begin() + static_cast<long>(fixed),
                                 fields.end());
  try {
    check_class_names(names);
  } catch (const ValidationError &e) {
    parse_fail(lineno, e.what());
  }
  return names;
}

void write_file(const std::string &path,
                const std::function<void(std::ostream &)> &body) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      throw ArgumentError("cannot open '" + tmp + "' for writing");
    }
    body(out);
    if (!out) {
      throw ArgumentError("failed writing '" + tmp + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ArgumentError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

std::ifstream open_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ArgumentError("cannot open '" + path + "' for reading");
  }
  return in;
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) {
    throw ValidationError("cannot serialize a non-finite number");
  }
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_time(double seconds) {
  if (!std::isfinite(seconds)) {
    throw ValidationError("cannot serialize a non-finite time");
  }
  char buf[64];
  auto res =
      std::to_chars(buf, buf + sizeof(buf), seconds, std::chars_format::fixed,
                    3);
  if (res.ec != std::errc()) {
    throw ValidationError("time value out of serializable range");
  }
  return std::string(buf, res.ptr);
}

double parse_double(const std::string &text) {
  double v = 0.0;
  const char *first = text.data();
  const char *last = first + text.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw ParseError("expected a finite number, found '" + text + "'");
  }
  return v;
}

int class_index(const std::vector<std::string> &class_names,
                const std::string &name) {
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    if (class_names[i] == name) return static_cast<int>(i);
  }
  throw RegistryError("unknown class name '" + name + "'");
}

void write_text(const std::string &path, const std::string &text) {
  write_file(path, [&](std::ostream &out) { out << text; });
}

// --- manifest ---

void validate(const Manifest &m) {
  check_class_names(m.class_names);
  std::set<std::string> ids;
  for (const ManifestClip &clip : m.clips) {
    check_token(clip.id, "clip id");
    if (!ids.insert(clip.id).second) {
      throw ValidationError("duplicate clip id '" + clip.id + "'");
    }
    check_token(clip.feature_path, "feature path");
    if (!(clip.duration_sec > 0.0) || !std::isfinite(clip.duration_sec)) {
      throw ValidationError("clip '" + clip.id +
                            "' must have a positive duration");
    }
    if (clip.tags.size() != m.class_names.size()) {
      throw DimensionError("clip '" + clip.id + "' has " +
                           std::to_string(clip.tags.size()) +
                           " tags, expected " +
                           std::to_string(m.class_names.size()));
    }
    for (int t : clip.tags) {
      if (t != 0 && t != 1) {
        throw ValidationError("clip '" + clip.id + "' has a non-binary tag");
      }
    }
  }
}

void write_manifest(std::ostream &out, const Manifest &m) {
  validate(m);
  out << kManifestVersion << "\n";
  out << "classes: ";
  for (std::size_t i = 0; i < m.class_names.size(); ++i) {
    out << (i == 0 ? "" : ",") << m.class_names[i];
  }
  out << "\nclips:\n";
  for (const ManifestClip &clip : m.clips) {
    out << clip.id << "," << format_time(clip.duration_sec) << ","
        << clip.feature_path << ",";
    bool first = true;
    for (std::size_t k = 0; k < clip.tags.size(); ++k) {
      if (clip.tags[k] == 1) {
        out << (first ? "" : "|") << m.class_names[k];
        first = false;
      }
    }
    out << "\n";
  }
}

Manifest read_manifest(std::istream &in) {
  long long lineno = 0;
  expect_line(in, kManifestVersion, lineno);
  std::string line;
  if (!next_line(in, line, lineno) || line.rfind("classes: ", 0) != 0) {
    parse_fail(lineno + 1, "expected the 'classes: ' registry line");
  }
  Manifest m;
  m.class_names = split(line.substr(9), ',');
  try {
    check_class_names(m.class_names);
  } catch (const ValidationError &e) {
    parse_fail(lineno, e.what());
  }
  expect_line(in, "clips:", lineno);
  while (next_line(in, line, lineno)) {
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 4) {
      parse_fail(lineno, "expected 4 comma-separated clip fields, found " +
                             std::to_string(fields.size()));
    }
    ManifestClip clip;
    clip.id = fields[0];
    clip.duration_sec = parse_double_at(fields[1], lineno);
    clip.feature_path = fields[2];
    clip.tags.assign(m.class_names.size(), 0);
    if (!fields[3].empty()) {
      for (const std::string &name : split(fields[3], '|')) {
        clip.tags[static_cast<std::size_t>(
            class_index(m.class_names, name))] = 1;
      }
    }
    m.clips.push_back(clip);
  }
  validate(m);
  return m;
}

void write_manifest(const std::string &path, const Manifest &m) {
  write_file(path, [&](std::ostream &out) { write_manifest(out, m); });
}

Manifest read_manifest(const std::string &path) {
  std::ifstream in = open_file(path);
  return read_manifest(in);
}

// --- probability and label tables ---

void validate(const ProbTable &table) {
  check_class_names(table.class_names);
  int k = static_cast<int>(table.class_names.size());
  std::set<std::string> ids;
  for (const auto &[id, probs] : table.rows) {
    check_token(id, "clip id");
    if (!ids.insert(id).second) {
      throw ValidationError("duplicate clip id '" + id + "'");
    }
    if (probs.rank() != 1 || probs.dim(0) != k) {
      throw DimensionError("clip '" + id + "' must carry [" +
                           std::to_string(k) + "] probabilities, got " +
                           shape_str(probs.shape()));
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
      double v = probs.data()[i];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("clip '" + id + "' probability outside [0, 1]");
      }
    }
  }
}

void validate(const FrameTable &table) {
  check_class_names(table.class_names);
  int k = static_cast<int>(table.class_names.size());
  std::set<std::string> ids;
  for (const auto &[id, frames] : table.clips) {
    check_token(id, "clip id");
    if (!ids.insert(id).second) {
      throw ValidationError("duplicate clip id '" + id + "'");
    }
    if (frames.rank() != 2 || frames.dim(1) != k || frames.dim(0) < 1) {
      throw DimensionError("clip '" + id + "' must carry [T x " +
                           std::to_string(k) + "] probabilities, got " +
                           shape_str(frames.shape()));
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
      double v = frames.data()[i];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("clip '" + id + "' probability outside [0, 1]");
      }
    }
  }
}

void validate(const LabelTable &table) {
  check_class_names(table.class_names);
  std::set<std::string> ids;
  for (const auto &[id, labels] : table.rows) {
    check_token(id, "clip id");
    if (!ids.insert(id).second) {
      throw ValidationError("duplicate clip id '" + id + "'");
    }
    if (labels.size() != table.class_names.size()) {
      throw DimensionError("clip '" + id + "' has " +
                           std::to_string(labels.size()) +
                           " labels, expected " +
                           std::to_string(table.class_names.size()));
    }
    for (int v : labels) {
      if (v != 0 && v != 1) {
        throw ValidationError("clip '" + id + "' has a non-binary label");
      }
    }
  }
}

void write_clip_probs(std::ostream &out, const ProbTable &table) {
  validate(table);
  out << table_header(table.class_names, false) << "\n";
  for (const auto &[id, probs] : table.rows) {
    out << id;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      out << "," << format_double(probs.data()[i]);
    }
    out << "\n";
  }
}

ProbTable read_clip_probs(std::istream &in) {
  long long lineno = 0;
  std::string line;
  if (!next_line(in, line, lineno)) {
    parse_fail(1, "expected a table header, found end of file");
  }
  ProbTable table;
  table.class_names = parse_table_header(line, false, lineno);
  std::size_t k = table.class_names.size();
  while (next_line(in, line, lineno)) {
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != k + 1) {
      parse_fail(lineno, "expected " + std::to_string(k + 1) +
                             " fields, found " +
                             std::to_string(fields.size()));
    }
    Tensor probs({static_cast<int>(k)});
    for (std::size_t i = 0; i < k; ++i) {
      probs.data()[i] = parse_prob_at(fields[i + 1], lineno);
    }
    table.rows.emplace_back(fields[0], probs);
  }
  validate(table);
  return table;
}

void write_frame_probs(std::ostream &out, const FrameTable &table) {
  validate(table);
  out << table_header(table.class_names, true) << "\n";
  for (const auto &[id, frames] : table.clips) {
    for (int t = 0; t < frames.dim(0); ++t) {
      out << id << "," << t;
      for (int c = 0; c < frames.dim(1); ++c) {
        out << "," << format_double(frames(t, c));
      }
      out << "\n";
    }
  }
}

FrameTable read_frame_probs(std::istream &in) {
  long long lineno = 0;
  std::string line;
  if (!next_line(in, line, lineno)) {
    parse_fail(1, "expected a table header, found end of file");
  }
  FrameTable table;
  table.class_names = parse_table_header(line, true, lineno);
  std::size_t k = table.class_names.size();
  std::string current;
  std::vector<double> buffer;
  auto flush = [&] {
    if (current.empty()) return;
    int frames = static_cast<int>(buffer.size() / k);
    table.clips.emplace_back(
        current, Tensor({frames, static_cast<int>(k)}, buffer));
    buffer.clear();
  };
  std::set<std::string> done;
  while (next_line(in, line, lineno)) {
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != k + 2) {
      parse_fail(lineno, "expected " + std::to_string(k + 2) +
                             " fields, found " +
                             std::to_string(fields.size()));
    }
    if (fields[0].empty()) {
      parse_fail(lineno, "empty clip id");
    }
    if (fields[0] != current) {
      flush();
      if (!done.insert(fields[0]).second) {
        parse_fail(lineno, "frame rows for clip '" + fields[0] +
                               "' are not contiguous");
      }
      current = fields[0];
    }
    long long idx = parse_int_at(fields[1], lineno);
    if (idx != static_cast<long long>(buffer.size() / k)) {
      parse_fail(lineno, "frame index " + std::to_string(idx) +
                             " out of order for clip '" + current + "'");
    }
    for (std::size_t i = 0; i < k; ++i) {
      buffer.push_back(parse_prob_at(fields[i + 2], lineno));
    }
  }
  flush();
  validate(table);
  return table;
}

void write_weak_labels(std::ostream &out, const LabelTable &table) {
  validate(table);
  out << table_header(table.class_names, false) << "\n";
  for (const auto &[id, labels] : table.rows) {
    out << id;
    for (int v : labels) out << "," << v;
    out << "\n";
  }
}

LabelTable read_weak_labels(std::istream &in) {
  long long lineno = 0;
  std::string line;
  if (!next_line(in, line, lineno)) {
    parse_fail(1, "expected a table header, found end of file");
  }
  LabelTable table;
  table.class_names = parse_table_header(line, false, lineno);
  std::size_t k = table.class_names.size();
  while (next_line(in, line, lineno)) {
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != k + 1) {
      parse_fail(lineno, "expected " + std::to_string(k + 1) +
                             " fields, found " +
                             std::to_string(fields.size()));
    }
    std::vector<int> labels(k);
    for (std::size_t i = 0; i < k; ++i) {
      labels[i] = parse_label_at(fields[i + 1], lineno);
    }
    table.rows.emplace_back(fields[0], labels);
  }
  validate(table);
  return table;
}

void write_clip_probs(const std::string &path, const ProbTable &table) {
  write_file(path, [&](std::ostream &out) { write_clip_probs(out, table); });
}

ProbTable read_clip_probs(const std::string &path) {
  std::ifstream in = open_file(path);
  return read_clip_probs(in);
}

void write_frame_probs(const std::string &path, const FrameTable &table) {
  write_file(path, [&](std::ostream &out) { write_frame_probs(out, table); });
}

FrameTable read_frame_probs(const std::string &path) {
  std::ifstream in = open_file(path);
  return read_frame_probs(in);
}

void write_weak_labels(const std::string &path, const LabelTable &table) {
  write_file(path, [&](std::ostream &out) { write_weak_labels(out, table); });
}

LabelTable read_weak_labels(const std::string &path) {
  std::ifstream in = open_file(path);
  return read_weak_labels(in);
}

// --- events ---

void write_events(std::ostream &out,
                  const std::vector<std::string> &class_names,
                  const EventList &events) {
  check_class_names(class_names);
  out << kEventHeader << "\n";
  for (const Event &e : events) {
    check_token(e.clip_id, "clip id");
    if (e.class_id < 0 ||
        e.class_id >= static_cast<int>(class_names.size())) {
      throw ValidationError("event class " + std::to_string(e.class_id) +
                            " outside the registry");
    }
    std::string onset = format_time(e.onset_sec);
    std::string offset = format_time(e.offset_sec);
    if (!(e.onset_sec >= 0.0) || !(e.onset_sec < e.offset_sec) ||
        onset == offset) {
      throw ValidationError("event in clip '" + e.clip_id +
                            "' has a degenerate time span");
    }
    out << e.clip_id << ","
        << class_names[static_cast<std::size_t>(e.class_id)] << "," << onset
        << "," << offset << "\n";
  }
}

EventList read_events(std::istream &in,
                      const std::vector<std::string> &class_names) {
  check_class_names(class_names);
  long long lineno = 0;
  expect_line(in, kEventHeader, lineno);
  EventList events;
  std::string line;
  while (next_line(in, line, lineno)) {
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 4) {
      parse_fail(lineno, "expected 4 comma-separated event fields, found " +
                             std::to_string(fields.size()));
    }
    Event e;
    check_token(fields[0], "clip id");
    e.clip_id = fields[0];
    e.class_id = class_index(class_names, fields[1]);
    e.onset_sec = parse_double_at(fields[2], lineno);
    e.offset_sec = parse_double_at(fields[3], lineno);
    if (!(e.onset_sec >= 0.0) || !(e.onset_sec < e.offset_sec)) {
      throw ValidationError("line " + std::to_string(lineno) +
                            ": event has a degenerate time span");
    }
    events.push_back(e);
  }
  return events;
}

void write_events(const std::string &path,
                  const std::vector<std::string> &class_names,
                  const EventList &events) {
  write_file(path,
             [&](std::ostream &out) { write_events(out, class_names, events); });
}

EventList read_events(const std::string &path,
                      const std::vector<std::string> &class_names) {
  std::ifstream in = open_file(path);
  return read_events(in, class_names);
}

// --- thresholds ---

void write_thresholds(std::ostream &out,
                      const std::vector<std::string> &class_names,
                      const ThresholdSet &thresholds) {
  check_class_names(class_names);
  validate(thresholds);
  if (thresholds.num_classes() != static_cast<int>(class_names.size())) {
    throw DimensionError("threshold set covers " +
                         std::to_string(thresholds.num_classes()) +
                         " classes, registry has " +
                         std::to_string(class_names.size()));
  }
  out << kThresholdVersion << "\n" << kThresholdHeader << "\n";
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    out << class_names[i] << "," << format_double(thresholds.mu[i]) << ","
        << format_double(thresholds.tau_high[i]) << ","
        << format_double(thresholds.tau_low[i]) << "\n";
  }
}

NamedThresholds read_thresholds(std::istream &in) {
  long long lineno = 0;
  expect_line(in, kThresholdVersion, lineno);
  expect_line(in, kThresholdHeader, lineno);
  NamedThresholds named;
  std::string line;
  while (next_line(in, line, lineno)) {
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 4) {
      parse_fail(lineno, "expected 4 comma-separated threshold fields, "
                         "found " +
                             std::to_string(fields.size()));
    }
    named.class_names.push_back(fields[0]);
    named.thresholds.mu.push_back(parse_prob_at(fields[1], lineno));
    named.thresholds.tau_high.push_back(parse_prob_at(fields[2], lineno));
    named.thresholds.tau_low.push_back(parse_prob_at(fields[3], lineno));
  }
  check_class_names(named.class_names);
  validate(named.thresholds);
  return named;
}

void write_thresholds(const std::string &path,
                      const std::vector<std::string> &class_names,
                      const ThresholdSet &thresholds) {
  write_file(path, [&](std::ostream &out) {
    write_thresholds(out, class_names, thresholds);
  });
}

NamedThresholds read_thresholds(const std::string &path) {
  std::ifstream in = open_file(path);
  return read_thresholds(in);
}

// --- model parameters ---

void write_model(std::ostream &out, const ToyModel &m) {
  out << kModelVersion << "\n";
  out << "kind: " << model_kind_name(m.kind) << "\n";
  out << "aggregation: " << aggregation_method_name(m.aggregation) << "\n";
  out << "num_classes: " << m.num_classes << "\n";
  out << "freq_bins: " << m.freq_bins << "\n";
  out << "frame_seconds: " << format_double(m.frame_seconds) << "\n";
  out << "norm_mean: " << format_double(m.norm_mean) << "\n";
  out << "norm_std: " << format_double(m.norm_std) << "\n";
  for (const auto &[name, tensor] : named_params(m)) {
    out << "param: " << name << " ";
    const std::vector<int> &shape = tensor->shape();
    for (std::size_t i = 0; i < shape.size(); ++i) {
      out << (i == 0 ? "" : ",") << shape[i];
    }
    for (std::size_t i = 0; i < tensor->size(); ++i) {
      out << " " << format_double(tensor->data()[i]);
    }
    out << "\n";
  }
}

namespace {

std::string expect_field(std::istream &in, const char *key,
                         long long &lineno) {
  std::string prefix = std::string(key) + ": ";
  std::string line;
  if (!next_line(in, line, lineno)) {
    parse_fail(lineno + 1, "expected '" + prefix +
                               "...', found end of file");
  }
  if (line.rfind(prefix, 0) != 0) {
    parse_fail(lineno, "expected '" + prefix + "...', found '" + line + "'");
  }
  return line.substr(prefix.size());
}

}  // namespace

ToyModel read_model(std::istream &in) {
  long long lineno = 0;
  expect_line(in, kModelVersion, lineno);
  std::string kind_name = expect_field(in, "kind", lineno);
  std::string agg_name = expect_field(in, "aggregation", lineno);
  long long num_classes =
      parse_int_at(expect_field(in, "num_classes", lineno), lineno);
  long long freq_bins =
      parse_int_at(expect_field(in, "freq_bins", lineno), lineno);
  double frame_seconds =
      parse_double_at(expect_field(in, "frame_seconds", lineno), lineno);
  double norm_mean =
      parse_double_at(expect_field(in, "norm_mean", lineno), lineno);
  double norm_std =
      parse_double_at(expect_field(in, "norm_std", lineno), lineno);
  if (num_classes < 1 || num_classes > 4096) {
    parse_fail(lineno, "num_classes out of range");
  }
  if (freq_bins < 1 || freq_bins > 4096) {
    parse_fail(lineno, "freq_bins out of range");
  }
  if (!(frame_seconds > 0.0)) {
    parse_fail(lineno, "frame_seconds must be positive");
  }

  Rng rng(0);
  ToyModel m = init_toy_model(parse_model_kind(kind_name),
                              parse_aggregation_method(agg_name),
                              static_cast<int>(num_classes),
                              static_cast<int>(freq_bins), rng);
  m.frame_seconds = frame_seconds;
  m.norm_mean = norm_mean;
  m.norm_std = norm_std;

  std::vector<std::pair<std::string, Tensor *>> params = named_params(m);
  std::set<std::string> filled;
  std::string line;
  while (next_line(in, line, lineno)) {
    if (line.rfind("param: ", 0) != 0) {
      parse_fail(lineno, "expected 'param: ...', found '" + line + "'");
    }
    std::vector<std::string> fields = split(line.substr(7), ' ');
    if (fields.size() < 3) {
      parse_fail(lineno, "malformed parameter record");
    }
    Tensor *target = nullptr;
    for (auto &[name, tensor] : params) {
      if (name == fields[0]) target = tensor;
    }
    if (target == nullptr) {
      parse_fail(lineno, "unknown parameter '" + fields[0] + "'");
    }
    if (!filled.insert(fields[0]).second) {
      parse_fail(lineno, "duplicate parameter '" + fields[0] + "'");
    }
    std::vector<int> shape;
    for (const std::string &d : split(fields[1], ',')) {
      shape.push_back(static_cast<int>(parse_int_at(d, lineno)));
    }
    if (shape != target->shape()) {
      parse_fail(lineno, "parameter '" + fields[0] + "' has shape " +
                             shape_str(shape) + ", expected " +
                             shape_str(target->shape()));
    }
    if (fields.size() - 2 != target->size()) {
      parse_fail(lineno, "parameter '" + fields[0] + "' carries " +
                             std::to_string(fields.size() - 2) +
                             " values, expected " +
                             std::to_string(target->size()));
    }
    for (std::size_t i = 0; i < target->size(); ++i) {
      target->data()[i] = parse_double_at(fields[i + 2], lineno);
    }
  }
  if (filled.size() != params.size()) {
    parse_fail(lineno, "model file covers " + std::to_string(filled.size()) +
                           " of " + std::to_string(params.size()) +
                           " parameters");
  }
  return m;
}

void write_model(const std::string &path, const ToyModel &m) {
  write_file(path, [&](std::ostream &out) { write_model(out, m); });
}

ToyModel read_model(const std::string &path) {
  std::ifstream in = open_file(path);
  return read_model(in);
}

}  // namespace wsed
