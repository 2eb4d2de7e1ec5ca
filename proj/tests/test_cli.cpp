// tests/test_cli.cpp

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

// Drives the installed binary as a subprocess through the WSED_CLI
// environment variable and checks the exit-code contract, the two
// documented worked examples, byte-level idempotency and the absence of
// partial output files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "wsed/aggregation.hpp"
#include "wsed/decoding.hpp"
#include "wsed/io.hpp"
#include "wsed/model.hpp"
#include "wsed/tensor.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char *p = std::getenv("WSED_CLI");
  REQUIRE(p != nullptr);
  return p;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

// Workspace directory removed on destruction; commands run inside it.
struct CliDir {
  fs::path dir;

  CliDir() {
    dir = fs::temp_directory_path() /
          ("wsed_cli_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~CliDir() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  static int &counter() {
    static int c = 0;
    return c;
  }

  RunResult run(const std::string &args) const {
    fs::path out = dir / "_stdout.txt";
    fs::path err = dir / "_stderr.txt";
    std::string cmd = "cd '" + dir.string() + "' && '" + cli_path() + "' " +
                      args + " > '" + out.string() + "' 2> '" + err.string() +
                      "'";
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    fs::remove(out);
    fs::remove(err);
    return r;
  }

  bool has_tmp_residue() const {
    for (const auto &entry : fs::recursive_directory_iterator(dir)) {
      if (entry.path().extension() == ".tmp") return true;
    }
    return false;
  }
};

// Frame run 0.2, 0.35, 0.25, 0.15 above tau_low with one tau_high seed:
// one event over frames 1..4 at one-second frames.
void write_decode_fixture(const CliDir &ws) {
  spit(ws.dir / "f.csv",
       "clip_id,frame_idx,Alarm\n"
       "clip01,0,0.05\n"
       "clip01,1,0.2\n"
       "clip01,2,0.35\n"
       "clip01,3,0.25\n"
       "clip01,4,0.15\n"
       "clip01,5,0.05\n");
  spit(ws.dir / "c.csv", "clip_id,Alarm\nclip01,0.9\n");
  spit(ws.dir / "t.txt",
       "wsed-thresholds v1\nclass,mu,tau_high,tau_low\nAlarm,0.5,0.3,0.1\n");
}

bool contains_line(const std::string &text, const std::string &line) {
  std::stringstream ss(text);
  std::string cur;
  while (std::getline(ss, cur)) {
    if (cur == line) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("decode reproduces the single-event expansion fixture") {
  CliDir ws;
  write_decode_fixture(ws);

  RunResult r = ws.run(
      "decode --frames f.csv --clips c.csv --thresholds t.txt "
      "--out events.csv --frame-seconds 1.0");
  CHECK(r.exit_code == 0);
  CHECK(slurp(ws.dir / "events.csv") ==
        "clip_id,class_name,onset_sec,offset_sec\n"
        "clip01,Alarm,1.000,5.000\n");
  // Tags go to stdout when no --tags path is given.
  CHECK(r.out == "clip_id,Alarm\nclip01,1\n");
  CHECK(ws.has_tmp_residue() == false);

  // The built-in defaults equal the fixture file, and --tags diverts the
  // tag table into a file.
  RunResult r2 = ws.run(
      "decode --frames f.csv --clips c.csv --out events2.csv "
      "--tags tags.csv --frame-seconds 1.0");
  CHECK(r2.exit_code == 0);
  CHECK(r2.out == "");
  CHECK(slurp(ws.dir / "events2.csv") == slurp(ws.dir / "events.csv"));
  CHECK(slurp(ws.dir / "tags.csv") == "clip_id,Alarm\nclip01,1\n");
}

TEST_CASE("evaluate against itself reports a perfect score") {
  CliDir ws;
  write_decode_fixture(ws);
  REQUIRE(ws.run("decode --frames f.csv --clips c.csv --out events.csv "
                 "--frame-seconds 1.0")
              .exit_code == 0);

  RunResult r = ws.run("evaluate --ref events.csv --pred events.csv "
                       "--segment 1.0 --out report.txt");
  CHECK(r.exit_code == 0);
  CHECK(contains_line(r.out, "ER=0.000"));
  CHECK(contains_line(r.out, "F1=1.000"));
  CHECK(contains_line(r.out, "precision=1.000"));
  CHECK(contains_line(r.out, "recall=1.000"));
  CHECK(contains_line(r.out, "Alarm,1.000,1.000,1.000"));
  CHECK(slurp(ws.dir / "report.txt") == r.out);

  // An offset prediction degrades the report.
  spit(ws.dir / "off.csv",
       "clip_id,class_name,onset_sec,offset_sec\n"
       "clip01,Alarm,3.000,5.000\n");
  RunResult r2 = ws.run("evaluate --ref events.csv --pred off.csv");
  CHECK(r2.exit_code == 0);
  CHECK(contains_line(r2.out, "ER=0.500"));
  CHECK(contains_line(r2.out, "F1=0.667"));
}

TEST_CASE("unknown subcommands and bad flags exit with usage on stderr") {
  CliDir ws;

  RunResult r = ws.run("frobnicate");
  CHECK(r.exit_code == 1);
  CHECK(r.out == "");
  CHECK(r.err.find("Usage:") != std::string::npos);

  RunResult bare = ws.run("");
  CHECK(bare.exit_code == 1);
  CHECK(bare.err.find("Usage:") != std::string::npos);

  RunResult missing = ws.run("decode --frames f.csv");
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.find("Usage:") != std::string::npos);

  RunResult help = ws.run("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("train-toy") != std::string::npos);
  CHECK(help.out.find("optimize-thresholds") != std::string::npos);
  CHECK(help.err == "");

  RunResult sub_help = ws.run("decode --help");
  CHECK(sub_help.exit_code == 0);
  CHECK(sub_help.out.find("--tau-high") != std::string::npos);
  CHECK(sub_help.out.find("[0.3]") != std::string::npos);
  CHECK(sub_help.out.find("[0.1]") != std::string::npos);
  CHECK(sub_help.out.find("[0.5]") != std::string::npos);
}

TEST_CASE("exit codes separate validation failures from numeric failures") {
  CliDir ws;
  write_decode_fixture(ws);

  // Unreadable input: validation, exit 1, no output file appears.
  RunResult missing = ws.run(
      "decode --frames absent.csv --clips c.csv --out events.csv");
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.find("error:") != std::string::npos);
  CHECK(fs::exists(ws.dir / "events.csv") == false);

  // Corrupt threshold file: parse failure, exit 1.
  spit(ws.dir / "bad.txt",
       "wsed-thresholds v1\nclass,mu,tau_high,tau_low\nAlarm,0.5\n");
  RunResult corrupt = ws.run(
      "decode --frames f.csv --clips c.csv --thresholds bad.txt "
      "--out events.csv");
  CHECK(corrupt.exit_code == 1);
  CHECK(fs::exists(ws.dir / "events.csv") == false);

  // Missing required companion input: configuration error, exit 1.
  spit(ws.dir / "probs.csv", "clip_id,A\nx,0.9\n");
  RunResult no_labels =
      ws.run("optimize-thresholds --clips probs.csv --task at --out th.txt");
  CHECK(no_labels.exit_code == 1);
  CHECK(fs::exists(ws.dir / "th.txt") == false);

  // A failed gradient check is a numeric error, exit 2.
  RunResult numeric = ws.run("gradcheck --trials 1 --tolerance 0");
  CHECK(numeric.exit_code == 2);
  CHECK(numeric.out.find("FAIL") != std::string::npos);
  CHECK(numeric.err.find("error:") != std::string::npos);

  CHECK(ws.has_tmp_residue() == false);
}

TEST_CASE("gradcheck covers every smooth block and passes") {
  CliDir ws;
  RunResult r = ws.run("gradcheck --trials 2 --seed 5");
  CHECK(r.exit_code == 0);
  for (const char *name :
       {"glu", "inception-attention", "transformer", "transformer-residual",
        "framewise-head", "localization-head", "attention-aggregation",
        "avg-aggregation", "global-weighted-average", "bce"}) {
    bool found = false;
    std::stringstream ss(r.out);
    std::string line;
    while (std::getline(ss, line)) {
      if (line.rfind(std::string(name) + ":", 0) == 0 &&
          line.find(" PASS") != std::string::npos) {
        found = true;
      }
    }
    CHECK_MESSAGE(found, name);
  }
}

TEST_CASE("aggregate matches the library pooling on a hand table") {
  CliDir ws;
  spit(ws.dir / "fr.csv",
       "clip_id,frame_idx,A,B\n"
       "clipA,0,0.1,0.4\n"
       "clipA,1,0.3,0.2\n"
       "clipB,0,0.5,0.5\n");

  RunResult mx = ws.run("aggregate --frames fr.csv --method max --out m.csv");
  CHECK(mx.exit_code == 0);
  CHECK(slurp(ws.dir / "m.csv") ==
        "clip_id,A,B\nclipA,0.3,0.4\nclipB,0.5,0.5\n");

  RunResult av = ws.run("aggregate --frames fr.csv --method avg --out a.csv");
  CHECK(av.exit_code == 0);
  CHECK(slurp(ws.dir / "a.csv") ==
        "clip_id,A,B\nclipA,0.2,0.30000000000000004\nclipB,0.5,0.5\n");

  // Attention on stdout equals the self-weighted library pooling.
  RunResult at = ws.run("aggregate --frames fr.csv --method attention");
  CHECK(at.exit_code == 0);
  wsed::FrameTable ft = {{"A", "B"},
                         {{"clipA", wsed::Tensor({2, 2}, {0.1, 0.4, 0.3, 0.2})},
                          {"clipB", wsed::Tensor({1, 2}, {0.5, 0.5})}}};
  wsed::ProbTable want;
  want.class_names = ft.class_names;
  for (const auto &clip : ft.clips) {
    want.rows.emplace_back(
        clip.first, wsed::aggregate(clip.second,
                                    wsed::AggregationMethod::kAttention,
                                    clip.second));
  }
  std::stringstream expect;
  wsed::write_clip_probs(expect, want);
  CHECK(at.out == expect.str());
}

TEST_CASE("train-toy is deterministic and writes a reloadable artifact set") {
  CliDir ws;
  const std::string flags =
      "--classes 2 --clips-per-class 6 --frames 20 --freq-bins 8 "
      "--min-event 5 --max-event 12 --epochs 3 --batch-size 4 --seed 7";
  RunResult r1 = ws.run("train-toy --out-dir runA " + flags);
  RunResult r2 = ws.run("train-toy --out-dir runB " + flags);
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  CHECK(r1.out == r2.out);
  for (const char *name : {"model.txt", "manifest.txt", "clip_probs.csv",
                           "frame_probs.csv", "weak_labels.csv",
                           "ref_events.csv", "history.csv"}) {
    CHECK(slurp(ws.dir / "runA" / name) == slurp(ws.dir / "runB" / name));
    CHECK(slurp(ws.dir / "runA" / name) != "");
  }
  CHECK(contains_line(r1.out, "model=cnn-transformer"));
  CHECK(contains_line(r1.out, "epochs_run=3"));

  // The artifacts reload through the io module and agree with each other.
  wsed::ToyModel m = wsed::read_model((ws.dir / "runA" / "model.txt").string());
  CHECK(m.num_classes == 2);
  wsed::Manifest mf =
      wsed::read_manifest((ws.dir / "runA" / "manifest.txt").string());
  wsed::ProbTable cp =
      wsed::read_clip_probs((ws.dir / "runA" / "clip_probs.csv").string());
  CHECK(mf.clips.size() == cp.rows.size());
  CHECK(mf.class_names == cp.class_names);

  // The dumped predictions feed the rest of the pipeline.
  RunResult chain = ws.run(
      "decode --frames runA/frame_probs.csv --clips runA/clip_probs.csv "
      "--out pred.csv --tags predtags.csv");
  CHECK(chain.exit_code == 0);
  RunResult ev = ws.run(
      "evaluate --ref runA/ref_events.csv --pred pred.csv --segment 1.0 "
      "--clip-probs runA/clip_probs.csv --labels runA/weak_labels.csv");
  CHECK(ev.exit_code == 0);
  CHECK(ev.out.find("ER=") != std::string::npos);
  CHECK(ev.out.find("mAP=") != std::string::npos);
}

TEST_CASE("optimize-thresholds recovers the separating threshold") {
  CliDir ws;
  // Positives and negatives interleave at 0.04 spacing so every 0.05
  // forward probe crosses a prediction breakpoint.
  spit(ws.dir / "oc.csv",
       "clip_id,A\n"
       "p1,0.68\np2,0.72\np3,0.8\n"
       "n1,0.52\nn2,0.56\nn3,0.6\nn4,0.64\n");
  spit(ws.dir / "ol.csv",
       "clip_id,A\np1,1\np2,1\np3,1\nn1,0\nn2,0\nn3,0\nn4,0\n");

  RunResult r = ws.run(
      "optimize-thresholds --clips oc.csv --labels ol.csv --task at "
      "--out th.txt --trace trace.csv --iterations 60 --lr 0.02");
  CHECK(r.exit_code == 0);
  CHECK(contains_line(r.out, "initial_objective=-0.6"));
  CHECK(contains_line(r.out, "objective=-1"));
  CHECK(contains_line(r.out, "evaluations=61"));

  wsed::NamedThresholds nt =
      wsed::read_thresholds((ws.dir / "th.txt").string());
  REQUIRE(nt.thresholds.num_classes() == 1);
  // Final mu separates the classes: above every negative, at or below
  // every positive.
  CHECK(nt.thresholds.mu[0] > 0.64);
  CHECK(nt.thresholds.mu[0] <= 0.68);

  std::string trace = slurp(ws.dir / "trace.csv");
  CHECK(trace.rfind("iteration,objective\n0,-0.6\n", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 62);

  // Identical flags give byte-identical artifacts.
  RunResult again = ws.run(
      "optimize-thresholds --clips oc.csv --labels ol.csv --task at "
      "--out th2.txt --trace trace2.csv --iterations 60 --lr 0.02");
  CHECK(again.exit_code == 0);
  CHECK(slurp(ws.dir / "th2.txt") == slurp(ws.dir / "th.txt"));
  CHECK(slurp(ws.dir / "trace2.csv") == trace);

  // Two-pass spends a full budget per pass.
  RunResult two = ws.run(
      "optimize-thresholds --clips oc.csv --labels ol.csv --task at "
      "--mode two-pass --out th3.txt --iterations 30 --lr 0.02");
  CHECK(two.exit_code == 0);
  CHECK(contains_line(two.out, "objective=-1"));
  CHECK(contains_line(two.out, "evaluations=61"));
}

TEST_CASE("optimize-thresholds tunes the detection objective from files") {
  CliDir ws;
  // One positive clip with a clear frame plateau and one quiet clip.
  spit(ws.dir / "fr.csv",
       "clip_id,frame_idx,A\n"
       "pos,0,0.05\npos,1,0.85\npos,2,0.9\npos,3,0.85\npos,4,0.05\n"
       "neg,0,0.3\nneg,1,0.32\nneg,2,0.3\nneg,3,0.31\nneg,4,0.3\n");
  spit(ws.dir / "cl.csv", "clip_id,A\npos,0.9\nneg,0.34\n");
  spit(ws.dir / "re.csv",
       "clip_id,class_name,onset_sec,offset_sec\npos,A,0.100,0.400\n");

  RunResult r = ws.run(
      "optimize-thresholds --clips cl.csv --frames fr.csv --ref re.csv "
      "--task sed --metric f1 --mu 0.32 --out th.txt --iterations 30");
  CHECK(r.exit_code == 0);
  CHECK(contains_line(r.out, "objective=-1"));

  // The tuned thresholds decode to a perfect segment report.
  RunResult de = ws.run(
      "decode --frames fr.csv --clips cl.csv --thresholds th.txt "
      "--out pred.csv");
  CHECK(de.exit_code == 0);
  RunResult ev = ws.run(
      "evaluate --ref re.csv --pred pred.csv --segment 0.1");
  CHECK(ev.exit_code == 0);
  CHECK(contains_line(ev.out, "ER=0.000"));
  CHECK(contains_line(ev.out, "F1=1.000"));
}
