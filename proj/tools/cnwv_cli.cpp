// Copyright 2026 The cnwv Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cnwv: post-process word vectors and evaluate them.
//
//   cnwv postprocess --method cn|abtt|ew --input PATH --format FMT --output PATH ...
//   cnwv eval similarity|sts|categorize --vectors PATH --format FMT --dataset PATH
//   cnwv gating --vectors PATH --format FMT --alpha F --d N
//
// Exit status is 0 on success, 2 on a usage error, the numeric ErrorCode of a
// library error, and 1 for anything else.

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cnwv/cnwv.hpp"

namespace {

using cnwv::EmbeddingFormat;

const std::map<std::string, EmbeddingFormat> kFormats = {
    {"w2v-bin", EmbeddingFormat::Word2vecBinary},
    {"glove-txt", EmbeddingFormat::GloveText},
};

std::string shortest(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

struct PostprocessArgs {
  std::string method;
  std::string input;
  std::string format;
  std::string output;
  std::string output_format;
  double alpha = 2.0;
  std::size_t d = 3;
  double p = 0.5;
  std::string subset_vocab;
  bool center = false;
  unsigned threads = cnwv::hardware_threads();
};

struct EvalArgs {
  std::string task;
  std::string vectors;
  std::string format;
  std::string dataset;
  bool lowercase_fallback = false;
};

struct GatingArgs {
  std::string vectors;
  std::string format = "glove-txt";
  double alpha = 2.0;
  std::size_t d = 3;
  std::string subset_vocab;
  bool center = false;
  unsigned threads = cnwv::hardware_threads();
};

int run_postprocess(const PostprocessArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  const EmbeddingFormat in_format = kFormats.at(a.format);
  const EmbeddingFormat out_format =
      a.output_format.empty() ? in_format : kFormats.at(a.output_format);
  const cnwv::Exec exec{a.threads};

  auto loaded = cnwv::read_embedding<float>(a.input, in_format);
  const auto& emb = loaded.embedding;

  std::optional<std::vector<std::string>> subset;
  std::size_t subset_matched = 0;
  if (!a.subset_vocab.empty()) {
    subset = cnwv::read_token_list(a.subset_vocab);
    subset_matched = cnwv::subset_rows(emb, *subset).size();
  }

  std::optional<cnwv::Embedding<float>> out;
  if (a.method == "cn") {
    out = cnwv::cn_transform(emb, cnwv::CnConfig{a.alpha, subset, a.center}, exec);
  } else if (a.method == "abtt") {
    out = cnwv::abtt_transform(emb, cnwv::AbttConfig{a.d}, exec);
  } else {
    out = cnwv::ew_transform(emb, a.p, exec);
  }
  cnwv::write_embedding(*out, std::filesystem::path(a.output), out_format);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream manifest(a.output + ".manifest");
  manifest << "command: postprocess\n"
           << "input: " << a.input << "\n"
           << "format: " << a.format << "\n"
           << "output: " << a.output << "\n"
           << "output_format: " << (a.output_format.empty() ? a.format : a.output_format) << "\n"
           << "method: " << a.method << "\n";
  if (a.method == "cn") {
    manifest << "alpha: " << shortest(a.alpha) << "\n"
             << "subset_vocab: " << (a.subset_vocab.empty() ? "none" : a.subset_vocab) << "\n";
    if (subset) manifest << "subset_matched: " << subset_matched << "\n";
    manifest << "center: " << (a.center ? "true" : "false") << "\n";
  } else if (a.method == "abtt") {
    manifest << "d: " << a.d << "\n" << "center: true\n";
  } else {
    manifest << "p: " << shortest(a.p) << "\n";
  }
  manifest << "rows: " << out->size() << "\n"
           << "dim: " << out->dim() << "\n"
           << "duplicates_dropped: " << loaded.report.duplicates << "\n"
           << "threads: " << a.threads << "\n"
           << "determinism: seedless; output depends only on inputs and flags\n"
           << "wall_time_s: " << seconds << "\n";
  if (!manifest) throw cnwv::Error(cnwv::ErrorCode::Io, "cannot write manifest");

  std::cerr << "wrote " << out->size() << " x " << out->dim() << " vectors to " << a.output;
  if (loaded.report.duplicates > 0) {
    std::cerr << " (" << loaded.report.duplicates << " duplicate tokens dropped)";
  }
  std::cerr << "\n";
  return 0;
}

int run_eval(const EvalArgs& a) {
  const auto emb = cnwv::read_embedding<float>(a.vectors, kFormats.at(a.format)).embedding;
  const cnwv::LookupPolicy policy{a.lowercase_fallback};
  cnwv::EvalReport report;
  if (a.task == "similarity") {
    report = cnwv::eval_similarity(emb, cnwv::read_similarity_dataset(a.dataset), policy);
  } else if (a.task == "sts") {
    report = cnwv::eval_sts(emb, cnwv::read_sts_dataset(a.dataset), policy);
  } else {
    report = cnwv::eval_categorization(emb, cnwv::read_category_dataset(a.dataset), policy);
  }
  std::printf("metric\tscore\tevaluated\tskipped\n%s\t%.2f\t%zu\t%zu\n", report.metric.c_str(),
              100.0 * report.score, report.evaluated, report.skipped);
  return 0;
}

int run_gating(const GatingArgs& a) {
  const auto emb = cnwv::read_embedding<float>(a.vectors, kFormats.at(a.format)).embedding;
  std::optional<std::vector<std::string>> subset;
  if (!a.subset_vocab.empty()) subset = cnwv::read_token_list(a.subset_vocab);
  const auto abtt = cnwv::abtt_gains(emb.dim(), a.d);
  const auto model = cnwv::fit_cn(emb, cnwv::CnConfig{a.alpha, subset, a.center}, {a.threads});
  const auto cn = cnwv::cn_gains(model.eigen.values, a.alpha);
  std::string out = "pc_index,abtt_gain,cn_gain\n";
  for (Eigen::Index i = 0; i < cn.size(); ++i) {
    out += std::to_string(i + 1) + "," + shortest(abtt(i)) + "," + shortest(cn(i)) + "\n";
  }
  std::fputs(out.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-process word vectors (conceptor negation, all-but-the-top, eigenvalue "
               "weighting) and evaluate them"};
  app.require_subcommand(1);
  const auto format_check = CLI::IsMember({"w2v-bin", "glove-txt"});

  PostprocessArgs pp;
  auto* post = app.add_subcommand("postprocess", "Transform an embedding file");
  post->add_option("--method", pp.method, "cn | abtt | ew")
      ->required()
      ->check(CLI::IsMember({"cn", "abtt", "ew"}));
  post->add_option("--input", pp.input, "Input embedding file")->required();
  post->add_option("--format", pp.format, "w2v-bin | glove-txt")->required()->check(format_check);
  post->add_option("--output", pp.output, "Output embedding file")->required();
  post->add_option("--output-format", pp.output_format, "Defaults to --format")
      ->check(format_check);
  post->add_option("--alpha", pp.alpha, "Conceptor aperture (cn)")->capture_default_str();
  post->add_option("--d", pp.d, "Principal components to remove (abtt)")->capture_default_str();
  post->add_option("--p", pp.p, "Weighting exponent (ew)")->capture_default_str();
  post->add_option("--subset-vocab", pp.subset_vocab,
                   "Token list used to estimate the correlation matrix (cn)");
  post->add_flag("--center", pp.center, "Subtract the estimation-set mean first (cn)");
  post->add_option("--threads", pp.threads, "Worker threads")->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score an embedding on a benchmark");
  eval->add_option("task", ev.task, "similarity | sts | categorize")
      ->required()
      ->check(CLI::IsMember({"similarity", "sts", "categorize"}));
  eval->add_option("--vectors", ev.vectors, "Embedding file")->required();
  eval->add_option("--format", ev.format, "w2v-bin | glove-txt")->required()->check(format_check);
  eval->add_option("--dataset", ev.dataset, "Benchmark TSV")->required();
  eval->add_flag("--lowercase-fallback", ev.lowercase_fallback,
                 "Retry missing words in lowercase");

  GatingArgs ga;
  auto* gating = app.add_subcommand("gating", "Print per-component ABTT and CN gains as CSV");
  gating->add_option("--vectors", ga.vectors, "Embedding file")->required();
  gating->add_option("--format", ga.format, "w2v-bin | glove-txt")
      ->capture_default_str()
      ->check(format_check);
  gating->add_option("--alpha", ga.alpha, "Conceptor aperture")->capture_default_str();
  gating->add_option("--d", ga.d, "Components removed by ABTT")->capture_default_str();
  gating->add_option("--subset-vocab", ga.subset_vocab, "Token list for estimation");
  gating->add_flag("--center", ga.center, "Center before estimation");
  gating->add_option("--threads", ga.threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*post) return run_postprocess(pp);
    if (*eval) return run_eval(ev);
    return run_gating(ga);
  } catch (const cnwv::Error& e) {
    std::cerr << "cnwv: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "cnwv: " << e.what() << "\n";
    return 1;
  }
}
