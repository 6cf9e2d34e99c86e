// Copyright 2026 The pcgkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pcg: command-line front end for the toolkit.

#include <CLI11.hpp>

#include <iostream>

#include "pcgkit/annotator/server.hpp"
#include "pcgkit/pipeline/config.hpp"
#include "pcgkit/pipeline/experiment.hpp"
#include "pcgkit/pipeline/synth.hpp"
#include "pcgkit/preprocess/segment_store.hpp"

namespace {

using namespace pcg;
using pipeline::ExperimentConfig;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string dataset_root;
  std::string experiment;
  std::string output_dir;
  std::string work_dir;
  std::optional<int> epochs;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("--dataset-root", o.dataset_root, "override dataset_root");
  cmd->add_option("--experiment", o.experiment, "override the experiment")
      ->check(CLI::IsMember({"e1", "e2", "e3", "e4"}));
  cmd->add_option("--output-dir", o.output_dir, "override output_dir");
  cmd->add_option("--work-dir", o.work_dir, "override work_dir");
  cmd->add_option("--epochs", o.epochs, "override epochs");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = pipeline::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (!o.dataset_root.empty()) c.dataset_root = o.dataset_root;
  if (!o.experiment.empty()) c.experiment = *pipeline::parse_experiment(o.experiment);
  if (!o.output_dir.empty()) c.output_dir = o.output_dir;
  if (!o.work_dir.empty()) c.work_dir = o.work_dir;
  if (o.epochs) c.epochs = *o.epochs;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PCG murmur and abnormality toolkit"};
  app.require_subcommand(1);

  pipeline::SynthOptions synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "write the synthetic 3-class dataset (2022 layout)");
  synth_cmd->add_option("-o,--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--patients", synth.patients, "patients (one recording each)");
  synth_cmd->add_option("--seconds", synth.seconds, "recording length");
  synth_cmd->add_option("--rate", synth.sample_rate_hz, "sample rate in Hz");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");

  std::string pre_root, pre_out;
  preprocess::PreprocessOptions pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "filter, segment and normalize a dataset");
  pre_cmd->add_option("--dataset-root", pre_root, "PhysioNet 2022/2016 directory")->required()->check(CLI::ExistingDirectory);
  pre_cmd->add_option("-o,--out", pre_out, "segment store directory")->required();
  pre_cmd->add_option("-w,--window", pre.window_seconds, "segment length in seconds")->check(CLI::PositiveNumber);
  pre_cmd->add_option("--workers", pre.workers, "threads (0: all cores)");

  Overrides extract_o, train_o, eval_o, ablate_o;
  auto* extract_cmd = app.add_subcommand("extract", "compute and cache feature maps for a config");
  add_overrides(extract_cmd, extract_o);
  std::string feature_override;
  extract_cmd->add_option("--feature", feature_override, "wst, mfcc or stft")
      ->check(CLI::IsMember({"wst", "mfcc", "stft"}));

  auto* train_cmd = app.add_subcommand("train", "train and test one experiment");
  add_overrides(train_cmd, train_o);

  std::string ckpt, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "score the test split with a checkpoint");
  add_overrides(eval_cmd, eval_o);
  eval_cmd->add_option("--checkpoint", ckpt, "model.ckpt from train")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("-o,--out", eval_out, "output directory (default: the checkpoint's)");

  std::vector<int> sizes{1, 3, 4, 5};
  auto* ablate_cmd = app.add_subcommand("ablate", "segment-size ablation");
  add_overrides(ablate_cmd, ablate_o);
  ablate_cmd->add_option("--sizes", sizes, "window sizes in seconds")->delimiter(',');

  annotator::ServerOptions serve;
  auto* serve_cmd = app.add_subcommand("annotate-serve", "HTTP API for segment review");
  serve_cmd->add_option("--store", serve.store_dir, "segment store directory")->required()->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--review-dir", serve.review_dir, "review state directory (default: <store>/review)");
  serve_cmd->add_option("--host", serve.host, "bind address");
  serve_cmd->add_option("-p,--port", serve.port, "port");
  serve_cmd->add_option("--ui-dir", serve.ui_dir, "static UI files to serve at /")->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Access-Control-Allow-Origin value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      const auto s = pipeline::generate_synthetic(synth_out, synth);
      std::cout << "wrote " << s.recordings << " recordings to " << synth_out << " (";
      bool first = true;
      for (auto [l, n] : s.patients) {
        std::cout << (first ? "" : ", ") << to_string(l) << " " << n;
        first = false;
      }
      std::cout << ")\n";
    } else if (*pre_cmd) {
      const auto s = preprocess::build_segment_store(pre_root, pre_out, pre);
      std::cout << s.recordings << " recordings -> " << s.segments << " segments, " << s.rejected
                << " flat, " << s.too_short << " too short, " << s.unusual_rate
                << " at unusual rates\n";
    } else if (*extract_cmd) {
      auto c = resolve(extract_o);
      if (!feature_override.empty()) c.feature = *features::parse_feature_kind(feature_override);
      pipeline::ensure_store(c, &std::cerr);
      const preprocess::SegmentStore store(c.store_dir());
      const auto m = pipeline::build_manifest(store);
      pipeline::ExtractStats st;
      const auto fs = pipeline::load_features(store, m.entries, c.feature, c.feature_params, c.workers, &st);
      std::cout << features::to_string(c.feature) << ": " << st.computed << " computed, " << st.cached
                << " cached, maps " << fs.rows << "x" << fs.cols << "\n";
    } else if (*train_cmd) {
      pipeline::run_experiment(resolve(train_o), &std::cerr);
    } else if (*eval_cmd) {
      const auto c = resolve(eval_o);
      const std::filesystem::path out =
          eval_out.empty() ? std::filesystem::path(ckpt).parent_path() : std::filesystem::path(eval_out);
      const auto r = pipeline::evaluate_checkpoint(c, ckpt, out, &std::cerr);
      std::cout << r.report["test"].dump(2) << "\n";
    } else if (*ablate_cmd) {
      const auto rows = pipeline::ablate_window(resolve(ablate_o), sizes, &std::cerr);
      std::cout << pipeline::ablation_table(rows);
    } else if (*serve_cmd) {
      return annotator::serve(serve, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
