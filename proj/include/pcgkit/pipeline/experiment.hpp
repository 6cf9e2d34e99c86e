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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcgkit/metrics/metrics.hpp"
#include "pcgkit/nn/model.hpp"
#include "pcgkit/pipeline/config.hpp"
#include "pcgkit/pipeline/manifest.hpp"
#include "pcgkit/preprocess/segment_store.hpp"

namespace pcg::pipeline {

// Builds <store_dir> from the dataset unless a store with the configured
// window already exists there. Returns true when it had to build.
bool ensure_store(const ExperimentConfig& c, std::ostream* log = nullptr);

// Manifest for the experiment: relabels (E3), Unknown dropped (E2),
// majority downsampling, then the patient split. Throws ConfigError when
// the store does not fit the experiment.
DatasetManifest prepare_manifest(const ExperimentConfig& c, const preprocess::SegmentStore& store);

// Feature maps of every entry, one float block per entry in entry order.
struct FeatureSet {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<float>> items;
};

// <store>/features/<kind>/<segment>.feat
std::filesystem::path feature_cache_path(const std::filesystem::path& store_dir,
                                         features::FeatureKind kind, const std::string& segment_id);

struct ExtractStats {
  std::size_t computed = 0;
  std::size_t cached = 0;
};

// Reads cached maps whose kind and parameter hash match and extracts the
// rest (in parallel), writing them to the cache. Values always pass
// through float32 so cached and fresh runs see identical inputs.
FeatureSet load_features(const preprocess::SegmentStore& store,
                         const std::vector<ManifestEntry>& entries, features::FeatureKind kind,
                         features::FeatureParams params, unsigned workers,
                         ExtractStats* stats = nullptr);

// Per-row affine map fitted on the training items.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_std;

  static Standardizer fit(const FeatureSet& fs, const std::vector<std::size_t>& items);
  void apply(FeatureSet& fs) const;
  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);
};

struct Prediction {
  std::string segment_id;  // the group key for voted predictions
  std::string group;       // "<patient>/<location>"
  ClassLabel truth = ClassLabel::Absent;
  ClassLabel label = ClassLabel::Absent;
  std::vector<double> probs;  // in class order
};
nlohmann::json to_json(const Prediction& p, const std::vector<ClassLabel>& classes);

std::vector<Prediction> predict(const nn::Model& model, const FeatureSet& fs,
                                const std::vector<ManifestEntry>& entries,
                                const std::vector<std::size_t>& items,
                                const std::vector<ClassLabel>& classes, std::size_t batch_size);

// One prediction per patient+location group: the label is the vote over
// the segment predictions, the truth the vote over segment truths, and the
// probabilities their mean. Groups come out sorted by key.
std::vector<Prediction> vote_groups(const std::vector<Prediction>& preds);

// AUROC is skipped when with_auroc is false (per-epoch validation).
metrics::MetricReport score(Task task, const std::vector<ClassLabel>& classes,
                            const std::vector<Prediction>& preds, bool with_auroc = true);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double val_f1 = 0.0;
};

struct RunResult {
  std::filesystem::path run_dir;
  metrics::MetricReport test;
  std::optional<metrics::MetricReport> test_voted;
  std::vector<EpochStats> history;
  int best_epoch = 0;
  nlohmann::json report;  // contents of report.json
};

// Trains on the train split, keeps the epoch with the best validation
// macro-F1, and scores the test split once. Writes report.json,
// predictions.jsonl (+ predictions_voted.jsonl), confusion.csv,
// manifest.jsonl and model.ckpt into the run directory. report.json holds
// no timings or paths, so equal configs and seeds give equal bytes.
RunResult run_experiment(const ExperimentConfig& c, std::ostream* log = nullptr);

// Re-scores the test split with a saved checkpoint; writes
// eval_report.json and eval_predictions.jsonl next to `out_dir`.
RunResult evaluate_checkpoint(const ExperimentConfig& c, const std::filesystem::path& checkpoint,
                              const std::filesystem::path& out_dir, std::ostream* log = nullptr);

struct AblationRow {
  int window_seconds = 0;
  metrics::MetricReport test;
};

// One full run per window size under <run_dir>/w<N>; writes ablation.md
// and ablation.json into the run directory.
std::vector<AblationRow> ablate_window(const ExperimentConfig& c, const std::vector<int>& sizes,
                                       std::ostream* log = nullptr);
// Markdown table with accuracy/precision/recall/F1 in percent; the row
// with the best F1 is marked with '*'.
std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace pcg::pipeline
