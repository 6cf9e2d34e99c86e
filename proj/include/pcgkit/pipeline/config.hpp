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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcgkit/common/labels.hpp"
#include "pcgkit/features/feature_map.hpp"
#include "pcgkit/nn/model.hpp"
#include "pcgkit/pipeline/sampling.hpp"

namespace pcg::pipeline {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// E1: 2022, three classes as labeled. E2: 2022 without Unknown.
// E3: 2022 after relabeling. E4: 2016 normal/abnormal.
enum class Experiment { E1, E2, E3, E4 };
std::string_view to_string(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view s);

struct ExperimentConfig {
  Experiment experiment = Experiment::E1;
  std::filesystem::path dataset_root;
  std::filesystem::path work_dir = "work";
  std::filesystem::path output_dir;  // empty: <work_dir>/runs/<experiment>
  std::optional<std::filesystem::path> relabel_file;
  int window_seconds = 4;

  features::FeatureKind feature = features::FeatureKind::WST;
  features::FeatureParams feature_params;
  bool standardize = true;  // per-row mean/std from the training split

  nn::Preset model = nn::Preset::CNN1D;
  nn::PresetOptions preset;
  std::size_t batch_size = 126;
  std::optional<double> learning_rate;  // unset: per-model default
  int epochs = 100;
  int patience = 0;  // 0: run every epoch
  std::uint64_t seed = 1;

  bool weighted_sampling = true;
  std::map<ClassLabel, std::size_t> downsample;
  bool voting = false;
  SplitRatios split;
  unsigned workers = 0;  // feature extraction threads, 0: all cores

  Task task() const;
  std::vector<ClassLabel> classes() const;
  // 3e-5 for CNN1D and CRNN on 2022, 1e-3 for LSTM-RNN, 1e-4 on 2016.
  double lr() const;
  std::filesystem::path store_dir() const;  // <work_dir>/segments_w<N>
  std::filesystem::path run_dir() const;
  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

// Parses "key = value" lines; '#' starts a comment. Unknown keys and bad
// values are errors naming the line. Relative paths resolve against
// `base_dir`.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text: every key, fixed order, paths as given. Parsing it
// returns an equal configuration. Without paths the text describes the
// run independently of where it lives on disk.
std::string to_text(const ExperimentConfig& c, bool include_paths = true);

}  // namespace pcg::pipeline
