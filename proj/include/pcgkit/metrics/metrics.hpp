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

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcgkit/common/labels.hpp"

namespace pcg::metrics {

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Rows are the expert (true) label, columns the classifier output, both in
// `classes` order. Counts are stored as reals so matrices rebuilt from
// row percentages can be scored with the same code.
struct ConfusionMatrix {
  std::vector<ClassLabel> classes;
  std::vector<double> counts;  // row-major, classes.size()^2

  explicit ConfusionMatrix(std::vector<ClassLabel> cls = {});
  std::size_t size() const { return classes.size(); }
  std::size_t index(ClassLabel c) const;  // throws MetricsError
  double& at(std::size_t expert, std::size_t classifier) {
    return counts[expert * classes.size() + classifier];
  }
  double at(std::size_t expert, std::size_t classifier) const {
    return counts[expert * classes.size() + classifier];
  }
  double total() const;
  double row_total(std::size_t i) const;
  double col_total(std::size_t j) const;
};

ConfusionMatrix confusion(std::span<const ClassLabel> preds, std::span<const ClassLabel> truths,
                          const std::vector<ClassLabel>& classes);

// trace / total; throws on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

enum class WeightGrouping { ExpertRow, ClassifierColumn };

// (sum_c w_c m_cc) / (sum_c w_c n_c). n_c is the expert-row total by
// default; ClassifierColumn uses column totals instead.
double weighted_accuracy(const ConfusionMatrix& cm, const std::vector<double>& weights,
                         WeightGrouping grouping = WeightGrouping::ExpertRow);
// Murmur weights Present 5, Unknown 3, Absent 1 looked up by label.
double weighted_accuracy(const ConfusionMatrix& cm,
                         WeightGrouping grouping = WeightGrouping::ExpertRow);

struct ClassScores {
  ClassLabel label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double support = 0.0;
};

struct PrfReport {
  std::vector<ClassScores> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// One-vs-rest per class; 0/0 is 0. Macro values are unweighted means.
PrfReport precision_recall_f1(const ConfusionMatrix& cm);

// Mann-Whitney estimate: fraction of (positive, negative) pairs ranked
// correctly, ties 0.5, computed from average ranks in O(n log n).
// nullopt when either side is empty.
std::optional<double> auroc_binary(std::span<const double> scores, std::span<const bool> positive);

struct AurocReport {
  std::optional<double> macro;  // mean over classes that could be scored
  std::vector<std::optional<double>> per_class;
  std::vector<ClassLabel> skipped;
};

// probs[i] holds the class-probability vector of sample i in `classes`
// order. Classes without positives or without negatives are skipped and a
// warning is written to stderr.
AurocReport auroc(const std::vector<std::vector<double>>& probs,
                  std::span<const ClassLabel> truths, const std::vector<ClassLabel>& classes,
                  bool warn = true);

// Majority label; ties go to the most severe label. Throws on empty input.
ClassLabel vote(std::span<const ClassLabel> labels);

struct MetricReport {
  Task task;
  std::size_t samples = 0;
  double accuracy = 0.0;
  std::optional<double> weighted_accuracy;  // 3-class murmur task only
  PrfReport prf;
  AurocReport auroc;
  ConfusionMatrix confusion;
};

// Scores over an explicit class list (e.g. the two-class murmur subset).
// probs may be empty, which leaves AUROC unset.
MetricReport evaluate(Task task, const std::vector<ClassLabel>& classes,
                      std::span<const ClassLabel> truths, std::span<const ClassLabel> preds,
                      const std::vector<std::vector<double>>& probs,
                      WeightGrouping grouping = WeightGrouping::ExpertRow);
inline MetricReport evaluate(Task task, std::span<const ClassLabel> truths,
                             std::span<const ClassLabel> preds,
                             const std::vector<std::vector<double>>& probs,
                             WeightGrouping grouping = WeightGrouping::ExpertRow) {
  return evaluate(task, task_classes(task), truths, preds, probs, grouping);
}

nlohmann::json to_json(const MetricReport& r);
nlohmann::json to_json(const ConfusionMatrix& cm);
// Header row "expert\\classifier,<classes...>", then one row per expert label.
std::string confusion_csv(const ConfusionMatrix& cm);

}  // namespace pcg::metrics
