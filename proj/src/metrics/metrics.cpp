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

#include "pcgkit/metrics/metrics.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

namespace pcg::metrics {

ConfusionMatrix::ConfusionMatrix(std::vector<ClassLabel> cls)
    : classes(std::move(cls)), counts(classes.size() * classes.size(), 0.0) {}

std::size_t ConfusionMatrix::index(ClassLabel c) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == c) return i;
  throw MetricsError("label " + std::string(to_string(c)) + " is not in the class set");
}

double ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0.0);
}

double ConfusionMatrix::row_total(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < size(); ++j) s += at(i, j);
  return s;
}

double ConfusionMatrix::col_total(std::size_t j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += at(i, j);
  return s;
}

ConfusionMatrix confusion(std::span<const ClassLabel> preds, std::span<const ClassLabel> truths,
                          const std::vector<ClassLabel>& classes) {
  if (preds.size() != truths.size())
    throw MetricsError("confusion: " + std::to_string(preds.size()) + " predictions for " +
                       std::to_string(truths.size()) + " truths");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < preds.size(); ++i)
    cm.at(cm.index(truths[i]), cm.index(preds[i])) += 1.0;
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const double n = cm.total();
  if (n <= 0.0) throw MetricsError("accuracy: empty confusion matrix");
  double diag = 0.0;
  for (std::size_t i = 0; i < cm.size(); ++i) diag += cm.at(i, i);
  return diag / n;
}

double weighted_accuracy(const ConfusionMatrix& cm, const std::vector<double>& weights,
                         WeightGrouping grouping) {
  if (weights.size() != cm.size())
    throw MetricsError("weighted_accuracy: need one weight per class");
  if (cm.total() <= 0.0) throw MetricsError("weighted_accuracy: empty confusion matrix");
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < cm.size(); ++c) {
    num += weights[c] * cm.at(c, c);
    den += weights[c] *
           (grouping == WeightGrouping::ExpertRow ? cm.row_total(c) : cm.col_total(c));
  }
  if (den <= 0.0) throw MetricsError("weighted_accuracy: zero weighted denominator");
  return num / den;
}

double weighted_accuracy(const ConfusionMatrix& cm, WeightGrouping grouping) {
  std::vector<double> w;
  for (ClassLabel c : cm.classes) {
    switch (c) {
      case ClassLabel::Present: w.push_back(5.0); break;
      case ClassLabel::Unknown: w.push_back(3.0); break;
      case ClassLabel::Absent: w.push_back(1.0); break;
      default:
        throw MetricsError("weighted_accuracy: murmur weights undefined for " +
                           std::string(to_string(c)));
    }
  }
  return weighted_accuracy(cm, w, grouping);
}

PrfReport precision_recall_f1(const ConfusionMatrix& cm) {
  if (cm.total() <= 0.0) throw MetricsError("precision_recall_f1: empty confusion matrix");
  PrfReport r;
  for (std::size_t c = 0; c < cm.size(); ++c) {
    ClassScores s{cm.classes[c]};
    const double tp = cm.at(c, c), pred = cm.col_total(c), actual = cm.row_total(c);
    s.precision = pred > 0.0 ? tp / pred : 0.0;
    s.recall = actual > 0.0 ? tp / actual : 0.0;
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    s.support = actual;
    r.macro_precision += s.precision;
    r.macro_recall += s.recall;
    r.macro_f1 += s.f1;
    r.per_class.push_back(s);
  }
  const double k = double(cm.size());
  r.macro_precision /= k;
  r.macro_recall /= k;
  r.macro_f1 /= k;
  return r;
}

std::optional<double> auroc_binary(std::span<const double> scores,
                                   std::span<const bool> positive) {
  if (scores.size() != positive.size())
    throw MetricsError("auroc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of average ranks (1-based) of the positives.
  double rank_sum = 0.0;
  std::size_t npos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = 0.5 * double(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (positive[order[k]]) {
        rank_sum += avg;
        ++npos;
      }
    i = j;
  }
  const std::size_t nneg = n - npos;
  if (npos == 0 || nneg == 0) return std::nullopt;
  const double u = rank_sum - double(npos) * double(npos + 1) / 2.0;
  return u / (double(npos) * double(nneg));
}

AurocReport auroc(const std::vector<std::vector<double>>& probs,
                  std::span<const ClassLabel> truths, const std::vector<ClassLabel>& classes,
                  bool warn) {
  if (probs.size() != truths.size())
    throw MetricsError("auroc: " + std::to_string(probs.size()) + " score rows for " +
                       std::to_string(truths.size()) + " truths");
  AurocReport r;
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<double> s(probs.size());
    std::unique_ptr<bool[]> pos(new bool[probs.size()]);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i].size() != classes.size())
        throw MetricsError("auroc: score row " + std::to_string(i) + " has wrong width");
      s[i] = probs[i][c];
      pos[i] = truths[i] == classes[c];
    }
    auto a = auroc_binary(s, std::span<const bool>(pos.get(), probs.size()));
    r.per_class.push_back(a);
    if (a) {
      sum += *a;
      ++scored;
    } else {
      r.skipped.push_back(classes[c]);
      if (warn)
        std::cerr << "warning: AUROC for class " << to_string(classes[c])
                  << " skipped (no positive or no negative samples)\n";
    }
  }
  if (scored) r.macro = sum / double(scored);
  return r;
}

ClassLabel vote(std::span<const ClassLabel> labels) {
  if (labels.empty()) throw MetricsError("vote: empty group");
  std::map<ClassLabel, std::size_t> counts;
  for (ClassLabel l : labels) ++counts[l];
  ClassLabel best = labels.front();
  std::size_t best_n = 0;
  for (auto [l, n] : counts)
    if (n > best_n || (n == best_n && severity(l) > severity(best))) {
      best = l;
      best_n = n;
    }
  return best;
}

MetricReport evaluate(Task task, const std::vector<ClassLabel>& classes,
                      std::span<const ClassLabel> truths, std::span<const ClassLabel> preds,
                      const std::vector<std::vector<double>>& probs, WeightGrouping grouping) {
  MetricReport r{task, truths.size(), 0.0, std::nullopt, {}, {}, confusion(preds, truths, classes)};
  r.accuracy = accuracy(r.confusion);
  if (classes == task_classes(Task::Murmur2022))
    r.weighted_accuracy = weighted_accuracy(r.confusion, grouping);
  r.prf = precision_recall_f1(r.confusion);
  if (!probs.empty()) r.auroc = auroc(probs, truths, classes);
  return r;
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
  nlohmann::json labels = nlohmann::json::array();
  for (ClassLabel c : cm.classes) labels.push_back(std::string(to_string(c)));
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < cm.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < cm.size(); ++j) row.push_back(cm.at(i, j));
    rows.push_back(row);
  }
  return {{"classes", labels}, {"rows", "expert"}, {"columns", "classifier"}, {"counts", rows}};
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t i = 0; i < r.prf.per_class.size(); ++i) {
    const auto& s = r.prf.per_class[i];
    nlohmann::json j{{"label", std::string(to_string(s.label))},
                     {"precision", s.precision},
                     {"recall", s.recall},
                     {"f1", s.f1},
                     {"support", s.support}};
    if (i < r.auroc.per_class.size() && r.auroc.per_class[i])
      j["auroc"] = *r.auroc.per_class[i];
    else
      j["auroc"] = nullptr;
    per_class.push_back(j);
  }
  nlohmann::json j{{"task", std::string(to_string(r.task))},
                   {"samples", r.samples},
                   {"accuracy", r.accuracy},
                   {"precision", r.prf.macro_precision},
                   {"recall", r.prf.macro_recall},
                   {"f1", r.prf.macro_f1},
                   {"per_class", per_class},
                   {"confusion", to_json(r.confusion)}};
  j["weighted_accuracy"] = r.weighted_accuracy ? nlohmann::json(*r.weighted_accuracy) : nullptr;
  j["auroc"] = r.auroc.macro ? nlohmann::json(*r.auroc.macro) : nullptr;
  return j;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out.precision(17);
  out << "expert\\classifier";
  for (ClassLabel c : cm.classes) out << ',' << to_string(c);
  out << '\n';
  for (std::size_t i = 0; i < cm.size(); ++i) {
    out << to_string(cm.classes[i]);
    for (std::size_t j = 0; j < cm.size(); ++j) out << ',' << cm.at(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace pcg::metrics
