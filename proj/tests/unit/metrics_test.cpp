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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <random>

#include "pcgkit/metrics/metrics.hpp"

using namespace pcg;
using namespace pcg::metrics;

namespace {

const std::vector<ClassLabel> kMurmur{ClassLabel::Present, ClassLabel::Unknown,
                                      ClassLabel::Absent};

// Rebuilds a murmur matrix from class proportions (Present, Unknown, Absent)
// and per-row percentages listed as predicted (Absent, Unknown, Present).
ConfusionMatrix from_percentages(std::array<double, 3> prop,
                                 std::array<std::array<double, 3>, 3> rows_apu) {
  ConfusionMatrix cm(kMurmur);
  for (int e = 0; e < 3; ++e)
    for (int c = 0; c < 3; ++c) cm.at(e, c) = prop[e] * rows_apu[e][2 - c] / 100.0;
  return cm;
}

// Row order here is the expert class in (Present, Unknown, Absent).
ConfusionMatrix first_experiment() {
  return from_percentages({0.38, 0.115, 0.505}, {{{9.77, 3.60, 86.63},
                                                  {74.58, 18.64, 6.78},
                                                  {82.56, 10.27, 7.17}}});
}

ConfusionMatrix relabel_experiment() {
  return from_percentages({0.37, 0.39, 0.24}, {{{8.16, 11.32, 80.53},
                                                {19.75, 78.03, 2.23},
                                                {77.51, 20.67, 1.82}}});
}

double brute_auroc(const std::vector<double>& s, const std::vector<bool>& pos) {
  double good = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (pos[i] && !pos[j]) {
        pairs += 1;
        good += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return good / pairs;
}

std::optional<double> auroc_of(const std::vector<double>& s, const std::vector<bool>& pos) {
  std::unique_ptr<bool[]> b(new bool[pos.size()]);
  std::copy(pos.begin(), pos.end(), b.get());
  return auroc_binary(s, std::span<const bool>(b.get(), pos.size()));
}

}  // namespace

TEST_CASE("confusion matches a naive tally") {
  std::mt19937 gen(3);
  std::vector<ClassLabel> p, t;
  for (int i = 0; i < 300; ++i) {
    p.push_back(kMurmur[gen() % 3]);
    t.push_back(kMurmur[gen() % 3]);
  }
  const auto cm = confusion(p, t, kMurmur);
  for (std::size_t e = 0; e < 3; ++e)
    for (std::size_t c = 0; c < 3; ++c) {
      int n = 0;
      for (std::size_t i = 0; i < p.size(); ++i) n += t[i] == kMurmur[e] && p[i] == kMurmur[c];
      CHECK(cm.at(e, c) == n);
    }
  CHECK(cm.total() == 300);
  CHECK_THROWS_AS(confusion(std::vector{ClassLabel::Normal}, std::vector{ClassLabel::Present},
                            kMurmur),
                  MetricsError);
  CHECK_THROWS_AS(confusion(p, std::span(t).first(3), kMurmur), MetricsError);
}

TEST_CASE("weighted accuracy anchors") {
  std::vector<ClassLabel> truth;
  for (int i = 0; i < 38; ++i) truth.push_back(ClassLabel::Present);
  for (int i = 0; i < 12; ++i) truth.push_back(ClassLabel::Unknown);
  for (int i = 0; i < 50; ++i) truth.push_back(ClassLabel::Absent);
  const auto perfect = confusion(truth, truth, kMurmur);
  CHECK(weighted_accuracy(perfect) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(accuracy(perfect) == 1.0);

  // Everything called Absent: only the weight-1 diagonal survives.
  const std::vector<ClassLabel> absent(truth.size(), ClassLabel::Absent);
  const auto cm = confusion(absent, truth, kMurmur);
  const double expect = 50.0 / (5 * 38 + 3 * 12 + 50);
  CHECK(weighted_accuracy(cm) == doctest::Approx(expect).epsilon(1e-15));

  // Class proportions 0.38 / 0.115 / 0.505 give 0.505 / 2.75.
  ConfusionMatrix p(kMurmur);
  p.at(0, 2) = 0.38;
  p.at(1, 2) = 0.115;
  p.at(2, 2) = 0.505;
  CHECK(weighted_accuracy(p) == doctest::Approx(0.505 / 2.75).epsilon(1e-12));
  CHECK(weighted_accuracy(p) == doctest::Approx(0.1836).epsilon(1e-3));
}

TEST_CASE("unit weights reduce weighted accuracy to accuracy") {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    ConfusionMatrix cm(kMurmur);
    for (double& v : cm.counts) v = double(gen() % 50);
    cm.at(0, 0) += 1;
    CHECK(weighted_accuracy(cm, {1, 1, 1}) == doctest::Approx(accuracy(cm)).epsilon(1e-14));
    CHECK(weighted_accuracy(cm, {2, 2, 2}) == doctest::Approx(accuracy(cm)).epsilon(1e-14));
  }
}

TEST_CASE("weighted accuracy with murmur weights on random matrices") {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    ConfusionMatrix cm(kMurmur);
    for (double& v : cm.counts) v = double(1 + gen() % 40);
    const auto& m = cm.counts;
    const double num = 5 * m[0] + 3 * m[4] + 1 * m[8];
    const double den = 5 * (m[0] + m[1] + m[2]) + 3 * (m[3] + m[4] + m[5]) + (m[6] + m[7] + m[8]);
    const double colden =
        5 * (m[0] + m[3] + m[6]) + 3 * (m[1] + m[4] + m[7]) + (m[2] + m[5] + m[8]);
    CHECK(weighted_accuracy(cm) == doctest::Approx(num / den).epsilon(1e-14));
    CHECK(weighted_accuracy(cm, WeightGrouping::ClassifierColumn) ==
          doctest::Approx(num / colden).epsilon(1e-14));
    const double a = weighted_accuracy(cm);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
  ConfusionMatrix bad({ClassLabel::Normal, ClassLabel::Abnormal});
  bad.at(0, 0) = 1;
  CHECK_THROWS_AS(weighted_accuracy(bad), MetricsError);
  CHECK_THROWS_AS(weighted_accuracy(ConfusionMatrix(kMurmur)), MetricsError);
}

TEST_CASE("reconstructed murmur matrices land near reference figures") {
  const auto e1 = first_experiment();
  CHECK(e1.total() == doctest::Approx(1.0).epsilon(1e-3));
  const double acc = accuracy(e1);
  const double wa = weighted_accuracy(e1);
  CHECK(acc == doctest::Approx(0.767558).epsilon(1e-5));
  CHECK(std::abs(acc * 100 - 74.39) <= 3.0);
  CHECK(wa == doctest::Approx(0.77353).epsilon(1e-4));
  CHECK(std::abs(wa * 100 - 78.06) <= 1.5);
  // Column grouping drifts further from the reference value.
  const double wc = weighted_accuracy(e1, WeightGrouping::ClassifierColumn);
  CHECK(wc == doctest::Approx(0.7977).epsilon(1e-3));

  const auto e3 = relabel_experiment();
  const auto prf = precision_recall_f1(e3);
  CHECK(prf.macro_f1 == doctest::Approx(0.78240).epsilon(1e-4));
  CHECK(std::abs(prf.macro_f1 * 100 - 78.67) <= 1.5);
  CHECK(accuracy(e3) == doctest::Approx(0.7883).epsilon(1e-3));
}

TEST_CASE("metrics are invariant to sample order") {
  std::mt19937 gen(17);
  std::vector<ClassLabel> p, t;
  for (int i = 0; i < 200; ++i) {
    t.push_back(kMurmur[gen() % 3]);
    p.push_back(gen() % 4 == 0 ? kMurmur[gen() % 3] : t.back());
  }
  const auto base = precision_recall_f1(confusion(p, t, kMurmur));
  const double wa = weighted_accuracy(confusion(p, t, kMurmur));
  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), gen);
  std::vector<ClassLabel> p2, t2;
  for (auto i : idx) {
    p2.push_back(p[i]);
    t2.push_back(t[i]);
  }
  const auto cm2 = confusion(p2, t2, kMurmur);
  CHECK(precision_recall_f1(cm2).macro_f1 == base.macro_f1);
  CHECK(weighted_accuracy(cm2) == wa);
}

TEST_CASE("precision recall f1 edge cases") {
  ConfusionMatrix cm({ClassLabel::Abnormal, ClassLabel::Normal});
  // Nothing ever predicted Abnormal: precision 0/0 counts as 0.
  cm.at(0, 1) = 4;
  cm.at(1, 1) = 6;
  const auto r = precision_recall_f1(cm);
  CHECK(r.per_class[0].precision == 0.0);
  CHECK(r.per_class[0].recall == 0.0);
  CHECK(r.per_class[0].f1 == 0.0);
  CHECK(r.per_class[1].precision == doctest::Approx(0.6));
  CHECK(r.per_class[1].recall == 1.0);
  CHECK(r.per_class[1].f1 == doctest::Approx(0.75));
  CHECK(r.macro_f1 == doctest::Approx(0.375));
  CHECK(r.per_class[0].support == 4);

  ConfusionMatrix known({ClassLabel::Abnormal, ClassLabel::Normal});
  known.at(0, 0) = 8;  // tp
  known.at(0, 1) = 2;  // fn
  known.at(1, 0) = 4;  // fp
  known.at(1, 1) = 6;
  const auto k = precision_recall_f1(known);
  CHECK(k.per_class[0].precision == doctest::Approx(8.0 / 12));
  CHECK(k.per_class[0].recall == doctest::Approx(0.8));
  CHECK(k.per_class[0].f1 == doctest::Approx(2 * 8.0 / (2 * 8 + 4 + 2)));
  CHECK_THROWS_AS(precision_recall_f1(ConfusionMatrix(kMurmur)), MetricsError);
}

TEST_CASE("auroc equals the pair-count oracle") {
  std::mt19937_64 gen(2024);
  int checked = 0;
  while (checked < 50) {
    std::vector<double> s(20);
    std::vector<bool> pos(20);
    for (int i = 0; i < 20; ++i) {
      // Coarse grid so ties are common.
      s[i] = double(gen() % 8) / 8.0;
      pos[i] = gen() % 2;
    }
    const auto a = auroc_of(s, pos);
    const bool degenerate = std::count(pos.begin(), pos.end(), true) % 20 == 0;
    if (degenerate) {
      CHECK_FALSE(a.has_value());
      continue;
    }
    REQUIRE(a.has_value());
    CHECK(std::abs(*a - brute_auroc(s, pos)) <= 1e-12);
    ++checked;
  }
}

TEST_CASE("auroc properties") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<bool> pos{false, false, true, true};
  CHECK(*auroc_of(s, pos) == doctest::Approx(0.75));
  // All ties give 0.5.
  CHECK(*auroc_of({1, 1, 1, 1}, pos) == 0.5);
  // Invariant under strictly increasing maps.
  std::vector<double> t;
  for (double v : s) t.push_back(std::exp(3 * v) - 7);
  CHECK(*auroc_of(t, pos) == *auroc_of(s, pos));
  // Negating scores reflects the curve.
  std::vector<double> n;
  for (double v : s) n.push_back(-v);
  CHECK(*auroc_of(n, pos) == doctest::Approx(1.0 - *auroc_of(s, pos)));
  CHECK_FALSE(auroc_of({0.1, 0.2}, {true, true}).has_value());
}

TEST_CASE("multiclass auroc skips classes without positives") {
  std::vector<std::vector<double>> probs{{0.7, 0.2, 0.1}, {0.2, 0.1, 0.7}, {0.6, 0.3, 0.1},
                                         {0.1, 0.2, 0.7}};
  std::vector<ClassLabel> t{ClassLabel::Present, ClassLabel::Absent, ClassLabel::Present,
                            ClassLabel::Absent};
  const auto r = auroc(probs, t, kMurmur, false);
  REQUIRE(r.skipped.size() == 1);
  CHECK(r.skipped[0] == ClassLabel::Unknown);
  CHECK_FALSE(r.per_class[1].has_value());
  REQUIRE(r.macro.has_value());
  CHECK(*r.macro == 1.0);
  CHECK_THROWS_AS(auroc({{0.5, 0.5}}, std::span(t).first(1), kMurmur, false), MetricsError);
}

TEST_CASE("voting") {
  using L = ClassLabel;
  CHECK(vote(std::vector{L::Absent, L::Absent, L::Present}) == L::Absent);
  // Ties go to the most severe label.
  CHECK(vote(std::vector{L::Absent, L::Present}) == L::Present);
  const L worse = severity(L::Unknown) > severity(L::Absent) ? L::Unknown : L::Absent;
  CHECK(vote(std::vector{L::Unknown, L::Absent}) == worse);
  CHECK(vote(std::vector{L::Normal, L::Abnormal}) == L::Abnormal);
  std::vector v{L::Absent, L::Present, L::Unknown, L::Present, L::Absent, L::Absent};
  const L first = vote(v);
  std::mt19937 gen(1);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(v.begin(), v.end(), gen);
    CHECK(vote(v) == first);
  }
  CHECK_THROWS_AS(vote(std::vector<L>{}), MetricsError);
}

TEST_CASE("report serialization") {
  std::vector<ClassLabel> t{ClassLabel::Present, ClassLabel::Unknown, ClassLabel::Absent,
                            ClassLabel::Absent};
  std::vector<ClassLabel> p{ClassLabel::Present, ClassLabel::Absent, ClassLabel::Absent,
                            ClassLabel::Absent};
  std::vector<std::vector<double>> probs{
      {0.8, 0.1, 0.1}, {0.2, 0.3, 0.5}, {0.1, 0.1, 0.8}, {0.2, 0.1, 0.7}};
  const auto r = evaluate(Task::Murmur2022, t, p, probs);
  const auto j = to_json(r);
  CHECK(j["accuracy"].get<double>() == 0.75);
  CHECK(j["samples"] == 4);
  CHECK(j["weighted_accuracy"].get<double>() == doctest::Approx((5 + 0 + 2) / 10.0));
  CHECK(j["confusion"]["classes"][0] == "Present");
  CHECK(j["confusion"]["counts"][1][2] == 1.0);
  CHECK(j["per_class"].size() == 3);
  CHECK(j["auroc"].is_number());

  const auto two = evaluate(Task::Abnormal2016, std::vector{ClassLabel::Normal},
                            std::vector{ClassLabel::Normal}, {});
  CHECK(to_json(two)["weighted_accuracy"].is_null());
  CHECK(to_json(two)["auroc"].is_null());

  const std::string csv = confusion_csv(r.confusion);
  CHECK(csv.rfind("expert\\classifier,Present,Unknown,Absent\n", 0) == 0);
  CHECK(csv.find("Unknown,0,0,1\n") != std::string::npos);
}
