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

#include "pcgkit/pipeline/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "pcgkit/common/io.hpp"
#include "pcgkit/common/parallel.hpp"
#include "pcgkit/nn/adam.hpp"
#include "pcgkit/nn/checkpoint.hpp"

namespace pcg::pipeline {
namespace fs = std::filesystem;
namespace {

std::vector<std::size_t> split_items(const DatasetManifest& m, Split s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    if (m.entries[i].split == s) out.push_back(i);
  return out;
}

int class_index(const std::vector<ClassLabel>& classes, ClassLabel l) {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == l) return int(i);
  throw ConfigError("label " + std::string(pcg::to_string(l)) + " is outside the experiment classes");
}

nn::Tensor make_batch(const FeatureSet& fs, const std::vector<std::size_t>& items, std::size_t begin,
                      std::size_t end) {
  const std::size_t per = fs.rows * fs.cols;
  nn::Tensor t(nn::Shape{end - begin, fs.rows, fs.cols});
  for (std::size_t b = begin; b < end; ++b) {
    const auto& src = fs.items[items[b]];
    std::copy(src.begin(), src.end(), t.data.begin() + std::ptrdiff_t((b - begin) * per));
  }
  return t;
}

using Snapshot = std::vector<std::vector<double>>;

Snapshot snapshot(nn::Model& model) {
  Snapshot s;
  for (auto* p : model.params()) s.push_back(p->value.data);
  for (auto* b : model.buffers()) s.push_back(b->data);
  return s;
}

void restore(nn::Model& model, const Snapshot& s) {
  std::size_t k = 0;
  for (auto* p : model.params()) p->value.data = s[k++];
  for (auto* b : model.buffers()) b->data = s[k++];
}

nlohmann::json labels_json(const std::vector<ClassLabel>& classes) {
  nlohmann::json j = nlohmann::json::array();
  for (auto c : classes) j.push_back(std::string(pcg::to_string(c)));
  return j;
}

nlohmann::json counts_json(const DatasetManifest& m, const std::vector<ClassLabel>& classes) {
  nlohmann::json j;
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    const auto n = class_counts(m, classes, s);
    nlohmann::json row;
    for (std::size_t c = 0; c < classes.size(); ++c) row[std::string(pcg::to_string(classes[c]))] = n[c];
    j[std::string(to_string(s))] = row;
  }
  return j;
}

void write_predictions(const fs::path& path, const std::vector<Prediction>& preds,
                       const std::vector<ClassLabel>& classes) {
  std::string out;
  for (const auto& p : preds) out += to_json(p, classes).dump() + "\n";
  write_file_atomic(path, out);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Everything shared by training and checkpoint evaluation.
struct Prepared {
  DatasetManifest manifest;
  FeatureSet features;
  std::vector<ClassLabel> classes;
  std::vector<std::size_t> train, val, test;
};

Prepared prepare(const ExperimentConfig& c, std::ostream* log) {
  c.validate();
  ensure_store(c, log);
  const preprocess::SegmentStore store(c.store_dir());
  Prepared p;
  p.manifest = prepare_manifest(c, store);
  p.classes = c.classes();
  p.train = split_items(p.manifest, Split::Train);
  p.val = split_items(p.manifest, Split::Val);
  p.test = split_items(p.manifest, Split::Test);
  if (p.train.empty() || p.val.empty() || p.test.empty())
    throw ConfigError("every split needs at least one segment");
  ExtractStats st;
  const auto t0 = std::chrono::steady_clock::now();
  p.features = load_features(store, p.manifest.entries, c.feature, c.feature_params, c.workers, &st);
  if (log)
    *log << "features: " << st.cached << " cached, " << st.computed << " computed ("
         << p.features.rows << "x" << p.features.cols << ", " << seconds_since(t0) << " s)\n";
  return p;
}

nlohmann::json base_report(const ExperimentConfig& c, const Prepared& p, nn::Model& model) {
  nlohmann::json r;
  r["experiment"] = std::string(to_string(c.experiment));
  r["dataset"] = std::string(p.manifest.dataset_tag());
  r["classes"] = labels_json(p.classes);
  r["config"] = to_text(c, false);
  r["segments"] = counts_json(p.manifest, p.classes);
  r["relabeled_segments"] = p.manifest.relabeled();
  r["input_shape"] = {p.features.rows, p.features.cols};
  r["model"] = {{"preset", std::string(nn::to_string(c.model))},
                {"parameters", model.num_parameters()}};
  r["learning_rate"] = c.lr();
  return r;
}

void score_into(nlohmann::json& report, RunResult& res, const ExperimentConfig& c,
                const Prepared& p, const std::vector<Prediction>& preds, const fs::path& dir,
                const std::string& prefix) {
  res.test = score(c.task(), p.classes, preds);
  report["test"] = metrics::to_json(res.test);
  write_predictions(dir / (prefix + "predictions.jsonl"), preds, p.classes);
  write_file_atomic(dir / (prefix + "confusion.csv"), metrics::confusion_csv(res.test.confusion));
  if (c.voting) {
    const auto voted = vote_groups(preds);
    res.test_voted = score(c.task(), p.classes, voted);
    report["test_voted"] = metrics::to_json(*res.test_voted);
    write_predictions(dir / (prefix + "predictions_voted.jsonl"), voted, p.classes);
  }
}

}  // namespace

bool ensure_store(const ExperimentConfig& c, std::ostream* log) {
  const fs::path dir = c.store_dir();
  if (fs::exists(dir / "store.json")) {
    const preprocess::SegmentStore store(dir);
    if (store.window_seconds() != c.window_seconds)
      throw ConfigError(dir.string() + " holds " + std::to_string(store.window_seconds()) +
                        " s segments, config asks for " + std::to_string(c.window_seconds));
    return false;
  }
  if (c.dataset_root.empty())
    throw ConfigError("no segment store at " + dir.string() + " and no dataset_root to build one");
  preprocess::PreprocessOptions opt;
  opt.window_seconds = c.window_seconds;
  opt.workers = c.workers;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = preprocess::build_segment_store(c.dataset_root, dir, opt);
  if (log)
    *log << "preprocess: " << s.recordings << " recordings -> " << s.segments << " segments ("
         << s.rejected << " flat, " << s.too_short << " too short) in " << seconds_since(t0)
         << " s\n";
  return true;
}

DatasetManifest prepare_manifest(const ExperimentConfig& c, const preprocess::SegmentStore& store) {
  if (store.task() != c.task())
    throw ConfigError(std::string(to_string(c.experiment)) + " needs " +
                      std::string(pcg::to_string(c.task())) + " data but the store holds " +
                      std::string(pcg::to_string(store.task())));
  DatasetManifest m = build_manifest(store, c.relabel_file);
  if (c.experiment == Experiment::E3 && m.relabeled() == 0)
    throw ConfigError("e3 needs a relabeled manifest but " + c.relabel_file->string() +
                      " changes no segment");
  if (c.experiment == Experiment::E2)
    std::erase_if(m.entries, [](const ManifestEntry& e) { return e.effective == ClassLabel::Unknown; });
  if (!c.downsample.empty()) downsample_majority(m, c.downsample, c.seed ^ 0xD0D0D0D0ull);
  split_patients(m, c.split, c.seed);
  check_invariants(m);
  return m;
}

fs::path feature_cache_path(const fs::path& store_dir, features::FeatureKind kind,
                            const std::string& segment_id) {
  return store_dir / "features" / std::string(features::to_string(kind)) / (segment_id + ".feat");
}

FeatureSet load_features(const preprocess::SegmentStore& store,
                         const std::vector<ManifestEntry>& entries, features::FeatureKind kind,
                         features::FeatureParams params, unsigned workers, ExtractStats* stats) {
  FeatureSet out;
  out.items.resize(entries.size());
  std::vector<std::pair<std::size_t, std::size_t>> dims(entries.size());
  std::vector<char> fresh(entries.size(), 0);
  std::map<std::string, int> rate;
  for (const auto& r : store.records()) rate[r.segment_id] = r.sample_rate_hz;

  parallel_for(entries.size(), workers, [&](std::size_t i) {
    const auto& id = entries[i].segment_id;
    features::FeatureParams p = params;
    p.sample_rate_hz = rate.at(id);
    const fs::path path = feature_cache_path(store.dir(), kind, id);
    features::Matrix m;
    bool hit = false;
    if (fs::exists(path)) {
      try {
        auto loaded = features::load_feature_map(path);
        if (loaded.kind == kind && loaded.params_hash == p.hash(kind)) {
          m = std::move(loaded.data);
          hit = true;
        }
      } catch (const features::FeatureFileError&) {
        // Corrupt cache entry: recompute below.
      }
    }
    if (!hit) {
      features::FeatureMap fm = features::extract(kind, store.load_samples(id), p);
      fs::create_directories(path.parent_path());
      features::save_feature_map(path, fm);
      m = std::move(fm.data);
      fresh[i] = 1;
    }
    dims[i] = {m.rows, m.cols};
    out.items[i].assign(m.data.begin(), m.data.end());
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (dims[i] != dims.front())
      throw ConfigError("feature maps differ in shape (" + entries[i].segment_id +
                        "); mixed sample rates or window sizes in one run");
    if (stats) ++(fresh[i] ? stats->computed : stats->cached);
  }
  if (!entries.empty()) std::tie(out.rows, out.cols) = dims.front();
  return out;
}

Standardizer Standardizer::fit(const FeatureSet& fs, const std::vector<std::size_t>& items) {
  Standardizer s;
  s.mean.assign(fs.rows, 0.0);
  s.inv_std.assign(fs.rows, 1.0);
  const double n = double(items.size() * fs.cols);
  for (std::size_t r = 0; r < fs.rows; ++r) {
    double sum = 0.0;
    for (auto i : items)
      for (std::size_t t = 0; t < fs.cols; ++t) sum += fs.items[i][r * fs.cols + t];
    const double mu = sum / n;
    double ss = 0.0;
    for (auto i : items)
      for (std::size_t t = 0; t < fs.cols; ++t) {
        const double d = fs.items[i][r * fs.cols + t] - mu;
        ss += d * d;
      }
    const double sd = std::sqrt(ss / n);
    s.mean[r] = mu;
    s.inv_std[r] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return s;
}

void Standardizer::apply(FeatureSet& fs) const {
  if (mean.size() != fs.rows) throw ConfigError("standardizer has the wrong number of rows");
  for (auto& item : fs.items)
    for (std::size_t r = 0; r < fs.rows; ++r)
      for (std::size_t t = 0; t < fs.cols; ++t) {
        float& v = item[r * fs.cols + t];
        v = float((double(v) - mean[r]) * inv_std[r]);
      }
}

nlohmann::json Standardizer::to_json() const { return {{"mean", mean}, {"inv_std", inv_std}}; }

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.inv_std = j.at("inv_std").get<std::vector<double>>();
  return s;
}

nlohmann::json to_json(const Prediction& p, const std::vector<ClassLabel>& classes) {
  nlohmann::json probs;
  for (std::size_t c = 0; c < classes.size(); ++c) probs[std::string(pcg::to_string(classes[c]))] = p.probs[c];
  return {{"segment_id", p.segment_id},
          {"group", p.group},
          {"label", std::string(pcg::to_string(p.label))},
          {"truth", std::string(pcg::to_string(p.truth))},
          {"probs", probs}};
}

std::vector<Prediction> predict(const nn::Model& model, const FeatureSet& fs,
                                const std::vector<ManifestEntry>& entries,
                                const std::vector<std::size_t>& items,
                                const std::vector<ClassLabel>& classes, std::size_t batch_size) {
  if (model.num_classes() != classes.size())
    throw ConfigError("model has " + std::to_string(model.num_classes()) + " outputs for " +
                      std::to_string(classes.size()) + " classes");
  std::vector<Prediction> out;
  out.reserve(items.size());
  for (std::size_t b = 0; b < items.size(); b += batch_size) {
    const std::size_t e = std::min(items.size(), b + batch_size);
    const nn::Tensor probs = model.infer(make_batch(fs, items, b, e));
    const std::size_t k = classes.size();
    for (std::size_t i = b; i < e; ++i) {
      const auto& entry = entries[items[i]];
      Prediction p;
      p.segment_id = entry.segment_id;
      p.group = entry.group();
      p.truth = entry.effective;
      p.probs.assign(probs.data.begin() + std::ptrdiff_t((i - b) * k),
                     probs.data.begin() + std::ptrdiff_t((i - b + 1) * k));
      p.label = classes[std::size_t(std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin())];
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<Prediction> vote_groups(const std::vector<Prediction>& preds) {
  std::map<std::string, std::vector<const Prediction*>> groups;
  for (const auto& p : preds) groups[p.group].push_back(&p);
  std::vector<Prediction> out;
  for (const auto& [key, members] : groups) {
    std::vector<ClassLabel> labels, truths;
    Prediction v;
    v.segment_id = v.group = key;
    v.probs.assign(members.front()->probs.size(), 0.0);
    for (const auto* m : members) {
      labels.push_back(m->label);
      truths.push_back(m->truth);
      for (std::size_t c = 0; c < v.probs.size(); ++c) v.probs[c] += m->probs[c];
    }
    for (double& q : v.probs) q /= double(members.size());
    v.label = metrics::vote(labels);
    v.truth = metrics::vote(truths);
    out.push_back(std::move(v));
  }
  return out;
}

metrics::MetricReport score(Task task, const std::vector<ClassLabel>& classes,
                            const std::vector<Prediction>& preds, bool with_auroc) {
  std::vector<ClassLabel> truths, labels;
  std::vector<std::vector<double>> probs;
  for (const auto& p : preds) {
    truths.push_back(p.truth);
    labels.push_back(p.label);
    if (with_auroc) probs.push_back(p.probs);
  }
  return metrics::evaluate(task, classes, truths, labels, probs);
}

RunResult run_experiment(const ExperimentConfig& c, std::ostream* log) {
  Prepared p = prepare(c, log);
  const auto& entries = p.manifest.entries;
  Standardizer stdz;
  if (c.standardize) {
    stdz = Standardizer::fit(p.features, p.train);
    stdz.apply(p.features);
  }

  const nn::Shape input{p.features.rows, p.features.cols};
  nn::Model model(nn::make_preset(c.model, input, p.classes.size(), c.preset), c.seed);
  nn::Adam adam(nn::AdamConfig{c.lr()});

  std::vector<int> targets(entries.size(), -1);
  for (auto i : p.train) targets[i] = class_index(p.classes, entries[i].effective);
  for (auto i : p.val) targets[i] = class_index(p.classes, entries[i].effective);
  for (auto i : p.test) targets[i] = class_index(p.classes, entries[i].effective);

  std::vector<double> inst_w;
  const auto cw = class_weights(p.manifest, p.classes, Split::Train);
  for (auto i : p.train) inst_w.push_back(cw[std::size_t(targets[i])]);
  WeightedSampler sampler(inst_w, c.seed ^ 0x5A5A5A5A5A5A5A5Aull);
  nn::Rng order_rng(c.seed ^ 0xA5A5A5A5A5A5A5A5ull);

  RunResult res;
  res.run_dir = c.run_dir();
  fs::create_directories(res.run_dir);
  double best_f1 = -1.0;
  Snapshot best;
  int stale = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = 1; epoch <= c.epochs; ++epoch) {
    std::vector<std::size_t> order;
    if (c.weighted_sampling) {
      for (auto k : sampler.epoch(p.train.size())) order.push_back(p.train[k]);
    } else {
      order = p.train;
      shuffle(order, order_rng);
    }
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < order.size(); b += c.batch_size) {
      const std::size_t e = std::min(order.size(), b + c.batch_size);
      // Batch statistics are undefined for a single sample.
      if (e - b < 2) continue;
      std::vector<int> labels;
      for (std::size_t k = b; k < e; ++k) {
        if (entries[order[k]].split != Split::Train)
          throw std::logic_error("leakage guard: " + entries[order[k]].segment_id +
                                 " is not a training segment");
        labels.push_back(targets[order[k]]);
      }
      model.forward(make_batch(p.features, order, b, e), true);
      loss_sum += model.backward_from_labels(labels) * double(e - b);
      seen += e - b;
      adam.step(model.params());
    }
    const auto val_preds = predict(model, p.features, entries, p.val, p.classes, c.batch_size);
    const auto val = score(c.task(), p.classes, val_preds, false);
    EpochStats st{epoch, seen ? loss_sum / double(seen) : 0.0, val.accuracy, val.prf.macro_f1};
    res.history.push_back(st);
    if (log)
      *log << "epoch " << epoch << "/" << c.epochs << "  loss " << st.train_loss << "  val acc "
           << st.val_accuracy << "  val F1 " << st.val_f1 << "  (" << seconds_since(t0) << " s)\n";
    if (st.val_f1 > best_f1) {
      best_f1 = st.val_f1;
      best = snapshot(model);
      res.best_epoch = epoch;
      stale = 0;
    } else if (c.patience > 0 && ++stale >= c.patience) {
      if (log) *log << "no validation gain for " << c.patience << " epochs, stopping\n";
      break;
    }
  }
  restore(model, best);

  nlohmann::json extra{{"config", to_text(c, false)},
                       {"classes", labels_json(p.classes)},
                       {"best_epoch", res.best_epoch}};
  if (c.standardize) extra["standardizer"] = stdz.to_json();
  nn::save_checkpoint(res.run_dir / "model.ckpt", model, nullptr, extra);
  save_manifest(res.run_dir / "manifest.jsonl", p.manifest);

  nlohmann::json report = base_report(c, p, model);
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : res.history)
    hist.push_back({{"epoch", h.epoch},
                    {"train_loss", h.train_loss},
                    {"val_accuracy", h.val_accuracy},
                    {"val_f1", h.val_f1}});
  report["history"] = hist;
  report["best_epoch"] = res.best_epoch;

  const auto preds = predict(model, p.features, entries, p.test, p.classes, c.batch_size);
  score_into(report, res, c, p, preds, res.run_dir, "");
  res.report = report;
  write_file_atomic(res.run_dir / "report.json", report.dump(2) + "\n");
  if (log) *log << "test accuracy " << res.test.accuracy << "  macro F1 " << res.test.prf.macro_f1
                << "  -> " << (res.run_dir / "report.json").string() << "\n";
  return res;
}

RunResult evaluate_checkpoint(const ExperimentConfig& c, const fs::path& checkpoint,
                              const fs::path& out_dir, std::ostream* log) {
  Prepared p = prepare(c, log);
  nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
  if (ck.extra.value("classes", nlohmann::json()) != labels_json(p.classes))
    throw ConfigError(checkpoint.string() + " was trained on a different class set");
  if (ck.extra.contains("standardizer"))
    Standardizer::from_json(ck.extra.at("standardizer")).apply(p.features);
  if (ck.model->spec().input != nn::Shape{p.features.rows, p.features.cols})
    throw ConfigError(checkpoint.string() + " expects input " +
                      nn::shape_string(ck.model->spec().input));
  RunResult res;
  res.run_dir = out_dir;
  res.best_epoch = ck.extra.value("best_epoch", 0);
  fs::create_directories(out_dir);
  nlohmann::json report = base_report(c, p, *ck.model);
  report["checkpoint_config"] = ck.extra.value("config", "");
  const auto preds = predict(*ck.model, p.features, p.manifest.entries, p.test, p.classes, c.batch_size);
  score_into(report, res, c, p, preds, out_dir, "eval_");
  res.report = report;
  write_file_atomic(out_dir / "eval_report.json", report.dump(2) + "\n");
  return res;
}

std::vector<AblationRow> ablate_window(const ExperimentConfig& c, const std::vector<int>& sizes,
                                       std::ostream* log) {
  if (sizes.empty()) throw ConfigError("ablation needs at least one window size");
  std::vector<AblationRow> rows;
  nlohmann::json j = nlohmann::json::array();
  for (int w : sizes) {
    ExperimentConfig cw = c;
    cw.window_seconds = w;
    cw.output_dir = c.run_dir() / ("w" + std::to_string(w));
    if (log) *log << "== window " << w << " s\n";
    auto r = run_experiment(cw, log);
    j.push_back({{"window_seconds", w}, {"test", metrics::to_json(r.test)}});
    rows.push_back({w, std::move(r.test)});
  }
  write_file_atomic(c.run_dir() / "ablation.json", j.dump(2) + "\n");
  write_file_atomic(c.run_dir() / "ablation.md", ablation_table(rows));
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].test.prf.macro_f1 > rows[best].test.prf.macro_f1) best = i;
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << "| Window size | Accuracy | Precision | Recall | F1-score |\n"
    << "|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& t = rows[i].test;
    o << "| " << rows[i].window_seconds << " s" << (i == best ? " *" : "") << " | "
      << 100 * t.accuracy << " | " << 100 * t.prf.macro_precision << " | "
      << 100 * t.prf.macro_recall << " | " << 100 * t.prf.macro_f1 << " |\n";
  }
  return o.str();
}

}  // namespace pcg::pipeline
