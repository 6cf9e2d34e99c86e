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

#include "pcgkit/pipeline/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "pcgkit/common/io.hpp"

namespace pcg::pipeline {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("bad number '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError("bad boolean '" + v + "'");
}

std::string fmt_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::filesystem::path resolve(const std::string& v, const std::filesystem::path& base) {
  if (v.empty()) return {};
  std::filesystem::path p(v);
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::E1: return "e1";
    case Experiment::E2: return "e2";
    case Experiment::E3: return "e3";
    case Experiment::E4: return "e4";
  }
  return "e1";
}

std::optional<Experiment> parse_experiment(std::string_view s) {
  for (Experiment e : {Experiment::E1, Experiment::E2, Experiment::E3, Experiment::E4})
    if (to_string(e) == s || (s.size() == 2 && s[0] == 'E' && s[1] == to_string(e)[1])) return e;
  return std::nullopt;
}

Task ExperimentConfig::task() const {
  return experiment == Experiment::E4 ? Task::Abnormal2016 : Task::Murmur2022;
}

std::vector<ClassLabel> ExperimentConfig::classes() const {
  if (experiment == Experiment::E2) return {ClassLabel::Present, ClassLabel::Absent};
  return task_classes(task());
}

double ExperimentConfig::lr() const {
  if (learning_rate) return *learning_rate;
  if (task() == Task::Abnormal2016) return 1e-4;
  return model == nn::Preset::LSTM_RNN ? 1e-3 : 3e-5;
}

std::filesystem::path ExperimentConfig::store_dir() const {
  return work_dir / ("segments_w" + std::to_string(window_seconds));
}

std::filesystem::path ExperimentConfig::run_dir() const {
  return output_dir.empty() ? work_dir / "runs" / std::string(to_string(experiment)) : output_dir;
}

void ExperimentConfig::validate() const {
  if (window_seconds < 1) throw ConfigError("window_seconds must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (!(lr() > 0.0)) throw ConfigError("learning_rate must be positive");
  if (preset.dropout < 0.0 || preset.dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  if (experiment == Experiment::E3 && !relabel_file)
    throw ConfigError("e3 trains on the relabeled dataset and needs relabel_file");
  if (experiment != Experiment::E3 && relabel_file)
    throw ConfigError("relabel_file is only meaningful for e3");
  for (auto [label, n] : downsample) {
    (void)n;
    if (!label_belongs_to(label, task()))
      throw ConfigError("downsample label " + std::string(pcg::to_string(label)) +
                        " does not belong to the " + std::string(pcg::to_string(task())) + " task");
  }
  if (experiment == Experiment::E2 && downsample.count(ClassLabel::Unknown))
    throw ConfigError("e2 excludes Unknown; it cannot be downsampled");
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  auto& fp = c.feature_params;
  using Setter = std::function<void(const std::string&)>;
  auto int_key = [](int& dst) { return Setter([&dst](const std::string& v) { dst = parse_number<int>(v); }); };
  auto size_key = [](std::size_t& dst) {
    return Setter([&dst](const std::string& v) { dst = parse_number<std::size_t>(v); });
  };
  auto bool_key = [](bool& dst) { return Setter([&dst](const std::string& v) { dst = parse_bool(v); }); };
  auto conv_field = [&c](std::size_t nn::ConvBlock::*field) {
    return Setter([&c, field](const std::string& v) {
      for (auto& b : c.preset.conv) b.*field = parse_number<std::size_t>(v);
    });
  };
  const std::map<std::string, Setter> keys{
      {"experiment",
       [&](const std::string& v) {
         auto e = parse_experiment(v);
         if (!e) throw ConfigError("experiment must be one of e1, e2, e3, e4");
         c.experiment = *e;
       }},
      {"dataset_root", [&](const std::string& v) { c.dataset_root = resolve(v, base_dir); }},
      {"work_dir", [&](const std::string& v) { c.work_dir = resolve(v, base_dir); }},
      {"output_dir",
       [&](const std::string& v) { c.output_dir = v.empty() ? std::filesystem::path{} : resolve(v, base_dir); }},
      {"relabel_file",
       [&](const std::string& v) {
         if (v.empty() || v == "none")
           c.relabel_file.reset();
         else
           c.relabel_file = resolve(v, base_dir);
       }},
      {"window_seconds", int_key(c.window_seconds)},
      {"feature",
       [&](const std::string& v) {
         auto k = features::parse_feature_kind(v);
         if (!k) throw ConfigError("feature must be wst, mfcc or stft");
         c.feature = *k;
       }},
      {"nfft", int_key(fp.nfft)},
      {"hop", int_key(fp.hop)},
      {"n_mfcc", int_key(fp.n_mfcc)},
      {"n_mels", int_key(fp.n_mels)},
      {"pre_emphasis", [&](const std::string& v) { fp.pre_emphasis_alpha = parse_number<double>(v); }},
      {"wst_J", int_key(fp.wst_J)},
      {"wst_Q", int_key(fp.wst_Q)},
      {"wst_order", int_key(fp.wst_order)},
      {"log_scattering", bool_key(fp.log_scattering)},
      {"standardize", bool_key(c.standardize)},
      {"model",
       [&](const std::string& v) {
         auto p = nn::parse_preset(v);
         if (!p) throw ConfigError("model must be cnn1d, crnn or lstm");
         c.model = *p;
       }},
      {"conv_channels",
       [&](const std::string& v) {
         auto items = split_list(v);
         if (items.empty()) throw ConfigError("conv_channels needs at least one width");
         nn::ConvBlock proto = c.preset.conv.empty() ? nn::ConvBlock{8} : c.preset.conv.front();
         c.preset.conv.clear();
         for (const auto& s : items) {
           proto.channels = parse_number<std::size_t>(s);
           c.preset.conv.push_back(proto);
         }
       }},
      {"conv_kernel", conv_field(&nn::ConvBlock::kernel)},
      {"conv_stride", conv_field(&nn::ConvBlock::stride)},
      {"conv_pad", conv_field(&nn::ConvBlock::pad)},
      {"pool", conv_field(&nn::ConvBlock::pool)},
      {"dense",
       [&](const std::string& v) {
         c.preset.dense.clear();
         for (const auto& s : split_list(v)) c.preset.dense.push_back(parse_number<std::size_t>(s));
       }},
      {"dropout", [&](const std::string& v) { c.preset.dropout = parse_number<double>(v); }},
      {"lstm_hidden", size_key(c.preset.lstm_hidden)},
      {"crnn_conv_blocks", size_key(c.preset.crnn_conv_blocks)},
      {"batch_size", size_key(c.batch_size)},
      {"learning_rate",
       [&](const std::string& v) {
         if (v == "auto")
           c.learning_rate.reset();
         else
           c.learning_rate = parse_number<double>(v);
       }},
      {"epochs", int_key(c.epochs)},
      {"patience", int_key(c.patience)},
      {"seed", [&](const std::string& v) { c.seed = parse_number<std::uint64_t>(v); }},
      {"weighted_sampling", bool_key(c.weighted_sampling)},
      {"downsample",
       [&](const std::string& v) {
         c.downsample.clear();
         for (const auto& item : split_list(v)) {
           const auto colon = item.find(':');
           if (colon == std::string::npos) throw ConfigError("downsample entries are Label:count");
           auto l = parse_label(trim(item.substr(0, colon)));
           if (!l) throw ConfigError("unknown label in downsample '" + item + "'");
           c.downsample[*l] = parse_number<std::size_t>(trim(item.substr(colon + 1)));
         }
       }},
      {"voting", bool_key(c.voting)},
      {"split",
       [&](const std::string& v) {
         auto items = split_list(v);
         if (items.size() != 3) throw ConfigError("split needs three ratios train,val,test");
         c.split = {parse_number<double>(items[0]), parse_number<double>(items[1]),
                    parse_number<double>(items[2])};
       }},
      {"workers", [&](const std::string& v) { c.workers = parse_number<unsigned>(v); }},
  };

  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    auto it = keys.find(key);
    if (it == keys.end())
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + " (" + key + "): " + e.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.parent_path());
}

std::string to_text(const ExperimentConfig& c, bool include_paths) {
  const auto& fp = c.feature_params;
  std::vector<std::string> conv;
  for (const auto& b : c.preset.conv) conv.push_back(std::to_string(b.channels));
  std::vector<std::string> dense;
  for (auto d : c.preset.dense) dense.push_back(std::to_string(d));
  std::vector<std::string> down;
  for (auto [l, n] : c.downsample) down.push_back(std::string(pcg::to_string(l)) + ":" + std::to_string(n));
  const nn::ConvBlock proto = c.preset.conv.empty() ? nn::ConvBlock{8} : c.preset.conv.front();
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };

  std::ostringstream o;
  o << "experiment = " << to_string(c.experiment) << "\n";
  if (include_paths)
    o << "dataset_root = " << c.dataset_root.string() << "\n"
      << "work_dir = " << c.work_dir.string() << "\n"
      << "output_dir = " << c.output_dir.string() << "\n"
      << "relabel_file = " << (c.relabel_file ? c.relabel_file->string() : "none") << "\n";
  o << "window_seconds = " << c.window_seconds << "\n"
    << "feature = " << features::to_string(c.feature) << "\n"
    << "nfft = " << fp.nfft << "\n"
    << "hop = " << fp.hop << "\n"
    << "n_mfcc = " << fp.n_mfcc << "\n"
    << "n_mels = " << fp.n_mels << "\n"
    << "pre_emphasis = " << fmt_double(fp.pre_emphasis_alpha) << "\n"
    << "wst_J = " << fp.wst_J << "\n"
    << "wst_Q = " << fp.wst_Q << "\n"
    << "wst_order = " << fp.wst_order << "\n"
    << "log_scattering = " << b(fp.log_scattering) << "\n"
    << "standardize = " << b(c.standardize) << "\n"
    << "model = " << nn::to_string(c.model) << "\n"
    << "conv_channels = " << join(conv) << "\n"
    << "conv_kernel = " << proto.kernel << "\n"
    << "conv_stride = " << proto.stride << "\n"
    << "conv_pad = " << proto.pad << "\n"
    << "pool = " << proto.pool << "\n"
    << "dense = " << join(dense) << "\n"
    << "dropout = " << fmt_double(c.preset.dropout) << "\n"
    << "lstm_hidden = " << c.preset.lstm_hidden << "\n"
    << "crnn_conv_blocks = " << c.preset.crnn_conv_blocks << "\n"
    << "batch_size = " << c.batch_size << "\n"
    << "learning_rate = " << (c.learning_rate ? fmt_double(*c.learning_rate) : "auto") << "\n"
    << "epochs = " << c.epochs << "\n"
    << "patience = " << c.patience << "\n"
    << "seed = " << c.seed << "\n"
    << "weighted_sampling = " << b(c.weighted_sampling) << "\n"
    << "downsample = " << join(down) << "\n"
    << "voting = " << b(c.voting) << "\n"
    << "split = " << fmt_double(c.split.train) << "," << fmt_double(c.split.val) << ","
    << fmt_double(c.split.test) << "\n"
    << "workers = " << c.workers << "\n";
  return o.str();
}

}  // namespace pcg::pipeline
