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

#include "pcgkit/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "pcgkit/common/io.hpp"

namespace pcg::nn {
namespace {

static_assert(std::endian::native == std::endian::little);
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_doubles(std::string& out, const std::vector<double>& v) {
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

class Reader {
 public:
  Reader(const std::string& s, std::string name) : s_(s), name_(std::move(name)) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void doubles(std::vector<double>& v) {
    need(v.size() * sizeof(double));
    std::memcpy(v.data(), s_.data() + pos_, v.size() * sizeof(double));
    pos_ += v.size() * sizeof(double);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw CheckpointError(name_ + ": truncated checkpoint");
  }
  const std::string& s_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model, const Adam* opt,
                     const nlohmann::json& extra) {
  nlohmann::json header{{"spec", to_json(model.spec())},
                        {"seed", model.seed()},
                        {"extra", extra},
                        {"has_optimizer", opt != nullptr}};
  nlohmann::json rngs = nlohmann::json::array();
  for (auto* d : model.dropouts()) rngs.push_back(d->rng().state());
  header["dropout_rng"] = rngs;
  if (opt) {
    const auto& c = opt->config();
    header["adam"] = {{"lr", c.lr}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}};
  }
  const std::string h = header.dump();
  std::string out = "PCGM";
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, h.size());
  out += h;
  for (Param* p : model.params()) put_doubles(out, p->value.data);
  for (Tensor* t : model.buffers()) put_doubles(out, t->data);
  if (opt) {
    const auto st = opt->state();
    put<std::uint64_t>(out, st.t);
    put<std::uint64_t>(out, st.m.size());
    for (std::size_t i = 0; i < st.m.size(); ++i) {
      put_doubles(out, st.m[i]);
      put_doubles(out, st.v[i]);
    }
  }
  write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string s = read_text_file(path);
  const std::string name = path.string();
  Reader r(s, name);
  if (r.bytes(4) != "PCGM") throw CheckpointError(name + ": bad magic");
  if (r.get<std::uint32_t>() != kVersion) throw CheckpointError(name + ": unsupported version");
  const auto hlen = r.get<std::uint64_t>();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.bytes(hlen));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(name + ": corrupt header: " + e.what());
  }
  Checkpoint ck;
  ck.model = std::make_unique<Model>(model_spec_from_json(header.at("spec")),
                                     header.at("seed").get<std::uint64_t>());
  ck.extra = header.value("extra", nlohmann::json::object());
  for (Param* p : ck.model->params()) r.doubles(p->value.data);
  for (Tensor* t : ck.model->buffers()) r.doubles(t->data);
  auto drops = ck.model->dropouts();
  const auto& rngs = header.at("dropout_rng");
  if (rngs.size() != drops.size()) throw CheckpointError(name + ": dropout state mismatch");
  for (std::size_t i = 0; i < drops.size(); ++i)
    drops[i]->rng().set_state(rngs[i].get<std::string>());
  if (header.value("has_optimizer", false)) {
    const auto& a = header.at("adam");
    Adam opt(AdamConfig{a.at("lr"), a.at("beta1"), a.at("beta2"), a.at("eps")});
    Adam::State st;
    st.t = r.get<std::uint64_t>();
    const auto n = r.get<std::uint64_t>();
    auto params = ck.model->params();
    if (n != 0 && n != params.size()) throw CheckpointError(name + ": optimizer state mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      st.m.emplace_back(params[i]->value.size());
      st.v.emplace_back(params[i]->value.size());
      r.doubles(st.m.back());
      r.doubles(st.v.back());
    }
    opt.set_state(std::move(st));
    ck.optimizer = std::move(opt);
  }
  if (!r.done()) throw CheckpointError(name + ": trailing bytes");
  return ck;
}

}  // namespace pcg::nn
