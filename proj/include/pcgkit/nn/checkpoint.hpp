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
#include <memory>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "pcgkit/nn/adam.hpp"
#include "pcgkit/nn/model.hpp"

namespace pcg::nn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layout (little-endian):
//   char[4] "PCGM", u32 version (1), u64 header length, header JSON
//   {spec, seed, extra, dropout_rng, has_optimizer, adam {lr, beta1, ...}},
//   then float64 blobs: every parameter, every buffer, and when present
//   the Adam step counter (u64) followed by m and v per parameter.
void save_checkpoint(const std::filesystem::path& path, Model& model, const Adam* opt,
                     const nlohmann::json& extra = nlohmann::json::object());

struct Checkpoint {
  std::unique_ptr<Model> model;
  std::optional<Adam> optimizer;
  nlohmann::json extra;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pcg::nn
