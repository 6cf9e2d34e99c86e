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

#include <iosfwd>
#include <memory>
#include <string>

#include "pcgkit/annotator/review.hpp"

namespace pcg::annotator {

struct ServerOptions {
  std::string store_dir;
  std::string review_dir;  // empty: <store_dir>/review
  std::string host = "127.0.0.1";
  int port = 8765;
  std::string ui_dir;  // optional static files served at /
  std::string cors_origin = "*";
  int image_scale = 2;  // default ?scale= for images
};

// Endpoints:
//   GET  /segments?status=&page=&page_size=   paged review items (page from 1)
//   GET  /segments/{id}                        one item
//   GET  /segments/{id}/audio                  16-bit mono WAV, peak-normalized
//   GET  /segments/{id}/image?kind=wst|stft&scale=   PNG
//   POST /segments/{id}/label {"to": "Unknown"|"confirm"|<label>, "note": ...}
//   GET  /export                               relabel JSON lines
//   GET  /stats                                counts by effective label and status
class ApiServer {
 public:
  explicit ApiServer(ServerOptions opt);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  ReviewStore& review();
  // Binds host:port (port 0 picks a free one) and returns the port.
  int bind();
  // Serves until stop(); call bind() first.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Binds, logs the address and serves until the process is stopped.
int serve(const ServerOptions& opt, std::ostream& log);

}  // namespace pcg::annotator
