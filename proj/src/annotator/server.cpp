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

#include "pcgkit/annotator/server.hpp"

#include <httplib.h>

#include <charconv>
#include <map>
#include <mutex>
#include <ostream>

#include "pcgkit/annotator/render.hpp"
#include "pcgkit/preprocess/wav.hpp"

namespace pcg::annotator {
namespace {

constexpr std::size_t kMaxPageSize = 1000;
constexpr std::size_t kImageCacheEntries = 256;

void send_json(httplib::Response& res, int status, const nlohmann::json& j) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}});
}

std::optional<std::size_t> parse_positive(const std::string& s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v == 0) return std::nullopt;
  return v;
}

}  // namespace

struct ApiServer::Impl {
  ServerOptions opt;
  ReviewStore review;
  httplib::Server http;
  int port = 0;
  std::mutex image_mu;
  std::map<std::string, std::shared_ptr<const std::string>> images;

  explicit Impl(ServerOptions o) : opt(std::move(o)), review(opt.store_dir, opt.review_dir) { routes(); }

  std::shared_ptr<const std::string> image(const ReviewItem& item, features::FeatureKind kind, int scale) {
    const features::FeatureParams params;
    const std::string key = item.segment_id + "|" + std::string(features::to_string(kind)) + "|" +
                            std::to_string(params.hash(kind)) + "|" + std::to_string(scale);
    {
      std::lock_guard lock(image_mu);
      if (auto it = images.find(key); it != images.end()) return it->second;
    }
    const auto idx = review.store().find(item.segment_id);
    const int rate = review.store().records()[std::size_t(idx)].sample_rate_hz;
    const auto img = render_segment(kind, review.store().load_samples(item.segment_id), rate, scale);
    auto png = std::make_shared<const std::string>(img.png.begin(), img.png.end());
    std::lock_guard lock(image_mu);
    if (images.size() >= kImageCacheEntries) images.clear();
    images.emplace(key, png);
    return png;
  }

  void routes() {
    http.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", opt.cors_origin);
      res.set_header("Access-Control-Expose-Headers", "X-Pcg-Peak");
    });
    http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    if (!opt.ui_dir.empty()) http.set_mount_point("/", opt.ui_dir);

    http.Get("/segments", [this](const httplib::Request& req, httplib::Response& res) {
      std::optional<ReviewStatus> status;
      if (req.has_param("status") && !req.get_param_value("status").empty()) {
        status = parse_status(req.get_param_value("status"));
        if (!status) return send_error(res, 400, "status must be unreviewed, confirmed or relabeled");
      }
      std::size_t page = 1, page_size = 50;
      if (req.has_param("page")) {
        auto v = parse_positive(req.get_param_value("page"));
        if (!v) return send_error(res, 400, "page must be a positive integer");
        page = *v;
      }
      if (req.has_param("page_size")) {
        auto v = parse_positive(req.get_param_value("page_size"));
        if (!v || *v > kMaxPageSize)
          return send_error(res, 400, "page_size must be in 1.." + std::to_string(kMaxPageSize));
        page_size = *v;
      }
      const Page p = review.list(status, page, page_size);
      nlohmann::json items = nlohmann::json::array();
      for (const auto& it : p.items) items.push_back(to_json(it));
      send_json(res, 200, {{"items", items}, {"total", p.total}, {"page", p.page}, {"page_size", p.page_size}});
    });

    http.Get(R"(/segments/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto item = review.find(req.matches[1]);
      if (!item) return send_error(res, 404, "unknown segment");
      send_json(res, 200, to_json(*item));
    });

    http.Get(R"(/segments/([^/]+)/audio)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      const auto idx = review.store().find(id);
      if (idx < 0) return send_error(res, 404, "unknown segment");
      auto x = review.store().load_samples(id);
      double peak = 0.0;
      for (double v : x) peak = std::max(peak, std::abs(v));
      if (peak > 0.0)
        for (double& v : x) v /= peak;
      const auto wav = preprocess::encode_wav16(x, review.store().records()[std::size_t(idx)].sample_rate_hz);
      char buf[32];
      const auto end = std::to_chars(buf, buf + sizeof buf, peak).ptr;
      res.set_header("X-Pcg-Peak", std::string(buf, end));
      res.set_content(std::string(wav.begin(), wav.end()), "audio/wav");
    });

    http.Get(R"(/segments/([^/]+)/image)", [this](const httplib::Request& req, httplib::Response& res) {
      auto item = review.find(req.matches[1]);
      if (!item) return send_error(res, 404, "unknown segment");
      const std::string k = req.has_param("kind") ? req.get_param_value("kind") : "wst";
      const auto kind = features::parse_feature_kind(k);
      if (!kind || *kind == features::FeatureKind::MFCC) return send_error(res, 400, "kind must be wst or stft");
      int scale = opt.image_scale;
      if (req.has_param("scale")) {
        auto v = parse_positive(req.get_param_value("scale"));
        if (!v || *v > 8) return send_error(res, 400, "scale must be in 1..8");
        scale = int(*v);
      }
      const auto png = image(*item, *kind, scale);
      res.set_content(*png, "image/png");
    });

    http.Post(R"(/segments/([^/]+)/label)", [this](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception&) {
        return send_error(res, 400, "body must be JSON");
      }
      if (!body.is_object() || !body.contains("to") || !body["to"].is_string())
        return send_error(res, 400, "body needs a string field 'to'");
      const std::string note = body.value("note", "");
      const Decision d = review.decide(req.matches[1], body["to"].get<std::string>(), note);
      switch (d.outcome) {
        case Outcome::NotFound: return send_error(res, 404, d.message);
        case Outcome::Illegal: return send_error(res, 409, d.message);
        case Outcome::Ok: return send_json(res, 200, to_json(*d.item));
      }
    });

    http.Get("/export", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(review.export_relabels(), "application/x-ndjson");
    });

    http.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json labels = nlohmann::json::object(), statuses = nlohmann::json::object();
      for (const auto& it : *review.snapshot()) {
        auto& l = labels[std::string(pcg::to_string(it.effective))];
        l = l.is_null() ? 1 : l.get<int>() + 1;
        auto& s = statuses[std::string(to_string(it.status))];
        s = s.is_null() ? 1 : s.get<int>() + 1;
      }
      send_json(res, 200, {{"effective_labels", labels}, {"status", statuses}});
    });

    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      } catch (...) {
        send_error(res, 500, "internal error");
      }
    });
  }
};

ApiServer::ApiServer(ServerOptions opt) : impl_(std::make_unique<Impl>(std::move(opt))) {}
ApiServer::~ApiServer() { stop(); }

ReviewStore& ApiServer::review() { return impl_->review; }

int ApiServer::bind() {
  if (impl_->opt.port == 0)
    impl_->port = impl_->http.bind_to_any_port(impl_->opt.host);
  else
    impl_->port = impl_->http.bind_to_port(impl_->opt.host, impl_->opt.port) ? impl_->opt.port : -1;
  if (impl_->port <= 0)
    throw std::runtime_error("cannot bind " + impl_->opt.host + ":" + std::to_string(impl_->opt.port));
  return impl_->port;
}

void ApiServer::run() { impl_->http.listen_after_bind(); }
void ApiServer::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

int serve(const ServerOptions& opt, std::ostream& log) {
  ApiServer server(opt);
  const int port = server.bind();
  log << "annotator API on http://" << opt.host << ":" << port << " (" << server.review().snapshot()->size()
      << " segments, review state in " << server.review().review_dir().string() << ")\n";
  server.run();
  return 0;
}

}  // namespace pcg::annotator
