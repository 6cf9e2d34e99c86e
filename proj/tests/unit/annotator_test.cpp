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

#include <httplib.h>
#include <zlib.h>

#include <set>
#include <thread>

#include "pcgkit/annotator/render.hpp"
#include "pcgkit/annotator/review.hpp"
#include "pcgkit/annotator/server.hpp"
#include "pcgkit/common/io.hpp"
#include "pcgkit/pipeline/manifest.hpp"
#include "pcgkit/pipeline/synth.hpp"
#include "pcgkit/preprocess/wav.hpp"
#include "test_util.hpp"

using namespace pcg;
using namespace pcg::annotator;
namespace fs = std::filesystem;
using pcg::testing::TempDir;

namespace {

// 12 synthetic patients, 8 s each, cut into 24 four-second segments.
struct StoreFixture {
  TempDir dir;
  fs::path store = dir.path() / "store";
  StoreFixture() {
    pipeline::SynthOptions o;
    o.patients = 12;
    o.seconds = 8;
    pipeline::generate_synthetic(dir.path() / "data", o);
    preprocess::PreprocessOptions p;
    p.workers = 1;
    preprocess::build_segment_store(dir.path() / "data", store, p);
  }
};

const StoreFixture& base_store() {
  static StoreFixture f;
  return f;
}

// Fresh copy of the store so each test starts unreviewed.
struct Workspace {
  TempDir dir;
  fs::path store = dir.path() / "store";
  Workspace() { fs::copy(base_store().store, store, fs::copy_options::recursive); }
};

std::vector<std::string> ids_with(const ReviewStore& r, ClassLabel l) {
  std::vector<std::string> out;
  for (const auto& it : *r.snapshot())
    if (it.original == l) out.push_back(it.segment_id);
  return out;
}

std::map<ClassLabel, int> effective_counts(const ReviewStore& r) {
  std::map<ClassLabel, int> n;
  for (const auto& it : *r.snapshot()) ++n[it.effective];
  return n;
}

std::uint32_t be32(const std::string& s, std::size_t at) {
  return (std::uint32_t(std::uint8_t(s[at])) << 24) | (std::uint32_t(std::uint8_t(s[at + 1])) << 16) |
         (std::uint32_t(std::uint8_t(s[at + 2])) << 8) | std::uint32_t(std::uint8_t(s[at + 3]));
}

struct DecodedPng {
  std::uint32_t width = 0, height = 0;
  std::vector<std::uint8_t> rgb;
};

// Minimal decoder for the subset the renderer writes: checks signature,
// chunk CRCs and IHDR, inflates IDAT and strips the per-row filter byte.
DecodedPng decode_png(const std::string& s) {
  REQUIRE(s.size() > 8);
  REQUIRE(s.compare(0, 8, std::string("\x89PNG\r\n\x1a\n", 8)) == 0);
  DecodedPng d;
  std::string idat;
  std::size_t pos = 8;
  while (pos < s.size()) {
    const std::uint32_t len = be32(s, pos);
    const std::string type = s.substr(pos + 4, 4);
    const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(s.data() + pos + 4), uInt(len + 4));
    REQUIRE(be32(s, pos + 8 + len) == std::uint32_t(crc));
    if (type == "IHDR") {
      d.width = be32(s, pos + 8);
      d.height = be32(s, pos + 12);
      CHECK(s[pos + 16] == 8);
      CHECK(s[pos + 17] == 2);
    } else if (type == "IDAT") {
      idat += s.substr(pos + 8, len);
    }
    pos += 12 + len;
  }
  uLongf raw_len = uLongf(d.height) * (1 + uLongf(d.width) * 3);
  std::vector<std::uint8_t> raw(raw_len);
  REQUIRE(uncompress(raw.data(), &raw_len, reinterpret_cast<const Bytef*>(idat.data()), uLong(idat.size())) == Z_OK);
  REQUIRE(raw_len == raw.size());
  for (std::uint32_t y = 0; y < d.height; ++y) {
    const std::size_t row = y * (1 + std::size_t(d.width) * 3);
    CHECK(raw[row] == 0);
    d.rgb.insert(d.rgb.end(), raw.begin() + std::ptrdiff_t(row + 1),
                 raw.begin() + std::ptrdiff_t(row + 1 + d.width * 3));
  }
  return d;
}

}  // namespace

TEST_CASE("fresh review state") {
  Workspace w;
  ReviewStore r(w.store, {});
  const auto snap = r.snapshot();
  REQUIRE(snap->size() == 24);
  for (const auto& it : *snap) {
    CHECK(it.status == ReviewStatus::Unreviewed);
    CHECK(it.effective == it.original);
  }
  for (std::size_t i = 1; i < snap->size(); ++i)
    CHECK(std::tie((*snap)[i - 1].recording_id, (*snap)[i - 1].index) <
          std::tie((*snap)[i].recording_id, (*snap)[i].index));
  CHECK(r.list(ReviewStatus::Unreviewed, 1, 1000).total == 24);
  CHECK(r.list(ReviewStatus::Confirmed, 1, 1000).total == 0);

  std::size_t sum = 0;
  std::set<std::string> seen;
  for (std::size_t page = 1; page <= 5; ++page) {
    const auto p = r.list(std::nullopt, page, 7);
    CHECK(p.total == 24);
    sum += p.items.size();
    for (const auto& it : p.items) seen.insert(it.segment_id);
  }
  CHECK(sum == 24);
  CHECK(seen.size() == 24);
  CHECK(r.list(std::nullopt, 9, 7).items.empty());
  CHECK(r.export_relabels().empty());
  CHECK(fs::exists(r.manifest_path()));
}

TEST_CASE("all nine transitions") {
  Workspace w;
  ReviewStore r(w.store, {});
  const ClassLabel labels[3] = {ClassLabel::Present, ClassLabel::Unknown, ClassLabel::Absent};
  int ok = 0, rejected = 0, relabels = 0;
  auto before = effective_counts(r);
  for (ClassLabel from : labels) {
    const auto ids = ids_with(r, from);
    int k = 0;
    for (ClassLabel to : labels) {
      const std::string id = ids.at(std::size_t(k++));
      const auto prev = *r.find(id);
      const auto d = r.decide(id, pcg::to_string(to));
      const bool legal = from == to || (to == ClassLabel::Unknown);
      if (legal) {
        REQUIRE(d.outcome == Outcome::Ok);
        ++ok;
        CHECK(d.item->effective == to);
        if (from != to) {
          ++relabels;
          CHECK(d.item->status == ReviewStatus::Relabeled);
        } else {
          CHECK(d.item->status == ReviewStatus::Confirmed);
        }
      } else {
        CHECK(d.outcome == Outcome::Illegal);
        CHECK(d.message.find("only Present->Unknown and Absent->Unknown") != std::string::npos);
        CHECK(*r.find(id) == prev);
        ++rejected;
      }
      // Mass only ever moves into Unknown.
      auto now = effective_counts(r);
      const int du = now[ClassLabel::Unknown] - before[ClassLabel::Unknown];
      const int dp = now[ClassLabel::Present] - before[ClassLabel::Present];
      const int da = now[ClassLabel::Absent] - before[ClassLabel::Absent];
      CHECK(du >= 0);
      CHECK(dp <= 0);
      CHECK(da <= 0);
      before = now;
    }
  }
  CHECK(ok == 5);
  CHECK(relabels == 2);
  CHECK(rejected == 4);
  CHECK(r.decide("nope", "confirm").outcome == Outcome::NotFound);
  CHECK(r.decide(ids_with(r, ClassLabel::Absent).back(), "Loud").outcome == Outcome::Illegal);

  // Audit: one line per accepted decision, each obeying the rule.
  const auto audit = read_audit(r.audit_path());
  CHECK(audit.size() == 5);
  for (std::size_t i = 0; i < audit.size(); ++i) {
    CHECK(audit[i].seq == i + 1);
    CHECK(pipeline::relabel_allowed(audit[i].from, audit[i].to));
    CHECK(audit[i].timestamp.size() == 24);
  }
  // Replay from empty reproduces the state, and so does reopening.
  auto replayed = initial_items(r.store());
  replay(replayed, audit);
  CHECK(replayed == *r.snapshot());
  CHECK(read_review_manifest(r.manifest_path()) == *r.snapshot());
  ReviewStore reopened(w.store, {});
  CHECK(*reopened.snapshot() == *r.snapshot());

  // Confirming the original label undoes a relabel.
  const auto relabeled = r.list(ReviewStatus::Relabeled, 1, 10).items.at(0);
  const auto undo = r.decide(relabeled.segment_id, "confirm");
  CHECK(undo.item->effective == relabeled.original);
  CHECK(undo.item->status == ReviewStatus::Confirmed);
}

TEST_CASE("export feeds build_manifest") {
  Workspace w;
  ReviewStore r(w.store, {});
  int k = 0;
  for (const auto& id : ids_with(r, ClassLabel::Present)) {
    if (k == 3) break;
    REQUIRE(r.decide(id, "Unknown", "noise only").outcome == Outcome::Ok);
    ++k;
    const std::string ex = r.export_relabels();
    CHECK(std::count(ex.begin(), ex.end(), '\n') == k);
  }
  REQUIRE(r.decide(ids_with(r, ClassLabel::Absent).at(0), "Unknown").outcome == Outcome::Ok);
  write_file_atomic(w.dir.path() / "relabels.jsonl", r.export_relabels());
  const auto m = pipeline::build_manifest(r.store(), w.dir.path() / "relabels.jsonl");
  std::map<std::string, ClassLabel> eff;
  for (const auto& it : *r.snapshot()) eff[it.segment_id] = it.effective;
  for (const auto& e : m.entries) CHECK(e.effective == eff.at(e.segment_id));
  CHECK(m.relabeled() == 4);
}

TEST_CASE("concurrent decisions keep the manifest intact") {
  Workspace w;
  ReviewStore r(w.store, {});
  const auto snap = r.snapshot();
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < snap->size(); i += 4) {
        const auto& it = (*snap)[i];
        r.decide(it.segment_id, it.original == ClassLabel::Unknown ? "confirm" : "Unknown");
      }
    });
  for (auto& th : threads) th.join();
  const auto audit = read_audit(r.audit_path());
  CHECK(audit.size() == snap->size());
  std::set<std::uint64_t> seqs;
  for (const auto& e : audit) seqs.insert(e.seq);
  CHECK(seqs.size() == audit.size());
  auto replayed = initial_items(r.store());
  replay(replayed, audit);
  CHECK(replayed == *r.snapshot());
  CHECK(read_review_manifest(r.manifest_path()) == *r.snapshot());
  CHECK(r.list(ReviewStatus::Unreviewed, 1, 100).total == 0);
}

TEST_CASE("png encoding against an independent decoder") {
  std::vector<std::uint8_t> px;
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) px.insert(px.end(), {std::uint8_t(x * 50), std::uint8_t(y * 100), 7});
  const auto png = encode_png_rgb(5, 3, px);
  const auto d = decode_png(std::string(png.begin(), png.end()));
  CHECK(d.width == 5);
  CHECK(d.height == 3);
  CHECK(d.rgb == px);
  CHECK_THROWS_AS(encode_png_rgb(5, 3, std::vector<std::uint8_t>(10)), std::invalid_argument);

  CHECK(colormap(0.0) == std::array<std::uint8_t, 3>{13, 8, 135});
  CHECK(colormap(1.0) == std::array<std::uint8_t, 3>{240, 249, 33});
  CHECK(colormap(-3.0) == colormap(0.0));
  CHECK(colormap(0.5) == std::array<std::uint8_t, 3>{185, 50, 137});
}

TEST_CASE("rendered feature maps") {
  features::Matrix m(2, 3);
  m(0, 0) = 1.0;  // bottom-left is the only bright cell
  const auto img = render_matrix(m, 2);
  CHECK(img.width == 6);
  CHECK(img.height == 4);
  const auto d = decode_png(std::string(img.png.begin(), img.png.end()));
  auto at = [&](std::size_t x, std::size_t y) {
    const std::size_t o = (y * d.width + x) * 3;
    return std::array<std::uint8_t, 3>{d.rgb[o], d.rgb[o + 1], d.rgb[o + 2]};
  };
  CHECK(at(0, 3) == colormap(1.0));
  CHECK(at(1, 2) == colormap(1.0));
  CHECK(at(0, 0) == colormap(0.0));
  CHECK(at(5, 3) == colormap(0.0));

  // Zero signal renders as one color; dimensions are map dims x scale.
  const std::vector<double> zero(16000, 0.0);
  for (auto kind : {features::FeatureKind::WST, features::FeatureKind::STFT}) {
    const auto z = render_segment(kind, zero, 4000, 3);
    features::FeatureParams p;
    const auto fm = features::extract(kind, zero, p);
    CHECK(z.width == fm.data.cols * 3);
    CHECK(z.height == fm.data.rows * 3);
    const auto dz = decode_png(std::string(z.png.begin(), z.png.end()));
    std::set<std::array<std::uint8_t, 3>> colors;
    for (std::size_t i = 0; i < dz.rgb.size(); i += 3) colors.insert({dz.rgb[i], dz.rgb[i + 1], dz.rgb[i + 2]});
    CHECK(colors.size() == 1);
  }
  CHECK_THROWS_AS(render_segment(features::FeatureKind::MFCC, zero, 4000, 1), std::invalid_argument);
  CHECK_THROWS_AS(render_matrix(m, 0), std::invalid_argument);
}

TEST_CASE("http api") {
  Workspace w;
  fs::create_directories(w.dir.path() / "ui");
  write_file_atomic(w.dir.path() / "ui" / "index.html", "<html>review</html>");
  ServerOptions opt;
  opt.store_dir = w.store.string();
  opt.port = 0;
  opt.ui_dir = (w.dir.path() / "ui").string();
  opt.cors_origin = "http://localhost:5173";
  ApiServer server(opt);
  const int port = server.bind();
  std::thread th([&] { server.run(); });
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(30, 0);

  SUBCASE("listing and pagination") {
    auto r = cli.Get("/segments?status=unreviewed&page_size=1000");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
    auto j = nlohmann::json::parse(r->body);
    CHECK(j["total"] == 24);
    CHECK(j["items"].size() == 24);
    std::size_t sum = 0;
    for (int page = 1; page <= 3; ++page) {
      auto pr = cli.Get(("/segments?page=" + std::to_string(page) + "&page_size=10").c_str());
      sum += nlohmann::json::parse(pr->body)["items"].size();
    }
    CHECK(sum == 24);
    auto beyond = cli.Get("/segments?page=99&page_size=10");
    CHECK(beyond->status == 200);
    CHECK(nlohmann::json::parse(beyond->body)["items"].empty());
    for (const char* bad : {"/segments?page=0", "/segments?page=abc", "/segments?page_size=5000",
                            "/segments?page_size=-1", "/segments?status=done"})
      CHECK(cli.Get(bad)->status == 400);
    auto opts = cli.Options("/segments");
    CHECK(opts->status == 204);
    CHECK(opts->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
    CHECK(cli.Get("/")->body == "<html>review</html>");
  }

  SUBCASE("audio") {
    const auto& rec = server.review().store().records().at(0);
    auto r = cli.Get(("/segments/" + rec.segment_id + "/audio").c_str());
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Content-Type") == "audio/wav");
    const std::vector<std::uint8_t> bytes(r->body.begin(), r->body.end());
    const auto wav = preprocess::decode_wav(bytes);
    CHECK(wav.sample_rate_hz == 4000);
    CHECK(wav.samples.size() == 16000);
    const double peak = std::stod(r->get_header_value("X-Pcg-Peak"));
    const auto x = server.review().store().load_samples(rec.segment_id);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(wav.samples[i] * peak - x[i]));
    CHECK(worst <= peak / 32768.0 * 1.0001);
    CHECK(r->get_header_value("Access-Control-Expose-Headers") == "X-Pcg-Peak");
    CHECK(cli.Get("/segments/nope/audio")->status == 404);
  }

  SUBCASE("images") {
    const std::string id = server.review().store().records().at(0).segment_id;
    auto a = cli.Get(("/segments/" + id + "/image?kind=wst").c_str());
    REQUIRE(a);
    CHECK(a->status == 200);
    CHECK(a->get_header_value("Content-Type") == "image/png");
    const auto d = decode_png(a->body);
    CHECK(d.width == 1000 * 2);
    CHECK(d.height == 22 * 2);
    auto b = cli.Get(("/segments/" + id + "/image?kind=wst").c_str());
    CHECK(a->body == b->body);
    auto s = cli.Get(("/segments/" + id + "/image?kind=stft&scale=1").c_str());
    const auto ds = decode_png(s->body);
    CHECK(ds.width == 993);
    CHECK(ds.height == 65);
    CHECK(cli.Get(("/segments/" + id + "/image?kind=mfcc").c_str())->status == 400);
    CHECK(cli.Get(("/segments/" + id + "/image?kind=x").c_str())->status == 400);
    CHECK(cli.Get(("/segments/" + id + "/image?scale=0").c_str())->status == 400);
    CHECK(cli.Get("/segments/nope/image?kind=wst")->status == 404);
  }

  SUBCASE("labels and export") {
    CHECK(cli.Get("/export")->body.empty());
    const auto present = ids_with(server.review(), ClassLabel::Present);
    const auto unknown = ids_with(server.review(), ClassLabel::Unknown);
    const auto absent = ids_with(server.review(), ClassLabel::Absent);
    auto post = [&](const std::string& id, const std::string& body) {
      return cli.Post(("/segments/" + id + "/label").c_str(), body, "application/json");
    };
    auto r = post(present[0], R"({"to":"Unknown","note":"noise"})");
    REQUIRE(r);
    CHECK(r->status == 200);
    auto j = nlohmann::json::parse(r->body);
    CHECK(j["effective_label"] == "Unknown");
    CHECK(j["status"] == "relabeled");
    CHECK(j["note"] == "noise");
    r = post(absent[0], R"({"to":"confirm"})");
    CHECK(nlohmann::json::parse(r->body)["status"] == "confirmed");
    CHECK(nlohmann::json::parse(r->body)["effective_label"] == "Absent");
    r = post(unknown[0], R"({"to":"Present"})");
    CHECK(r->status == 409);
    CHECK(nlohmann::json::parse(r->body)["error"].get<std::string>().find("Unknown->Present") != std::string::npos);
    CHECK(post(present[1], R"({"to":"Absent"})")->status == 409);
    CHECK(post("nope", R"({"to":"Unknown"})")->status == 404);
    CHECK(post(present[1], "not json")->status == 400);
    CHECK(post(present[1], R"({"label":"Unknown"})")->status == 400);
    const std::string ex = cli.Get("/export")->body;
    CHECK(ex == pipeline::relabel_line({present[0], ClassLabel::Present, ClassLabel::Unknown}) + "\n");
    auto one = nlohmann::json::parse(cli.Get(("/segments/" + present[0]).c_str())->body);
    CHECK(one["status"] == "relabeled");
    auto stats = nlohmann::json::parse(cli.Get("/stats")->body);
    CHECK(stats["effective_labels"]["Unknown"] == 9);
    CHECK(stats["status"]["relabeled"] == 1);
    CHECK(stats["status"]["confirmed"] == 1);
  }

  server.stop();
  th.join();
}
