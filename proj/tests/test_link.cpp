#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "pdet/codec.hpp"
#include "pdet/error.hpp"
#include "pdet/link.hpp"
#include "pdet/metrics.hpp"
#include "support/synthetic.hpp"

using namespace pdet;

namespace {

VideoSequence flat_sequence(int w, int h, int n, uint8_t value) {
  VideoSequence seq;
  seq.fps = {10, 1};
  Frame f;
  f.width = w;
  f.height = h;
  f.pixels.assign(size_t(w) * h, value);
  seq.frames.assign(n, f);
  return seq;
}

}  // namespace

TEST_CASE("queue: matched rate delivers every frame one service time late") {
  LinkQueueSim q(0.31, std::nullopt);  // 31000-bit frames at 10 fps keep pace
  for (int i = 0; i < 6; ++i) {
    auto out = q.offer(i * 0.1, 31000);
    CHECK_FALSE(out.dropped);
    CHECK(out.latency_s == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(out.delivered_t == doctest::Approx(i * 0.1 + 0.1).epsilon(1e-9));
    CHECK(out.backlog_before_bits < 1e-6);
  }
  CHECK(q.peak_backlog_bits() < 1e-6);
}

TEST_CASE("queue: double rate halves the latency and leaves the link idle") {
  LinkQueueSim q(0.62, std::nullopt);
  for (int i = 0; i < 6; ++i) {
    auto out = q.offer(i * 0.1, 31000);
    CHECK_FALSE(out.dropped);
    CHECK(out.latency_s == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(out.backlog_before_bits < 1e-6);
  }
}

TEST_CASE("queue: half rate grows the backlog linearly") {
  LinkQueueSim q(0.155, std::nullopt);  // service takes two frame intervals
  double prev_latency = 0.0;
  for (int i = 0; i < 8; ++i) {
    auto out = q.offer(i * 0.1, 31000);
    CHECK_FALSE(out.dropped);
    CHECK(out.latency_s == doctest::Approx(0.2 + i * 0.1).epsilon(1e-9));
    CHECK(out.backlog_before_bits ==
          doctest::Approx(i * 15500.0).epsilon(1e-9));
    CHECK(out.latency_s > prev_latency);
    prev_latency = out.latency_s;
  }
  CHECK(q.peak_backlog_bits() == doctest::Approx(7 * 15500.0).epsilon(1e-9));
}

TEST_CASE("queue: overflow drops the newest arrival and keeps the rest") {
  LinkQueueSim q(0.155, uint64_t(40000));
  auto f0 = q.offer(0.0, 31000);
  CHECK_FALSE(f0.dropped);
  auto f1 = q.offer(0.1, 31000);  // 15500 queued + 31000 > 40000
  CHECK(f1.dropped);
  CHECK(f1.backlog_before_bits == doctest::Approx(15500.0).epsilon(1e-9));
  auto f2 = q.offer(0.2, 31000);  // the drop left the queue draining
  CHECK_FALSE(f2.dropped);
  CHECK(q.peak_backlog_bits() >= 15500.0 - 1e-6);
}

TEST_CASE("queue: an idle link serves a late arrival immediately") {
  LinkQueueSim q(0.31, std::nullopt);
  auto out = q.offer(5.0, 31000);
  CHECK(out.delivered_t == doctest::Approx(5.1).epsilon(1e-9));
  CHECK(out.latency_s == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(out.backlog_before_bits == 0.0);
}

TEST_CASE("queue: capacity must be positive") {
  CHECK_THROWS_WITH_AS(LinkQueueSim(0.0, std::nullopt),
                       doctest::Contains("capacity"), Error);
}

TEST_CASE("stability_boundary: cadence times frame size") {
  LinkConfig cfg;
  cfg.fps = {10, 1};
  CHECK(stability_boundary(cfg, 31000) == 0.31);
  CHECK(stability_boundary(cfg, 982000) == 9.82);
  CHECK(stability_boundary(cfg, 0) == 0.0);
  cfg.fps = {0, 1};
  CHECK_THROWS_WITH_AS(stability_boundary(cfg, 31000),
                       doctest::Contains("frame rate"), Error);
}

TEST_CASE("simulate_stream: frame conservation and trace shape") {
  auto seq = testsupport::natural_sequence(64, 64, 12, 1200);
  LinkConfig cfg;
  cfg.capacity_mbps = 50.0;
  cfg.latency_budget_s = 0.1;
  StreamReport rep = simulate_stream(seq, cfg, ControllerPolicy::fixed(30));

  CHECK(rep.produced_frames == 12);
  CHECK(rep.delivered_frames + rep.dropped_frames == rep.produced_frames);
  CHECK(rep.dropped_frames == 0);
  REQUIRE(rep.trace.size() == 12);
  for (int i = 0; i < 12; ++i) {
    CHECK(rep.trace[i].frame == i);
    CHECK(rep.trace[i].produced_t == doctest::Approx(i * 0.1).epsilon(1e-12));
    CHECK(rep.trace[i].crf == 30);
    CHECK_FALSE(rep.trace[i].dropped);
  }
  CHECK(rep.mean_latency_s <= rep.max_latency_s);
  CHECK(rep.mean_crf_used == 30.0);
}

TEST_CASE("simulate_stream: ample capacity keeps latency under one interval") {
  auto seq = testsupport::natural_sequence(64, 64, 30, 1210);
  uint64_t largest = 0;
  for (const Frame& f : seq.frames)
    largest = std::max(largest, encode_frame(f, {20}).size_bits());

  LinkConfig cfg;
  cfg.fps = seq.fps;
  cfg.capacity_mbps = 1.01 * stability_boundary(cfg, largest);
  cfg.latency_budget_s = 0.5;
  StreamReport rep = simulate_stream(seq, cfg, ControllerPolicy::fixed(20));
  CHECK(rep.dropped_frames == 0);
  CHECK(rep.max_latency_s <= 0.1 + 1e-9);
}

TEST_CASE("simulate_stream: below the boundary the queue grows without bound") {
  VideoSequence seq = flat_sequence(64, 64, 20, 77);
  uint64_t bits = encode_frame(seq.frames[0], {0}).size_bits();
  LinkConfig cfg;
  cfg.capacity_mbps = 0.5 * stability_boundary(cfg, bits);
  cfg.latency_budget_s = 0.1;
  StreamReport rep = simulate_stream(seq, cfg, ControllerPolicy::fixed(0));

  CHECK(rep.dropped_frames == 0);
  for (size_t i = 1; i < rep.trace.size(); ++i)
    CHECK(rep.trace[i].latency_s > rep.trace[i - 1].latency_s);
  // Every interval adds one service-minus-arrival gap = 0.1 s of wait.
  CHECK(rep.max_latency_s == doctest::Approx(0.2 + 19 * 0.1).epsilon(1e-6));
  CHECK(rep.peak_queue_bits == doctest::Approx(19 * bits * 0.5).epsilon(1e-6));
  CHECK(rep.avg_psnr.value.is_infinite());  // flat frames survive crf 0
}

TEST_CASE("simulate_stream: light load walks the quality down step by step") {
  auto seq = testsupport::natural_sequence(64, 64, 10, 1220);
  LinkConfig cfg;
  cfg.capacity_mbps = 100.0;
  cfg.latency_budget_s = 0.1;
  StreamReport rep = simulate_stream(seq, cfg, ControllerPolicy::adaptive(43.0));
  REQUIRE(rep.trace.size() == 10);
  for (int i = 0; i < 10; ++i)
    CHECK(rep.trace[i].crf == std::max(0, 18 - 3 * i));
}

TEST_CASE("simulate_stream: persistent lateness climbs until the cap") {
  auto seq = testsupport::natural_sequence(64, 64, 14, 1230);
  LinkConfig cfg;
  cfg.capacity_mbps = 0.001;  // every frame takes seconds to send
  cfg.latency_budget_s = 0.1;
  StreamReport rep =
      simulate_stream(seq, cfg, ControllerPolicy::adaptive(0.5));
  REQUIRE(rep.trace.size() == 14);
  for (int i = 0; i < 14; ++i)
    CHECK(rep.trace[i].crf == std::min(51, 18 + 3 * i));
  CHECK(rep.dropped_frames == 0);
  CHECK(rep.max_latency_s > 1.0);
}

TEST_CASE("simulate_stream: the floor bounds every delivered frame") {
  auto seq = testsupport::natural_sequence(64, 64, 15, 1240);
  LinkConfig cfg;
  cfg.capacity_mbps = 0.02;  // pressure pushes the controller coarse
  cfg.latency_budget_s = 0.11;
  StreamReport rep =
      simulate_stream(seq, cfg, ControllerPolicy::adaptive(43.0));
  for (const TraceRow& row : rep.trace) {
    if (!row.psnr.is_infinite()) CHECK(row.psnr.db >= 43.0);
  }
  CHECK(!rep.avg_psnr.value.is_infinite());
  CHECK(rep.avg_psnr.value.db >= 43.0);
}

TEST_CASE("simulate_stream: a zero-bit queue limit drops everything") {
  auto seq = testsupport::natural_sequence(64, 64, 5, 1250);
  LinkConfig cfg;
  cfg.capacity_mbps = 1.0;
  cfg.latency_budget_s = 0.1;
  cfg.queue_limit_bits = 0;
  DetectorProfile profile = scenario_profile("scenario1");
  StreamReport rep =
      simulate_stream(seq, cfg, ControllerPolicy::fixed(30), &profile);

  CHECK(rep.delivered_frames == 0);
  CHECK(rep.dropped_frames == 5);
  CHECK_FALSE(rep.achieved_accuracy_estimate.has_value());

  auto j = nlohmann::json::parse(report_to_json(rep));
  CHECK(j["produced_frames"] == 5);
  CHECK(j["delivered_frames"] == 0);
  CHECK_FALSE(j.contains("mean_latency_s"));
  CHECK_FALSE(j.contains("avg_psnr_db"));
}

TEST_CASE("simulate_stream: profile turns delivered quality into accuracy") {
  auto seq = testsupport::natural_sequence(64, 64, 6, 1260);
  LinkConfig cfg;
  cfg.capacity_mbps = 100.0;
  cfg.latency_budget_s = 0.5;
  DetectorProfile profile = scenario_profile("scenario1");
  StreamReport rep =
      simulate_stream(seq, cfg, ControllerPolicy::fixed(0), &profile);
  REQUIRE(rep.achieved_accuracy_estimate.has_value());
  CHECK(*rep.achieved_accuracy_estimate == 98.0);  // crf 0 lands above 43 dB
}

TEST_CASE("simulate_stream: configuration validation") {
  auto seq = testsupport::natural_sequence(32, 32, 2, 1270);
  LinkConfig good;
  good.capacity_mbps = 1.0;
  good.latency_budget_s = 0.1;

  LinkConfig bad = good;
  bad.capacity_mbps = 0.0;
  CHECK_THROWS_WITH_AS(simulate_stream(seq, bad, ControllerPolicy::fixed(30)),
                       doctest::Contains("capacity"), Error);
  bad = good;
  bad.latency_budget_s = 0.0;
  CHECK_THROWS_WITH_AS(simulate_stream(seq, bad, ControllerPolicy::fixed(30)),
                       doctest::Contains("budget"), Error);
  bad = good;
  bad.fps = {0, 1};
  CHECK_THROWS_WITH_AS(simulate_stream(seq, bad, ControllerPolicy::fixed(30)),
                       doctest::Contains("frame rate"), Error);

  CHECK_THROWS_WITH_AS(simulate_stream(seq, good, ControllerPolicy::fixed(52)),
                       doctest::Contains("fixed crf"), Error);
  CHECK_THROWS_WITH_AS(
      simulate_stream(seq, good, ControllerPolicy::adaptive(0.0)),
      doctest::Contains("floor"), Error);
  CHECK_THROWS_WITH_AS(
      simulate_stream(seq, good, ControllerPolicy::adaptive(49.0)),
      doctest::Contains("floor"), Error);
  CHECK_THROWS_WITH_AS(
      simulate_stream(seq, good, ControllerPolicy::adaptive(43.0, 0)),
      doctest::Contains("steps"), Error);

  ControllerPolicy bad_init = ControllerPolicy::adaptive(43.0);
  bad_init.initial_crf = 52;
  CHECK_THROWS_WITH_AS(simulate_stream(seq, good, bad_init),
                       doctest::Contains("initial"), Error);

  CHECK_THROWS_WITH_AS(simulate_stream({}, good, ControllerPolicy::fixed(30)),
                       doctest::Contains("empty input"), Error);
}

TEST_CASE("trace CSV: delivered and dropped rows") {
  TraceRow a;
  a.frame = 0;
  a.produced_t = 0.0;
  a.delivered_t = 0.1;
  a.latency_s = 0.1;
  a.crf = 30;
  a.psnr = {43.5};
  a.size_bits = 31000;

  TraceRow b;
  b.frame = 1;
  b.produced_t = 0.1;
  b.dropped = true;
  b.crf = 33;
  b.psnr = PsnrDb::infinite();
  b.size_bits = 2000;

  CHECK(write_trace_csv({a, b}) ==
        "frame,produced_t,delivered_t,latency_s,crf,psnr_db,size_bits,dropped\n"
        "0,0.000000,0.100000,0.100000,30,43.500000,31000,0\n"
        "1,0.100000,,,33,inf,2000,1\n");
}

TEST_CASE("report JSON: stable shape and values") {
  auto seq = testsupport::natural_sequence(64, 64, 4, 1280);
  LinkConfig cfg;
  cfg.capacity_mbps = 10.0;
  cfg.latency_budget_s = 0.2;
  StreamReport rep = simulate_stream(seq, cfg, ControllerPolicy::fixed(20));

  std::string s1 = report_to_json(rep);
  std::string s2 = report_to_json(simulate_stream(seq, cfg,
                                                  ControllerPolicy::fixed(20)));
  CHECK(s1 == s2);

  auto j = nlohmann::json::parse(s1);
  CHECK(j["produced_frames"] == 4);
  CHECK(j["delivered_frames"] == 4);
  CHECK(j["dropped_frames"] == 0);
  CHECK(j["mean_crf_used"] == 20.0);
  CHECK(j["avg_psnr_db"].is_number());
  CHECK(j["excluded_infinite_psnr_frames"] == 0);
  CHECK(j.contains("peak_queue_bits"));
}
