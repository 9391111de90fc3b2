#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdet/detector.hpp"
#include "pdet/frame.hpp"
#include "pdet/metrics.hpp"

namespace pdet {

struct LinkConfig {
  double capacity_mbps = 0.0;              // must be positive
  Rational fps{10, 1};                     // production cadence
  std::optional<uint64_t> queue_limit_bits;  // absent = unbounded queue
  double latency_budget_s = 0.0;           // must be positive
};

// Frame-by-frame quality control. fixed pins one crf; adaptive walks the crf
// against the latency budget (up one step when the previous frame was late or
// dropped, down one step when it was under half budget) and re-encodes finer
// whenever a frame would land below the PSNR floor.
struct ControllerPolicy {
  enum class Mode { fixed, adaptive };

  Mode mode = Mode::fixed;
  int fixed_crf = 0;
  double psnr_floor_db = 0.0;  // adaptive only; must be in (0, 48]
  int step_up = 3;
  int step_down = 3;
  int initial_crf = 18;

  static ControllerPolicy fixed(int crf);
  static ControllerPolicy adaptive(double floor_db, int step_up = 3,
                                   int step_down = 3);
};

// One produced frame. delivered_t and latency_s are meaningful only when the
// frame was not dropped.
struct TraceRow {
  int frame = 0;
  double produced_t = 0.0;
  bool dropped = false;
  double delivered_t = 0.0;
  double latency_s = 0.0;
  int crf = 0;
  PsnrDb psnr;
  uint64_t size_bits = 0;
};

struct StreamReport {
  uint64_t produced_frames = 0;
  uint64_t delivered_frames = 0;
  uint64_t dropped_frames = 0;
  double mean_latency_s = 0.0;  // delivered frames only
  double max_latency_s = 0.0;
  double mean_crf_used = 0.0;   // delivered frames only
  AveragePsnr avg_psnr;         // delivered frames only
  double peak_queue_bits = 0.0; // largest backlog seen as a frame arrived
  std::optional<double> achieved_accuracy_estimate;
  std::vector<TraceRow> trace;
};

// FIFO drain at a fixed rate with optional drop-newest overflow. offer()
// admits (or drops) one arrival and reports its delivery time and the backlog
// found on arrival.
class LinkQueueSim {
 public:
  LinkQueueSim(double capacity_mbps, std::optional<uint64_t> queue_limit_bits);

  struct Outcome {
    bool dropped = false;
    double delivered_t = 0.0;
    double latency_s = 0.0;
    double backlog_before_bits = 0.0;
  };

  // produced_t must be non-decreasing across calls.
  Outcome offer(double produced_t, uint64_t size_bits);
  double peak_backlog_bits() const { return peak_; }

 private:
  double rate_bps_ = 0.0;
  std::optional<uint64_t> limit_;
  double free_t_ = 0.0;  // when the link finishes everything admitted so far
  double peak_ = 0.0;
};

// Drives the camera -> link -> edge pipeline over the sequence. When a
// profile is given, achieved_accuracy_estimate is the profile accuracy at the
// mean delivered PSNR.
StreamReport simulate_stream(const VideoSequence& seq, const LinkConfig& cfg,
                             const ControllerPolicy& policy,
                             const DetectorProfile* profile = nullptr);

// Capacity (Mbit/s) that exactly keeps up with fixed-size frames at the
// configured cadence; queues grow without bound below it.
double stability_boundary(const LinkConfig& cfg, uint64_t frame_size_bits);

// CSV: frame,produced_t,delivered_t,latency_s,crf,psnr_db,size_bits,dropped.
// Dropped rows leave delivered_t and latency_s empty and flag dropped=1.
std::string write_trace_csv(const std::vector<TraceRow>& trace);

std::string report_to_json(const StreamReport& r);

}  // namespace pdet
