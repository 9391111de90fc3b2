#include "pdet/link.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "pdet/codec.hpp"
#include "pdet/error.hpp"

namespace pdet {

namespace {

using nlohmann::json;

void validate(const LinkConfig& cfg) {
  if (!(cfg.capacity_mbps > 0.0))
    throw Error(Errc::config, "link capacity must be positive");
  if (cfg.fps.num < 1 || cfg.fps.den < 1)
    throw Error(Errc::config, "frame rate must be positive");
  if (!(cfg.latency_budget_s > 0.0))
    throw Error(Errc::config, "latency budget must be positive");
}

void validate(const ControllerPolicy& p) {
  if (p.mode == ControllerPolicy::Mode::fixed) {
    if (p.fixed_crf < 0 || p.fixed_crf > 51)
      throw Error(Errc::config, "fixed crf must be in [0, 51]");
    return;
  }
  // The finest level still quantizes, so floors above what crf 0 delivers
  // could never be met; 48 dB sits safely below that ceiling.
  if (!(p.psnr_floor_db > 0.0) || p.psnr_floor_db > 48.0)
    throw Error(Errc::config, "PSNR floor must be in (0, 48]");
  if (p.step_up < 1 || p.step_down < 1)
    throw Error(Errc::config, "controller steps must be at least 1");
  if (p.initial_crf < 0 || p.initial_crf > 51)
    throw Error(Errc::config, "initial crf must be in [0, 51]");
}

}  // namespace

ControllerPolicy ControllerPolicy::fixed(int crf) {
  ControllerPolicy p;
  p.mode = Mode::fixed;
  p.fixed_crf = crf;
  return p;
}

ControllerPolicy ControllerPolicy::adaptive(double floor_db, int step_up,
                                            int step_down) {
  ControllerPolicy p;
  p.mode = Mode::adaptive;
  p.psnr_floor_db = floor_db;
  p.step_up = step_up;
  p.step_down = step_down;
  return p;
}

LinkQueueSim::LinkQueueSim(double capacity_mbps,
                           std::optional<uint64_t> queue_limit_bits)
    : rate_bps_(capacity_mbps * 1e6), limit_(queue_limit_bits) {
  if (!(capacity_mbps > 0.0))
    throw Error(Errc::config, "link capacity must be positive");
}

LinkQueueSim::Outcome LinkQueueSim::offer(double produced_t,
                                          uint64_t size_bits) {
  double backlog = std::max(0.0, free_t_ - produced_t) * rate_bps_;
  peak_ = std::max(peak_, backlog);
  if (limit_ && backlog + double(size_bits) > double(*limit_))
    return {true, 0.0, 0.0, backlog};
  free_t_ = std::max(free_t_, produced_t) + double(size_bits) / rate_bps_;
  return {false, free_t_, free_t_ - produced_t, backlog};
}

double stability_boundary(const LinkConfig& cfg, uint64_t frame_size_bits) {
  if (cfg.fps.num < 1 || cfg.fps.den < 1)
    throw Error(Errc::config, "frame rate must be positive");
  return cfg.fps.as_double() * double(frame_size_bits) / 1e6;
}

StreamReport simulate_stream(const VideoSequence& seq, const LinkConfig& cfg,
                             const ControllerPolicy& policy,
                             const DetectorProfile* profile) {
  validate(cfg);
  validate(policy);
  if (seq.frames.empty())
    throw Error(Errc::empty_input, "cannot stream an empty sequence");
  pdet::validate(seq);

  bool adaptive = policy.mode == ControllerPolicy::Mode::adaptive;
  int crf = adaptive ? policy.initial_crf : policy.fixed_crf;

  LinkQueueSim queue(cfg.capacity_mbps, cfg.queue_limit_bits);
  StreamReport rep;
  rep.produced_frames = seq.frames.size();

  bool have_prev = false;
  bool prev_over_budget = false;
  bool prev_under_half = false;

  double latency_sum = 0.0, crf_sum = 0.0, psnr_sum = 0.0;
  uint64_t finite_psnr = 0, infinite_psnr = 0;

  for (size_t i = 0; i < seq.frames.size(); ++i) {
    double produced_t =
        double(i) * double(cfg.fps.den) / double(cfg.fps.num);

    if (adaptive && have_prev) {
      if (prev_over_budget)
        crf = std::min(51, crf + policy.step_up);
      else if (prev_under_half)
        crf = std::max(0, crf - policy.step_down);
    }

    CompressedFrame cf = encode_frame(seq.frames[i], {crf});
    PsnrDb p = psnr(seq.frames[i], decode_frame(cf));
    if (adaptive) {
      // Hard floor: walk finer one step at a time until quality clears it.
      while (!p.is_infinite() && p.db < policy.psnr_floor_db && crf > 0) {
        --crf;
        cf = encode_frame(seq.frames[i], {crf});
        p = psnr(seq.frames[i], decode_frame(cf));
      }
    }

    LinkQueueSim::Outcome out = queue.offer(produced_t, cf.size_bits());

    TraceRow row;
    row.frame = int(i);
    row.produced_t = produced_t;
    row.dropped = out.dropped;
    row.crf = crf;
    row.psnr = p;
    row.size_bits = cf.size_bits();
    if (!out.dropped) {
      row.delivered_t = out.delivered_t;
      row.latency_s = out.latency_s;
      ++rep.delivered_frames;
      latency_sum += out.latency_s;
      rep.max_latency_s = std::max(rep.max_latency_s, out.latency_s);
      crf_sum += double(crf);
      if (p.is_infinite())
        ++infinite_psnr;
      else {
        psnr_sum += p.db;
        ++finite_psnr;
      }
    } else {
      ++rep.dropped_frames;
    }
    rep.trace.push_back(row);

    have_prev = true;
    prev_over_budget = out.dropped || out.latency_s > cfg.latency_budget_s;
    prev_under_half = !out.dropped && out.latency_s < cfg.latency_budget_s / 2.0;
  }

  rep.peak_queue_bits = queue.peak_backlog_bits();
  if (rep.delivered_frames > 0) {
    rep.mean_latency_s = latency_sum / double(rep.delivered_frames);
    rep.mean_crf_used = crf_sum / double(rep.delivered_frames);
    rep.avg_psnr = finite_psnr > 0
                       ? AveragePsnr{{psnr_sum / double(finite_psnr)},
                                     size_t(infinite_psnr)}
                       : AveragePsnr{PsnrDb::infinite(), 0};
    if (profile)
      rep.achieved_accuracy_estimate = profile->accuracy_at(rep.avg_psnr.value);
  }
  return rep;
}

std::string write_trace_csv(const std::vector<TraceRow>& trace) {
  std::string out =
      "frame,produced_t,delivered_t,latency_s,crf,psnr_db,size_bits,dropped\n";
  for (const TraceRow& r : trace) {
    out += std::to_string(r.frame);
    out += ',';
    out += format_fixed6(r.produced_t);
    out += ',';
    if (!r.dropped) out += format_fixed6(r.delivered_t);
    out += ',';
    if (!r.dropped) out += format_fixed6(r.latency_s);
    out += ',';
    out += std::to_string(r.crf);
    out += ',';
    out += format_psnr(r.psnr);
    out += ',';
    out += std::to_string(r.size_bits);
    out += ',';
    out += r.dropped ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string report_to_json(const StreamReport& r) {
  json j;
  j["produced_frames"] = r.produced_frames;
  j["delivered_frames"] = r.delivered_frames;
  j["dropped_frames"] = r.dropped_frames;
  j["peak_queue_bits"] = r.peak_queue_bits;
  if (r.delivered_frames > 0) {
    j["mean_latency_s"] = r.mean_latency_s;
    j["max_latency_s"] = r.max_latency_s;
    j["mean_crf_used"] = r.mean_crf_used;
    if (r.avg_psnr.value.is_infinite())
      j["avg_psnr_db"] = "inf";
    else
      j["avg_psnr_db"] = r.avg_psnr.value.db;
    j["excluded_infinite_psnr_frames"] = r.avg_psnr.excluded_frames;
  }
  if (r.achieved_accuracy_estimate)
    j["achieved_accuracy_estimate"] = *r.achieved_accuracy_estimate;
  return j.dump();
}

}  // namespace pdet
