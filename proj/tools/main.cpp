#include <algorithm>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdet/codec.hpp"
#include "pdet/detector.hpp"
#include "pdet/error.hpp"
#include "pdet/eval.hpp"
#include "pdet/frameio.hpp"
#include "pdet/link.hpp"
#include "pdet/metrics.hpp"

namespace {

using nlohmann::json;
using namespace pdet;

constexpr const char* kDefaultGrid = "0,10,20,30,33,35,37,40,50,51";

std::vector<int> parse_grid(const std::string& grid) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos <= grid.size()) {
    size_t c = grid.find(',', pos);
    std::string tok =
        grid.substr(pos, c == std::string::npos ? grid.size() - pos : c - pos);
    pos = c == std::string::npos ? grid.size() + 1 : c + 1;
    if (tok.empty())
      throw Error(Errc::config, "empty entry in quality grid");
    try {
      size_t used = 0;
      int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(Errc::config, "bad quality grid entry '" + tok + "'");
    }
  }
  return out;
}

ControllerPolicy parse_policy(const std::string& text, int step_up,
                              int step_down) {
  size_t colon = text.find(':');
  std::string kind = text.substr(0, colon);
  std::string arg =
      colon == std::string::npos ? std::string() : text.substr(colon + 1);
  try {
    if (kind == "fixed") {
      size_t used = 0;
      int crf = std::stoi(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return ControllerPolicy::fixed(crf);
    }
    if (kind == "adaptive") {
      size_t used = 0;
      double floor = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return ControllerPolicy::adaptive(floor, step_up, step_down);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(Errc::config, "bad policy argument '" + arg + "'");
  }
  throw Error(Errc::config,
              "policy must be fixed:<crf> or adaptive:<floor_db>, got '" +
                  text + "'");
}

json psnr_json(PsnrDb p) {
  if (p.is_infinite()) return "inf";
  return p.db;
}

struct CompressArgs {
  std::string in, out, decoded;
  int crf = 0;
};

int cmd_compress(const CompressArgs& a) {
  VideoSequence seq = read_y4m(read_file(a.in));
  if (a.crf < 0 || a.crf > 51)
    throw Error(Errc::domain, "crf must be in [0, 51]");

  auto [frames, total_bits] = encode_sequence(seq, {a.crf});
  std::string stream;
  for (const CompressedFrame& cf : frames) stream += serialize_frame(cf);
  write_file(a.out, stream);

  VideoSequence recon;
  recon.fps = seq.fps;
  for (const CompressedFrame& cf : frames)
    recon.frames.push_back(decode_frame(cf));
  if (!a.decoded.empty()) write_file(a.decoded, write_y4m(recon));

  AveragePsnr ap = average_psnr(seq, recon);
  BandwidthSample bw = required_bandwidth(total_bits, seq.duration_s());

  json j{{"avg_psnr_db", psnr_json(ap.value)},
         {"bandwidth_mbps", bw.bandwidth_mbps},
         {"size_bits", total_bits}};
  std::printf("%s\n", j.dump().c_str());
  return 0;
}

struct SweepArgs {
  std::string in, gt, detections, profile, scenario, out, grid = kDefaultGrid;
  bool allow_fp = false;
  uint64_t seed = 42;
  bool seed_given = false;
};

int cmd_sweep(const SweepArgs& a) {
  int sources = int(!a.detections.empty()) + int(!a.profile.empty()) +
                int(!a.scenario.empty());
  if (sources != 1)
    throw Error(Errc::config,
                "exactly one of --detections, --profile, --scenario required");

  VideoSequence seq = read_y4m(read_file(a.in));
  std::vector<FrameAnnotation> gt = read_annotations(read_file(a.gt));
  std::vector<int> grid = parse_grid(a.grid);
  std::vector<int> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    std::fprintf(stderr, "warning: duplicate grid entries removed\n");

  std::unique_ptr<Detector> det;
  if (!a.detections.empty()) {
    det = std::make_unique<FileDetector>(read_detections(read_file(a.detections)));
  } else {
    DetectorProfile prof = a.profile.empty()
                               ? scenario_profile(a.scenario)
                               : profile_from_json(read_file(a.profile));
    if (a.seed_given) prof.seed = a.seed;
    det = std::make_unique<DegradationDetector>(std::move(prof), gt,
                                                seq.width(), seq.height());
  }

  SweepOptions opts;
  opts.allow_fp = a.allow_fp;
  std::vector<SweepRecord> records = run_sweep(seq, gt, *det, grid, opts);
  write_file(a.out, write_sweep_csv(records));

  for (const SweepRecord& r : records)
    std::printf("crf %d: psnr %s dB, accuracy %.2f%% (%d/%d), bandwidth %s Mbit/s\n",
                r.crf, format_psnr(r.avg_psnr).c_str(),
                r.accuracy.accuracy_percent, r.accuracy.correct_frames,
                r.accuracy.total_frames,
                format_fixed6(r.bandwidth.bandwidth_mbps).c_str());
  return 0;
}

struct ThresholdArgs {
  std::string sweep;
  double floor = 0.0;
};

int cmd_threshold(const ThresholdArgs& a) {
  std::vector<SweepRecord> records = read_sweep_csv(read_file(a.sweep));
  if (a.floor < 0.0 || a.floor > 100.0)
    throw Error(Errc::domain, "accuracy floor must be in [0, 100]");
  SweepRecord pick = find_threshold(records, a.floor);

  double max_bw = 0.0;
  for (const SweepRecord& r : records)
    max_bw = std::max(max_bw, r.bandwidth.bandwidth_mbps);

  json j{{"crf", pick.crf},
         {"avg_psnr_db", psnr_json(pick.avg_psnr)},
         {"accuracy_percent", pick.accuracy.accuracy_percent},
         {"correct_frames", pick.accuracy.correct_frames},
         {"total_frames", pick.accuracy.total_frames},
         {"size_bits", pick.bandwidth.size_bits},
         {"duration_s", pick.bandwidth.duration_s},
         {"bandwidth_mbps", pick.bandwidth.bandwidth_mbps},
         {"reduction_vs_max_bandwidth",
          max_bw / pick.bandwidth.bandwidth_mbps}};
  std::printf("%s\n", j.dump().c_str());
  return 0;
}

struct StreamArgs {
  std::string in, policy, trace, profile, scenario;
  double capacity_mbps = 0.0;
  double budget_s = 0.0;
  uint64_t queue_limit_bits = 0;
  bool queue_limit_given = false;
  int step_up = 3, step_down = 3;
  uint64_t seed = 42;
  bool seed_given = false;
};

int cmd_stream(const StreamArgs& a) {
  if (!a.profile.empty() && !a.scenario.empty())
    throw Error(Errc::config, "--profile and --scenario are exclusive");

  VideoSequence seq = read_y4m(read_file(a.in));

  LinkConfig cfg;
  cfg.capacity_mbps = a.capacity_mbps;
  cfg.fps = seq.fps.num >= 1 ? seq.fps : Rational{10, 1};
  cfg.latency_budget_s = a.budget_s;
  if (a.queue_limit_given) cfg.queue_limit_bits = a.queue_limit_bits;

  ControllerPolicy policy = parse_policy(a.policy, a.step_up, a.step_down);

  DetectorProfile prof;
  bool have_prof = false;
  if (!a.profile.empty()) {
    prof = profile_from_json(read_file(a.profile));
    have_prof = true;
  } else if (!a.scenario.empty()) {
    prof = scenario_profile(a.scenario);
    have_prof = true;
  }
  if (have_prof && a.seed_given) prof.seed = a.seed;

  StreamReport rep =
      simulate_stream(seq, cfg, policy, have_prof ? &prof : nullptr);
  if (!a.trace.empty()) write_file(a.trace, write_trace_csv(rep.trace));
  std::printf("%s\n", report_to_json(rep).c_str());
  return 0;
}

int exit_code_for(Errc c) {
  return c == Errc::empty_input || c == Errc::infeasible ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lossy-compression / detection-accuracy trade-off toolkit"};
  app.require_subcommand(1);
  uint64_t seed = 42;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "Seed for stochastic detectors");

  CompressArgs ca;
  CLI::App* compress =
      app.add_subcommand("compress", "Encode a video at one quality level");
  compress->fallthrough();
  compress->add_option("--in", ca.in, "Input .y4m video")->required();
  compress->add_option("--crf", ca.crf, "Quality level, 0 (finest) to 51")
      ->required();
  compress->add_option("--out", ca.out, "Output bitstream path")->required();
  compress->add_option("--decoded", ca.decoded,
                       "Also write the decoded video (.y4m)");

  SweepArgs sa;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Measure PSNR, accuracy and bandwidth across quality levels");
  sweep->fallthrough();
  sweep->add_option("--in", sa.in, "Input .y4m video")->required();
  sweep->add_option("--gt", sa.gt, "Ground-truth boxes (JSONL)")->required();
  sweep->add_option("--detections", sa.detections,
                    "Replay detections from a JSONL file");
  sweep->add_option("--profile", sa.profile,
                    "Stochastic detector profile (JSON file)");
  sweep->add_option("--scenario", sa.scenario,
                    "Built-in profile: scenario1 or scenario2");
  sweep->add_option("--grid", sa.grid, "Comma-separated crf levels");
  sweep->add_option("--out", sa.out, "Output CSV path")->required();
  sweep->add_flag("--allow-fp", sa.allow_fp,
                  "Count frames with only false positives as correct");

  ThresholdArgs ta;
  CLI::App* threshold = app.add_subcommand(
      "threshold", "Pick the cheapest level meeting an accuracy floor");
  threshold->fallthrough();
  threshold->add_option("--sweep", ta.sweep, "Sweep CSV path")->required();
  threshold->add_option("--floor", ta.floor, "Accuracy floor in percent")
      ->required();

  StreamArgs sta;
  CLI::App* stream = app.add_subcommand(
      "stream", "Simulate the camera-to-edge link with quality control");
  stream->fallthrough();
  stream->add_option("--in", sta.in, "Input .y4m video")->required();
  stream->add_option("--capacity-mbps", sta.capacity_mbps,
                     "Link capacity in Mbit/s")->required();
  stream->add_option("--policy", sta.policy,
                     "fixed:<crf> or adaptive:<psnr_floor_db>")->required();
  stream->add_option("--budget-s", sta.budget_s, "Latency budget in seconds")
      ->required();
  stream->add_option("--trace", sta.trace, "Write the per-frame trace CSV");
  CLI::Option* ql = stream->add_option("--queue-limit-bits",
                                       sta.queue_limit_bits,
                                       "Drop frames when the backlog exceeds this");
  stream->add_option("--step-up", sta.step_up,
                     "Adaptive: crf increase after a late frame");
  stream->add_option("--step-down", sta.step_down,
                     "Adaptive: crf decrease after a fast frame");
  stream->add_option("--profile", sta.profile,
                     "Profile for the accuracy estimate (JSON file)");
  stream->add_option("--scenario", sta.scenario,
                     "Built-in profile: scenario1 or scenario2");

  try {
    app.parse(argc, argv);
    bool seed_given = seed_opt->count() > 0;
    if (app.got_subcommand(compress)) return cmd_compress(ca);
    if (app.got_subcommand(sweep)) {
      sa.seed = seed;
      sa.seed_given = seed_given;
      return cmd_sweep(sa);
    }
    if (app.got_subcommand(threshold)) return cmd_threshold(ta);
    if (app.got_subcommand(stream)) {
      sta.seed = seed;
      sta.seed_given = seed_given;
      sta.queue_limit_given = ql->count() > 0;
      return cmd_stream(sta);
    }
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const pdet::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
