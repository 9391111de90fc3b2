#include "pdet/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "pdet/codec.hpp"
#include "pdet/error.hpp"

namespace pdet {

FrameVerdict match_frame(const std::vector<BoundingBox>& gt,
                         const std::vector<BoundingBox>& det,
                         double match_iou, int frame_index) {
  if (match_iou <= 0.0 || match_iou > 1.0)
    throw Error(Errc::domain, "match threshold must be in (0, 1]");
  for (const BoundingBox& d : det)
    if (!d.conf)
      throw Error(Errc::contract, "detection box lacks confidence");

  FrameVerdict v;
  v.frame_index = frame_index;

  std::vector<size_t> order(det.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t l, size_t r) {
    return *det[l].conf > *det[r].conf;
  });

  std::vector<bool> gt_taken(gt.size(), false);
  for (size_t d : order) {
    int best = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < gt.size(); ++g) {
      if (gt_taken[g]) continue;
      double ov = iou(det[d], gt[g]);
      if (ov >= match_iou && ov > best_iou) {
        best = int(g);
        best_iou = ov;
      }
    }
    if (best >= 0) {
      gt_taken[best] = true;
      v.matched_pairs.push_back({best, int(d), best_iou});
    }
  }

  v.false_negatives = int(gt.size()) - int(v.matched_pairs.size());
  v.false_positives = int(det.size()) - int(v.matched_pairs.size());
  v.correct = v.false_negatives == 0 && v.false_positives == 0;
  return v;
}

AccuracyResult accuracy(const std::vector<FrameVerdict>& verdicts,
                        bool allow_fp) {
  if (verdicts.empty())
    throw Error(Errc::empty_input, "accuracy over zero frames");
  AccuracyResult r;
  r.total_frames = int(verdicts.size());
  for (const FrameVerdict& v : verdicts) {
    bool ok = allow_fp ? v.false_negatives == 0 : v.correct;
    if (ok) ++r.correct_frames;
  }
  r.accuracy_percent = double(r.correct_frames) / double(r.total_frames) * 100.0;
  return r;
}

std::vector<SweepRecord> run_sweep(const VideoSequence& seq,
                                   const std::vector<FrameAnnotation>& gt,
                                   const Detector& detector,
                                   std::vector<int> crf_grid,
                                   const SweepOptions& opts) {
  if (seq.frames.empty())
    throw Error(Errc::empty_input, "cannot sweep an empty sequence");
  validate(seq);
  if (crf_grid.empty())
    throw Error(Errc::empty_input, "quality grid is empty");
  for (int crf : crf_grid)
    if (crf < 0 || crf > 51)
      throw Error(Errc::domain, "crf must be in [0, 51]");
  std::sort(crf_grid.begin(), crf_grid.end());
  crf_grid.erase(std::unique(crf_grid.begin(), crf_grid.end()),
                 crf_grid.end());

  std::unordered_map<int, const std::vector<BoundingBox>*> gt_by_frame;
  for (const FrameAnnotation& a : gt) {
    for (const BoundingBox& b : a.boxes)
      if (b.x < 0.0 || b.y < 0.0 || b.x + b.w > double(seq.width()) ||
          b.y + b.h > double(seq.height()))
        throw Error(Errc::schema, "annotation box leaves frame " +
                                      std::to_string(a.frame_index));
    gt_by_frame[a.frame_index] = &a.boxes;
  }
  for (size_t i = 0; i < seq.frames.size(); ++i)
    if (!gt_by_frame.count(int(i)))
      throw Error(Errc::coverage,
                  "annotations missing frame " + std::to_string(i));

  std::vector<SweepRecord> records;
  for (int crf : crf_grid) {
    auto [frames, total_bits] = encode_sequence(seq, {crf});
    VideoSequence recon;
    recon.fps = seq.fps;
    recon.frames.reserve(frames.size());
    for (const CompressedFrame& cf : frames)
      recon.frames.push_back(decode_frame(cf));

    AveragePsnr ap = average_psnr(seq, recon);

    std::vector<FrameVerdict> verdicts;
    verdicts.reserve(seq.frames.size());
    for (size_t i = 0; i < seq.frames.size(); ++i) {
      DetectionResult det = detector.detect(int(i), ap.value);
      verdicts.push_back(match_frame(*gt_by_frame[int(i)], det.boxes,
                                     opts.match_iou, int(i)));
    }

    SweepRecord rec;
    rec.crf = crf;
    rec.avg_psnr = ap.value;
    rec.accuracy = accuracy(verdicts, opts.allow_fp);
    rec.bandwidth = required_bandwidth(total_bits, seq.duration_s());
    records.push_back(std::move(rec));
  }
  return records;
}

SweepRecord find_threshold(const std::vector<SweepRecord>& records,
                           double accuracy_floor_percent) {
  if (records.empty())
    throw Error(Errc::empty_input, "no sweep records to select from");

  const SweepRecord* best = nullptr;
  for (const SweepRecord& r : records) {
    if (r.accuracy.accuracy_percent < accuracy_floor_percent) continue;
    if (!best || r.bandwidth.bandwidth_mbps < best->bandwidth.bandwidth_mbps ||
        (r.bandwidth.bandwidth_mbps == best->bandwidth.bandwidth_mbps &&
         (r.avg_psnr < best->avg_psnr ||
          (r.avg_psnr == best->avg_psnr && r.crf < best->crf))))
      best = &r;
  }
  if (!best) {
    double top = 0.0;
    for (const SweepRecord& r : records)
      top = std::max(top, r.accuracy.accuracy_percent);
    throw Error(Errc::infeasible,
                "no quality level reaches " +
                    format_fixed6(accuracy_floor_percent) +
                    "% accuracy, best achievable is " + format_fixed6(top) + "%");
  }
  return *best;
}

namespace {

constexpr const char* kSweepHeader =
    "crf,avg_psnr_db,accuracy_percent,correct_frames,total_frames,size_bits,"
    "duration_s,bandwidth_mbps";

double parse_csv_double(std::string_view s, const char* field) {
  // from_chars(double) is still missing in some libstdc++ versions.
  std::string tmp(s);
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw Error(Errc::parse, std::string("bad number in CSV field ") + field);
  return v;
}

int64_t parse_csv_int(std::string_view s, const char* field) {
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Errc::parse, std::string("bad integer in CSV field ") + field);
  return v;
}

}  // namespace

std::string write_sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = kSweepHeader;
  out += '\n';
  for (const SweepRecord& r : records) {
    out += std::to_string(r.crf);
    out += ',';
    out += format_psnr(r.avg_psnr);
    out += ',';
    out += format_fixed6(r.accuracy.accuracy_percent);
    out += ',';
    out += std::to_string(r.accuracy.correct_frames);
    out += ',';
    out += std::to_string(r.accuracy.total_frames);
    out += ',';
    out += std::to_string(r.bandwidth.size_bits);
    out += ',';
    out += format_fixed6(r.bandwidth.duration_s);
    out += ',';
    out += format_fixed6(r.bandwidth.bandwidth_mbps);
    out += '\n';
  }
  return out;
}

std::vector<SweepRecord> read_sweep_csv(std::string_view bytes) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos < bytes.size()) {
    size_t nl = bytes.find('\n', pos);
    std::string_view line = bytes.substr(
        pos, nl == std::string_view::npos ? bytes.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? bytes.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error(Errc::empty_input, "empty sweep CSV");
  if (lines[0] != kSweepHeader)
    throw Error(Errc::format, "unexpected sweep CSV header");

  std::vector<SweepRecord> records;
  for (size_t li = 1; li < lines.size(); ++li) {
    std::vector<std::string_view> fields;
    std::string_view line = lines[li];
    size_t f = 0;
    while (true) {
      size_t c = line.find(',', f);
      if (c == std::string_view::npos) {
        fields.push_back(line.substr(f));
        break;
      }
      fields.push_back(line.substr(f, c - f));
      f = c + 1;
    }
    if (fields.size() != 8)
      throw Error(Errc::format, "sweep CSV row " + std::to_string(li) +
                                    " has " + std::to_string(fields.size()) +
                                    " fields, expected 8");

    SweepRecord r;
    int64_t crf = parse_csv_int(fields[0], "crf");
    if (crf < 0 || crf > 51)
      throw Error(Errc::schema, "crf out of range in sweep CSV");
    r.crf = int(crf);
    r.avg_psnr = fields[1] == "inf"
                     ? PsnrDb::infinite()
                     : PsnrDb{parse_csv_double(fields[1], "avg_psnr_db")};
    double acc = parse_csv_double(fields[2], "accuracy_percent");
    int64_t correct = parse_csv_int(fields[3], "correct_frames");
    int64_t total = parse_csv_int(fields[4], "total_frames");
    if (total < 1 || correct < 0 || correct > total)
      throw Error(Errc::schema, "bad frame counts in sweep CSV");
    r.accuracy.correct_frames = int(correct);
    r.accuracy.total_frames = int(total);
    // The ratio fields are authoritative; the printed reals just need to agree.
    r.accuracy.accuracy_percent = double(correct) / double(total) * 100.0;
    if (std::abs(acc - r.accuracy.accuracy_percent) > 1e-4)
      throw Error(Errc::schema, "accuracy_percent disagrees with frame counts");
    int64_t bits = parse_csv_int(fields[5], "size_bits");
    if (bits < 0) throw Error(Errc::schema, "negative size_bits in sweep CSV");
    double dur = parse_csv_double(fields[6], "duration_s");
    if (!(dur > 0.0))
      throw Error(Errc::schema, "duration must be positive in sweep CSV");
    double bw = parse_csv_double(fields[7], "bandwidth_mbps");
    r.bandwidth = required_bandwidth(uint64_t(bits), dur);
    // duration_s lost up to half an ulp of its 6 printed decimals, which
    // inflates the re-derived bandwidth proportionally.
    double tol = r.bandwidth.bandwidth_mbps * (1e-6 / dur) + 1e-6;
    if (std::abs(bw - r.bandwidth.bandwidth_mbps) > tol)
      throw Error(Errc::schema, "bandwidth_mbps disagrees with size/duration");
    records.push_back(r);
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const SweepRecord& l, const SweepRecord& r) {
                     return l.crf < r.crf;
                   });
  for (size_t i = 1; i < records.size(); ++i)
    if (records[i].crf == records[i - 1].crf)
      throw Error(Errc::duplicate, "duplicate crf " +
                                       std::to_string(records[i].crf) +
                                       " in sweep CSV");
  return records;
}

}  // namespace pdet
