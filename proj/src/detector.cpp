#include "pdet/detector.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "pdet/error.hpp"
#include "pdet/rng.hpp"

namespace pdet {

namespace {

using nlohmann::json;

double interpolate(const std::vector<CurvePoint>& pts, double psnr_db,
                   double empty_value) {
  if (pts.empty()) return empty_value;
  if (psnr_db <= pts.front().psnr_db) return pts.front().value;
  if (psnr_db >= pts.back().psnr_db) return pts.back().value;
  for (size_t i = 1; i < pts.size(); ++i) {
    if (psnr_db <= pts[i].psnr_db) {
      double t = (psnr_db - pts[i - 1].psnr_db) /
                 (pts[i].psnr_db - pts[i - 1].psnr_db);
      return pts[i - 1].value + t * (pts[i].value - pts[i - 1].value);
    }
  }
  return pts.back().value;
}

// Infinite PSNR sits past the last anchor, so clamping makes it the top value.
double curve_arg(PsnrDb p) {
  return p.is_infinite() ? std::numeric_limits<double>::max() : p.db;
}

// dB quantized to 0.1 so reproducibility survives tiny PSNR jitter.
uint64_t psnr_stream_key(PsnrDb p) {
  if (p.is_infinite()) return ~0ull;
  return uint64_t(std::llround(p.db * 10.0));
}

}  // namespace

double DetectorProfile::accuracy_at(PsnrDb p) const {
  return interpolate(curve, curve_arg(p), 100.0);
}

double DetectorProfile::fp_rate_at(PsnrDb p) const {
  return interpolate(fp_rate, curve_arg(p), 0.0);
}

void validate(const DetectorProfile& p) {
  if (p.curve.empty())
    throw Error(Errc::schema, "profile needs at least one accuracy anchor");
  for (size_t i = 0; i < p.curve.size(); ++i) {
    if (p.curve[i].value < 0.0 || p.curve[i].value > 100.0)
      throw Error(Errc::schema, "accuracy anchors must be in [0, 100]");
    if (i > 0 && p.curve[i].psnr_db <= p.curve[i - 1].psnr_db)
      throw Error(Errc::schema,
                  "accuracy anchors must have strictly increasing PSNR");
  }
  for (size_t i = 0; i < p.fp_rate.size(); ++i) {
    if (p.fp_rate[i].value < 0.0)
      throw Error(Errc::schema, "false-positive rates must be non-negative");
    if (i > 0 && p.fp_rate[i].psnr_db <= p.fp_rate[i - 1].psnr_db)
      throw Error(Errc::schema,
                  "false-positive anchors must have strictly increasing PSNR");
  }
  if (p.jitter_px < 0.0)
    throw Error(Errc::schema, "jitter must be non-negative");
}

DetectorProfile scenario_profile(const std::string& name) {
  DetectorProfile p;
  p.jitter_px = 2.0;
  if (name == "scenario1") {
    p.curve = {{30.0, 60.0}, {43.0, 98.0}, {56.0, 98.0}};
  } else if (name == "scenario2") {
    p.curve = {{30.0, 55.0}, {43.0, 98.0}, {56.0, 98.0}};
  } else {
    throw Error(Errc::config, "unknown scenario '" + name +
                                  "', expected scenario1 or scenario2");
  }
  return p;
}

DetectorProfile profile_from_json(std::string_view bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("profile: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::schema, "profile must be an object");

  auto read_curve = [&](const char* key) {
    std::vector<CurvePoint> pts;
    if (!j.contains(key)) return pts;
    if (!j[key].is_array())
      throw Error(Errc::schema, std::string("profile '") + key +
                                    "' must be an array");
    for (const json& jp : j[key]) {
      if (!jp.is_object() || !jp.contains("psnr_db") ||
          !jp["psnr_db"].is_number() || !jp.contains("value") ||
          !jp["value"].is_number())
        throw Error(Errc::schema, std::string("profile '") + key +
                                      "' entries need numeric psnr_db and value");
      pts.push_back({jp["psnr_db"].get<double>(), jp["value"].get<double>()});
    }
    return pts;
  };

  DetectorProfile p;
  p.curve = read_curve("curve");
  p.fp_rate = read_curve("fp_rate");
  if (j.contains("jitter_px")) {
    if (!j["jitter_px"].is_number())
      throw Error(Errc::schema, "profile 'jitter_px' must be a number");
    p.jitter_px = j["jitter_px"].get<double>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw Error(Errc::schema, "profile 'seed' must be an integer");
    p.seed = j["seed"].get<uint64_t>();
  }
  validate(p);
  return p;
}

std::string profile_to_json(const DetectorProfile& p) {
  auto dump_curve = [](const std::vector<CurvePoint>& pts) {
    json arr = json::array();
    for (const CurvePoint& c : pts)
      arr.push_back({{"psnr_db", c.psnr_db}, {"value", c.value}});
    return arr;
  };
  json j{{"curve", dump_curve(p.curve)},
         {"fp_rate", dump_curve(p.fp_rate)},
         {"jitter_px", p.jitter_px},
         {"seed", p.seed}};
  return j.dump();
}

FileDetector::FileDetector(const std::vector<FrameAnnotation>& detections) {
  for (const FrameAnnotation& a : detections)
    by_frame_[a.frame_index] = non_max_suppress(a.boxes, 0.6);
}

DetectionResult FileDetector::detect(int frame_index, PsnrDb) const {
  DetectionResult r;
  r.frame_index = frame_index;
  auto it = by_frame_.find(frame_index);
  if (it != by_frame_.end()) r.boxes = it->second;
  return r;
}

double calibrate_miss_rate(double target_accuracy_percent, int boxes_per_frame,
                           double fp_rate) {
  if (target_accuracy_percent < 0.0 || target_accuracy_percent > 100.0)
    throw Error(Errc::domain, "target accuracy must be in [0, 100]");
  if (boxes_per_frame < 0)
    throw Error(Errc::domain, "boxes per frame must be non-negative");
  if (fp_rate < 0.0)
    throw Error(Errc::domain, "false-positive rate must be non-negative");
  if (boxes_per_frame == 0) return 1.0;

  // P(correct) = p^k * P(no FP) = p^k * e^-fp, solve for p.
  double needed = (target_accuracy_percent / 100.0) * std::exp(fp_rate);
  if (needed > 1.0 + 1e-12)
    throw Error(Errc::infeasible,
                "target accuracy unreachable: even perfect boxes give " +
                    format_fixed6(std::exp(-fp_rate) * 100.0) + "%");
  return std::pow(std::min(needed, 1.0), 1.0 / double(boxes_per_frame));
}

DegradationDetector::DegradationDetector(
    DetectorProfile profile, std::vector<FrameAnnotation> ground_truth,
    int frame_width, int frame_height)
    : profile_(std::move(profile)), width_(frame_width), height_(frame_height) {
  validate(profile_);
  if (width_ <= 0 || height_ <= 0)
    throw Error(Errc::domain, "frame dimensions must be positive");
  for (FrameAnnotation& a : ground_truth)
    gt_[a.frame_index] = std::move(a.boxes);
}

DetectionResult DegradationDetector::detect(int frame_index,
                                            PsnrDb psnr) const {
  static const std::vector<BoundingBox> kNoBoxes;
  auto it = gt_.find(frame_index);
  const std::vector<BoundingBox>& gt = it == gt_.end() ? kNoBoxes : it->second;

  double target = profile_.accuracy_at(psnr);
  double fp_rate = profile_.fp_rate_at(psnr);
  double p = calibrate_miss_rate(target, int(gt.size()), fp_rate);

  SplitMix64 rng(derive_stream(profile_.seed, uint64_t(frame_index),
                               psnr_stream_key(psnr)));

  std::vector<BoundingBox> raw;
  for (const BoundingBox& g : gt) {
    if (rng.next_double() >= p) continue;
    double dx = rng.uniform(-profile_.jitter_px, profile_.jitter_px);
    double dy = rng.uniform(-profile_.jitter_px, profile_.jitter_px);
    BoundingBox b = g;
    b.x = std::clamp(g.x + dx, 0.0, double(width_) - b.w);
    b.y = std::clamp(g.y + dy, 0.0, double(height_) - b.h);
    b.conf = rng.uniform(0.7, 1.0);
    raw.push_back(std::move(b));
  }

  // False positives land disjoint from every real object and each other, so
  // they can never be mistaken for a correct detection downstream.
  int n_fp = rng.poisson(fp_rate);
  for (int i = 0; i < n_fp; ++i) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      double hi = std::max(9.0, std::min(width_, height_) / 4.0);
      BoundingBox b;
      b.w = rng.uniform(8.0, hi);
      b.h = rng.uniform(8.0, hi);
      b.w = std::min(b.w, double(width_));
      b.h = std::min(b.h, double(height_));
      b.x = rng.uniform(0.0, double(width_) - b.w);
      b.y = rng.uniform(0.0, double(height_) - b.h);
      bool clear = true;
      for (const BoundingBox& g : gt)
        if (iou(b, g) > 0.0) { clear = false; break; }
      if (clear)
        for (const BoundingBox& r : raw)
          if (iou(b, r) > 0.0) { clear = false; break; }
      if (!clear) continue;
      b.conf = rng.uniform(0.6, 0.9);
      raw.push_back(std::move(b));
      break;
    }
  }

  DetectionResult out;
  out.frame_index = frame_index;
  out.boxes = non_max_suppress(raw, 0.6);
  return out;
}

}  // namespace pdet
