#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pdet/boxes.hpp"
#include "pdet/frameio.hpp"
#include "pdet/metrics.hpp"

namespace pdet {

struct CurvePoint {
  double psnr_db = 0.0;
  double value = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

// Calibration data for the stochastic detector: frame-accuracy anchors over
// PSNR, optional false-positive rate anchors, coordinate jitter, and the seed
// every draw derives from. Between anchors both curves interpolate linearly
// and clamp at the ends.
struct DetectorProfile {
  std::vector<CurvePoint> curve;    // (psnr_db, accuracy %), psnr strictly increasing
  std::vector<CurvePoint> fp_rate;  // (psnr_db, expected FP boxes per frame)
  double jitter_px = 0.0;
  uint64_t seed = 42;

  double accuracy_at(PsnrDb p) const;
  double fp_rate_at(PsnrDb p) const;
};

// Throws Errc::schema when anchors are out of order or out of range.
void validate(const DetectorProfile& p);

// Built-in profiles "scenario1" and "scenario2"; anything else is a config
// error.
DetectorProfile scenario_profile(const std::string& name);

DetectorProfile profile_from_json(std::string_view bytes);
std::string profile_to_json(const DetectorProfile& p);

struct DetectionResult {
  int frame_index = 0;
  std::vector<BoundingBox> boxes;  // every box carries conf, NMS already applied
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual DetectionResult detect(int frame_index, PsnrDb psnr) const = 0;
};

// Replays detections loaded from a file; the PSNR argument is ignored and
// frames absent from the file produce empty results.
class FileDetector : public Detector {
 public:
  explicit FileDetector(const std::vector<FrameAnnotation>& detections);
  DetectionResult detect(int frame_index, PsnrDb psnr) const override;

 private:
  std::unordered_map<int, std::vector<BoundingBox>> by_frame_;
};

// Per-box emission probability p solving p^k * exp(-fp_rate) = target/100,
// i.e. the chance a frame with k boxes comes out fully correct matches the
// target. k == 0 returns 1. Throws Errc::infeasible when the target exceeds
// exp(-fp_rate), Errc::domain on out-of-range arguments.
double calibrate_miss_rate(double target_accuracy_percent, int boxes_per_frame,
                           double fp_rate);

// Stochastic stand-in for a detector running on decompressed frames: each
// ground-truth box is emitted independently with the calibrated probability,
// emitted boxes get jittered coordinates and a confidence in [0.7, 1.0], and
// Poisson-many false positives are placed disjoint from everything else.
// Draws depend only on (seed, frame_index, PSNR quantized to 0.1 dB).
class DegradationDetector : public Detector {
 public:
  DegradationDetector(DetectorProfile profile,
                      std::vector<FrameAnnotation> ground_truth,
                      int frame_width, int frame_height);
  DetectionResult detect(int frame_index, PsnrDb psnr) const override;

 private:
  DetectorProfile profile_;
  std::unordered_map<int, std::vector<BoundingBox>> gt_;
  int width_ = 0;
  int height_ = 0;
};

}  // namespace pdet
