#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pdet/detector.hpp"
#include "pdet/frameio.hpp"
#include "pdet/metrics.hpp"

namespace pdet {

struct MatchedPair {
  int gt_index = 0;
  int det_index = 0;
  double iou = 0.0;
};

// Outcome of matching one frame. correct is the strict rule: no misses and
// no spurious boxes.
struct FrameVerdict {
  int frame_index = 0;
  std::vector<MatchedPair> matched_pairs;
  int false_negatives = 0;
  int false_positives = 0;
  bool correct = false;
};

struct AccuracyResult {
  int correct_frames = 0;
  int total_frames = 0;
  double accuracy_percent = 0.0;  // correct / total * 100
};

// One row of the rate/accuracy sweep.
struct SweepRecord {
  int crf = 0;
  PsnrDb avg_psnr;
  AccuracyResult accuracy;
  BandwidthSample bandwidth;
};

struct SweepOptions {
  double match_iou = 0.5;
  bool allow_fp = false;  // count frames with only false positives as correct
};

// Greedy one-to-one matching: detections in descending confidence order each
// claim the unmatched ground-truth box of highest IoU >= match_iou (ties go
// to the lower gt index). Detections must carry conf.
FrameVerdict match_frame(const std::vector<BoundingBox>& gt,
                         const std::vector<BoundingBox>& det,
                         double match_iou = 0.5, int frame_index = 0);

// Percentage of correct frames. allow_fp relaxes the rule to "no misses".
AccuracyResult accuracy(const std::vector<FrameVerdict>& verdicts,
                        bool allow_fp = false);

// Encodes the sequence at every grid level, decodes, measures PSNR and
// bandwidth, runs the detector on each frame and scores it against the
// annotations. The grid is sorted and deduplicated; annotations must cover
// every frame and stay inside its bounds.
std::vector<SweepRecord> run_sweep(const VideoSequence& seq,
                                   const std::vector<FrameAnnotation>& gt,
                                   const Detector& detector,
                                   std::vector<int> crf_grid,
                                   const SweepOptions& opts = {});

// Minimum-bandwidth record whose accuracy meets the floor; bandwidth ties go
// to the lower PSNR, then the lower crf. Throws Errc::infeasible (naming the
// best achievable accuracy) when no record qualifies.
SweepRecord find_threshold(const std::vector<SweepRecord>& records,
                           double accuracy_floor_percent);

// CSV with the fixed header crf,avg_psnr_db,accuracy_percent,correct_frames,
// total_frames,size_bits,duration_s,bandwidth_mbps. Reals use 6 decimals and
// infinite PSNR is the literal "inf". The reader re-derives accuracy and
// bandwidth from the integer fields and rejects rows that disagree.
std::string write_sweep_csv(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(std::string_view bytes);

}  // namespace pdet
