#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "pdet/frame.hpp"

namespace pdet {

// PSNR in decibels. Identical frames produce the infinite sentinel, which
// compares greater than every finite value.
struct PsnrDb {
  double db = 0.0;

  static PsnrDb infinite() {
    return {std::numeric_limits<double>::infinity()};
  }
  bool is_infinite() const { return std::isinf(db); }

  auto operator<=>(const PsnrDb&) const = default;
};

struct AveragePsnr {
  PsnrDb value;
  size_t excluded_frames = 0;  // frames with infinite PSNR left out of the mean
};

struct BandwidthSample {
  uint64_t size_bits = 0;
  double duration_s = 0.0;
  double bandwidth_mbps = 0.0;  // (size_bits / 1e6) / duration_s
};

// Mean squared error over the full plane; frames must share dimensions.
double mse(const Frame& a, const Frame& b);

// 10 * log10(255^2 / MSE); infinite when MSE is zero.
PsnrDb psnr(const Frame& a, const Frame& b);

// Mean of the finite per-frame PSNRs. Frames with infinite PSNR are excluded
// from the mean and counted; if every frame is infinite the result is the
// infinite sentinel with zero exclusions.
AveragePsnr average_psnr(const VideoSequence& original,
                         const VideoSequence& reconstructed);

// Megabits per second where 1 Mbit = 10^6 bits. duration_s must be positive.
BandwidthSample required_bandwidth(uint64_t size_bits, double duration_s);

// Fixed 6-decimal notation; the infinite sentinel prints as "inf".
std::string format_psnr(PsnrDb v);
std::string format_fixed6(double v);

}  // namespace pdet
