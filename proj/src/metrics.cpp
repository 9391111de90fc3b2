#include "pdet/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "pdet/error.hpp"

namespace pdet {

void validate(const Frame& f) {
  if (f.width <= 0 || f.height <= 0)
    throw Error(Errc::domain, "frame dimensions must be positive");
  if (f.pixels.size() != size_t(f.width) * size_t(f.height))
    throw Error(Errc::shape, "pixel buffer does not match frame dimensions");
}

void validate(const VideoSequence& s) {
  if (s.fps.num < 1 || s.fps.den < 1)
    throw Error(Errc::domain, "frame rate must be positive");
  for (const Frame& f : s.frames) {
    validate(f);
    if (f.width != s.width() || f.height != s.height())
      throw Error(Errc::shape, "frames in a sequence must share dimensions");
  }
}

double mse(const Frame& a, const Frame& b) {
  validate(a);
  validate(b);
  if (a.width != b.width || a.height != b.height)
    throw Error(Errc::shape, "MSE requires equal frame dimensions");
  uint64_t acc = 0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    int64_t d = int64_t(a.pixels[i]) - int64_t(b.pixels[i]);
    acc += uint64_t(d * d);
  }
  return double(acc) / double(a.pixels.size());
}

PsnrDb psnr(const Frame& a, const Frame& b) {
  double m = mse(a, b);
  if (m == 0.0) return PsnrDb::infinite();
  return {10.0 * std::log10(255.0 * 255.0 / m)};
}

AveragePsnr average_psnr(const VideoSequence& original,
                         const VideoSequence& reconstructed) {
  if (original.frames.size() != reconstructed.frames.size())
    throw Error(Errc::shape, "sequences differ in frame count");
  if (original.frames.empty())
    throw Error(Errc::empty_input, "average PSNR of an empty sequence");

  double sum = 0.0;
  size_t finite = 0, infinite = 0;
  for (size_t i = 0; i < original.frames.size(); ++i) {
    PsnrDb p = psnr(original.frames[i], reconstructed.frames[i]);
    if (p.is_infinite()) {
      ++infinite;
    } else {
      sum += p.db;
      ++finite;
    }
  }
  if (finite == 0) return {PsnrDb::infinite(), 0};
  return {{sum / double(finite)}, infinite};
}

BandwidthSample required_bandwidth(uint64_t size_bits, double duration_s) {
  if (!(duration_s > 0.0))
    throw Error(Errc::domain, "duration must be positive");
  return {size_bits, duration_s, (double(size_bits) / 1e6) / duration_s};
}

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string format_psnr(PsnrDb v) {
  return v.is_infinite() ? "inf" : format_fixed6(v.db);
}

}  // namespace pdet
