#pragma once

#include <cstdint>
#include <vector>

namespace pdet {

// Single 8-bit luma plane, row-major.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // size == width * height

  uint8_t at(int x, int y) const { return pixels[size_t(y) * width + x]; }
  void set(int x, int y, uint8_t v) { pixels[size_t(y) * width + x] = v; }

  bool operator==(const Frame&) const = default;
};

// Exact frame rate as written in stream headers, e.g. F30000:1001.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  double as_double() const { return double(num) / double(den); }
  bool operator==(const Rational&) const = default;
};

struct VideoSequence {
  std::vector<Frame> frames;  // all frames share identical dimensions
  Rational fps{0, 1};

  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  double duration_s() const {
    return double(frames.size()) * double(fps.den) / double(fps.num);
  }

  bool operator==(const VideoSequence&) const = default;
};

// Throw Errc::domain / Errc::shape when the structural invariants are broken.
void validate(const Frame& f);
void validate(const VideoSequence& s);

}  // namespace pdet
