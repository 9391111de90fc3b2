#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pdet/frame.hpp"
#include "pdet/frameio.hpp"
#include "pdet/rng.hpp"

namespace testsupport {

// Camera-like texture: smooth illumination, a few soft blobs, mild sensor
// noise. Constants are tuned so the mid-crf encodes land in the PSNR band the
// rate/accuracy suites exercise.
inline pdet::Frame natural_frame(int w, int h, uint64_t seed) {
  pdet::SplitMix64 rng(pdet::derive_stream(seed, 0x7465787475726531ull,
                                           (uint64_t(w) << 32) | uint64_t(h)));
  double gx = rng.uniform(-30.0, 30.0);
  double gy = rng.uniform(-30.0, 30.0);
  double ph1 = rng.uniform(0.0, 6.283185307179586);
  double ph2 = rng.uniform(0.0, 6.283185307179586);
  double fx = rng.uniform(0.8, 1.6);
  double fy = rng.uniform(0.8, 1.6);

  struct Blob { double cx, cy, sigma, amp; };
  std::vector<Blob> blobs;
  int nb = 3 + int(rng.next() % 3);
  for (int i = 0; i < nb; ++i)
    blobs.push_back({rng.uniform(0.0, double(w)), rng.uniform(0.0, double(h)),
                     rng.uniform(6.0, 18.0), rng.uniform(-45.0, 45.0)});

  pdet::Frame f;
  f.width = w;
  f.height = h;
  f.pixels.resize(size_t(w) * size_t(h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double u = double(x) / double(w), v = double(y) / double(h);
      double val = 120.0 + gx * (u - 0.5) + gy * (v - 0.5) +
                   14.0 * std::cos(6.283185307179586 * fx * u + ph1) +
                   14.0 * std::cos(6.283185307179586 * fy * v + ph2);
      for (const Blob& b : blobs) {
        double dx = (x - b.cx) / b.sigma, dy = (y - b.cy) / b.sigma;
        val += b.amp * std::exp(-0.5 * (dx * dx + dy * dy));
      }
      val += rng.uniform(-1.2, 1.2);
      f.pixels[size_t(y) * w + x] =
          uint8_t(std::clamp(std::llround(val), 0ll, 255ll));
    }
  }
  return f;
}

inline pdet::VideoSequence natural_sequence(int w, int h, int n, uint64_t seed,
                                            pdet::Rational fps = {10, 1}) {
  pdet::VideoSequence seq;
  seq.fps = fps;
  for (int i = 0; i < n; ++i)
    seq.frames.push_back(natural_frame(w, h, seed + uint64_t(i)));
  return seq;
}

inline pdet::Frame noise_frame(int w, int h, uint64_t seed) {
  pdet::SplitMix64 rng(pdet::derive_stream(seed, 0x6e6f697365ull,
                                           (uint64_t(w) << 32) | uint64_t(h)));
  pdet::Frame f;
  f.width = w;
  f.height = h;
  f.pixels.resize(size_t(w) * size_t(h));
  for (auto& px : f.pixels) px = uint8_t(rng.next() & 0xff);
  return f;
}

// One pedestrian-sized box per frame, kept a couple of pixels inside the
// borders so jittered detections stay matchable.
inline std::vector<pdet::FrameAnnotation> walking_gt(int w, int h, int n,
                                                     uint64_t seed) {
  pdet::SplitMix64 rng(pdet::derive_stream(seed, 0x67745f626f786573ull, 0));
  std::vector<pdet::FrameAnnotation> annos;
  for (int i = 0; i < n; ++i) {
    pdet::BoundingBox b;
    b.w = 18.0;
    b.h = 36.0;
    b.x = rng.uniform(3.0, double(w) - b.w - 3.0);
    b.y = rng.uniform(3.0, double(h) - b.h - 3.0);
    annos.push_back({i, {b}});
  }
  return annos;
}

}  // namespace testsupport
