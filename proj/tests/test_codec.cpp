#include <algorithm>
#include <string>
#include <vector>

#include <doctest.h>

#include "pdet/codec.hpp"
#include "pdet/error.hpp"
#include "pdet/metrics.hpp"
#include "support/synthetic.hpp"

using namespace pdet;

namespace {

Frame constant_frame(int w, int h, uint8_t v) {
  Frame f;
  f.width = w;
  f.height = h;
  f.pixels.assign(size_t(w) * h, v);
  return f;
}

int max_abs_error(const Frame& a, const Frame& b) {
  int worst = 0;
  for (size_t i = 0; i < a.pixels.size(); ++i)
    worst = std::max(worst, std::abs(int(a.pixels[i]) - int(b.pixels[i])));
  return worst;
}

uint64_t median_bits(std::vector<uint64_t> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("quantizer_step: unity at crf 0, monotone in crf, DC finest") {
  for (int k = 0; k < 64; ++k) CHECK(quantizer_step(0, k) == 1);
  for (int k = 0; k < 64; ++k) {
    int prev = quantizer_step(0, k);
    for (int crf = 1; crf <= 51; ++crf) {
      int cur = quantizer_step(crf, k);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
  for (int crf = 0; crf <= 51; ++crf)
    CHECK(quantizer_step(crf, 0) <= quantizer_step(crf, 63));
}

TEST_CASE("quantizer_step: rejects out-of-range arguments") {
  CHECK_THROWS_WITH_AS(quantizer_step(-1, 0), doctest::Contains("domain"),
                       Error);
  CHECK_THROWS_WITH_AS(quantizer_step(52, 0), doctest::Contains("domain"),
                       Error);
  CHECK_THROWS_WITH_AS(quantizer_step(0, 64), doctest::Contains("domain"),
                       Error);
}

TEST_CASE("encode_frame: constant frame collapses to zero runs") {
  Frame f = constant_frame(64, 64, 128);
  for (int crf : {0, 20, 51}) {
    CompressedFrame cf = encode_frame(f, {crf});
    CHECK(cf.payload.size() < 200);  // raw plane is 4096 bytes
    Frame back = decode_frame(cf);
    CHECK(max_abs_error(f, back) <= 1);
  }
}

TEST_CASE("encode_frame: deterministic byte output") {
  Frame f = testsupport::natural_frame(40, 24, 9);
  CHECK(encode_frame(f, {30}).payload == encode_frame(f, {30}).payload);
}

TEST_CASE("encode_frame: coarser crf never inflates the corpus median") {
  std::vector<uint64_t> at10, at51;
  for (int i = 0; i < 100; ++i) {
    Frame f = testsupport::natural_frame(64, 64, 1000 + i);
    at10.push_back(encode_frame(f, {10}).size_bits());
    at51.push_back(encode_frame(f, {51}).size_bits());
  }
  CHECK(median_bits(at51) <= median_bits(at10));
}

TEST_CASE("decode(encode(f, crf 0)): max pixel error stays within 1") {
  for (int i = 0; i < 100; ++i) {
    Frame f = testsupport::noise_frame(64, 64, 4242 + i);
    CHECK(max_abs_error(f, decode_frame(encode_frame(f, {0}))) <= 1);
  }
}

TEST_CASE("decode_frame: odd dimensions survive the block padding") {
  for (auto [w, h] : {std::pair{1, 1}, {7, 3}, {17, 9}, {24, 31}}) {
    Frame f = testsupport::noise_frame(w, h, uint64_t(w * 100 + h));
    Frame back = decode_frame(encode_frame(f, {0}));
    CHECK(back.width == w);
    CHECK(back.height == h);
    CHECK(max_abs_error(f, back) <= 1);
  }
}

TEST_CASE("encode_sequence: additivity, determinism, rate ordering") {
  VideoSequence seq = testsupport::natural_sequence(32, 32, 10, 50);
  auto [frames, total] = encode_sequence(seq, {30});
  REQUIRE(frames.size() == 10);
  uint64_t sum = 0;
  for (const CompressedFrame& cf : frames) sum += cf.size_bits();
  CHECK(total == sum);

  VideoSequence same;
  same.fps = {10, 1};
  same.frames.assign(4, seq.frames[0]);
  auto [dup_frames, dup_total] = encode_sequence(same, {30});
  for (const CompressedFrame& cf : dup_frames)
    CHECK(cf.payload == dup_frames[0].payload);

  auto [f0, total0] = encode_sequence(seq, {0});
  CHECK(total < total0);

  VideoSequence empty;
  empty.fps = {10, 1};
  CHECK_THROWS_WITH_AS(encode_sequence(empty, {0}),
                       doctest::Contains("empty"), Error);
}

TEST_CASE("serialize_frame: exact framing bytes for a minimal frame") {
  // 1x1 constant 128: the single padded block is all zeros, one run byte.
  CompressedFrame cf = encode_frame(constant_frame(1, 1, 128), {0});
  std::string bytes = serialize_frame(cf);
  std::string expected = "BDC1";
  expected += '\x00';
  expected += '\x01';  // width 1, big-endian u16
  expected += '\x00';
  expected += '\x01';  // height 1
  expected += '\x00';  // crf 0
  expected += '\x40';  // zero-run of 64 as LEB128
  CHECK(bytes == expected);
  CHECK(cf.size_bits() == 72 + 8);
}

TEST_CASE("serialize/parse: streams of mixed frames round-trip") {
  std::vector<CompressedFrame> frames;
  std::string stream;
  for (int i = 0; i < 6; ++i) {
    Frame f = testsupport::natural_frame(20 + i * 3, 15 + i, 700 + i);
    frames.push_back(encode_frame(f, {i * 10}));
    stream += serialize_frame(frames.back());
  }
  std::vector<CompressedFrame> back = parse_stream(stream);
  REQUIRE(back.size() == frames.size());
  for (size_t i = 0; i < frames.size(); ++i) CHECK(back[i] == frames[i]);
}

TEST_CASE("parse_frame: corruption raises bitstream errors") {
  CompressedFrame cf = encode_frame(testsupport::noise_frame(16, 16, 3), {20});
  std::string good = serialize_frame(cf);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  size_t off = 0;
  CHECK_THROWS_WITH_AS(parse_frame(bad_magic, off),
                       doctest::Contains("bitstream"), Error);

  off = 0;
  CHECK_THROWS_WITH_AS(parse_frame(std::string_view(good).substr(0, 5), off),
                       doctest::Contains("bitstream"), Error);

  std::string truncated = good.substr(0, good.size() - 1);
  off = 0;
  CHECK_THROWS_WITH_AS(parse_frame(truncated, off),
                       doctest::Contains("bitstream"), Error);

  std::string bad_crf = good;
  bad_crf[8] = char(77);
  off = 0;
  CHECK_THROWS_WITH_AS(parse_frame(bad_crf, off),
                       doctest::Contains("crf"), Error);
}

TEST_CASE("decode_frame: trailing payload bytes are rejected") {
  CompressedFrame cf = encode_frame(constant_frame(8, 8, 128), {0});
  cf.payload += '\x00';
  CHECK_THROWS_WITH_AS(decode_frame(cf), doctest::Contains("trailing"), Error);
}

TEST_CASE("decode_frame: overlong zero run is rejected") {
  CompressedFrame cf;
  cf.width = 8;
  cf.height = 8;
  cf.quality = {0};
  cf.payload = "\x41";  // run of 65 in a 64-coefficient block
  CHECK_THROWS_WITH_AS(decode_frame(cf), doctest::Contains("run"), Error);
}

TEST_CASE("codec: rate and distortion move with crf on the corpus") {
  VideoSequence seq = testsupport::natural_sequence(48, 48, 20, 2200);
  uint64_t prev_bits = ~0ull;
  double prev_psnr = 1e9;
  for (int crf : {0, 10, 20, 30, 40, 51}) {
    auto [frames, bits] = encode_sequence(seq, {crf});
    VideoSequence rec;
    rec.fps = seq.fps;
    for (const CompressedFrame& cf : frames)
      rec.frames.push_back(decode_frame(cf));
    AveragePsnr ap = average_psnr(seq, rec);
    double db = ap.value.is_infinite() ? 1e9 : ap.value.db;
    CHECK(bits <= prev_bits);
    CHECK(db <= prev_psnr + 0.5);
    prev_bits = bits;
    prev_psnr = db;
  }
}
