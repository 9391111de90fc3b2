#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pdet/frame.hpp"

namespace pdet {

// Compression knob analogous to H.264 CRF: 0 is near-lossless, 51 coarsest.
struct QualityLevel {
  int crf = 0;
  bool operator==(const QualityLevel&) const = default;
};

// One encoded frame. The payload holds the entropy-coded block data only;
// size_bits() adds the 9-byte framing header (magic, dimensions, crf).
struct CompressedFrame {
  int width = 0;
  int height = 0;
  QualityLevel quality;
  std::string payload;

  static constexpr uint64_t kHeaderBits = 72;
  uint64_t size_bits() const { return kHeaderBits + 8ull * payload.size(); }

  bool operator==(const CompressedFrame&) const = default;
};

// Uniform quantizer step for zigzag coefficient index k at the given crf:
// max(1, round(base[k] * 2^((crf-18)/6))) with base ramping from 5 (DC) to 11
// (highest frequency). Step is 1 for every coefficient at crf 0 and is
// non-decreasing in crf. Throws Errc::domain outside crf [0,51] or k [0,63].
int quantizer_step(int crf, int coeff_index);

CompressedFrame encode_frame(const Frame& frame, QualityLevel q);
Frame decode_frame(const CompressedFrame& cf);

// Encodes every frame at one quality level; second element is the total
// serialized size in bits. Throws Errc::empty_input on an empty sequence.
std::pair<std::vector<CompressedFrame>, uint64_t> encode_sequence(
    const VideoSequence& seq, QualityLevel q);

// Byte framing: "BDC1", width u16be, height u16be, crf u8, then the payload.
// parse_frame reads one frame starting at offset and advances it past the
// frame; parse_stream consumes the whole buffer. Corruption, truncation and
// trailing garbage all raise Errc::bitstream.
std::string serialize_frame(const CompressedFrame& cf);
CompressedFrame parse_frame(std::string_view bytes, size_t& offset);
std::vector<CompressedFrame> parse_stream(std::string_view bytes);

}  // namespace pdet
