#include "pdet/codec.hpp"

#include <algorithm>
#include <cmath>

#include "pdet/error.hpp"

namespace pdet {

namespace {

/*
 * Block transform coder, one 8x8 DCT per block like the intra path of the
 * mainstream video codecs:
 *
 *   level-shift (-128) -> 2-D DCT-II (orthonormal) -> uniform quantization
 *   with a frequency ramp scaled by 2^((crf-18)/6) -> zigzag scan ->
 *   (zero-run, level) pairs as LEB128 varints.
 *
 * Doubling the quantizer every 6 crf steps mirrors how CRF trades roughly
 * constant quality steps for rate.
 */

constexpr double kBasis[8][8] = {
    {0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738, 0.3535533905932738},
    {0.4903926402016152, 0.4157348061512726, 0.27778511650980114, 0.09754516100806417, -0.0975451610080641, -0.277785116509801, -0.4157348061512727, -0.4903926402016152},
    {0.46193976625564337, 0.19134171618254492, -0.19134171618254486, -0.46193976625564337, -0.4619397662556434, -0.19134171618254517, 0.191341716182545, 0.46193976625564326},
    {0.4157348061512726, -0.0975451610080641, -0.4903926402016152, -0.2777851165098011, 0.2777851165098009, 0.4903926402016152, 0.09754516100806439, -0.41573480615127256},
    {0.3535533905932738, -0.35355339059327373, -0.35355339059327384, 0.3535533905932737, 0.35355339059327384, -0.35355339059327334, -0.35355339059327356, 0.3535533905932733},
    {0.27778511650980114, -0.4903926402016152, 0.09754516100806415, 0.41573480615127273, -0.41573480615127256, -0.09754516100806401, 0.4903926402016153, -0.27778511650980076},
    {0.19134171618254492, -0.4619397662556434, 0.46193976625564326, -0.19134171618254495, -0.19134171618254528, 0.46193976625564337, -0.4619397662556432, 0.19134171618254478},
    {0.09754516100806417, -0.2777851165098011, 0.41573480615127273, -0.4903926402016153, 0.4903926402016152, -0.4157348061512725, 0.27778511650980076, -0.09754516100806429},
};

// kZigzag[k] is the raster index of the k-th coefficient along the scan.
constexpr int kZigzag[64] = {
    0,  1,  8,  16, 9,  2,  3,  10,
    17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
};

void append_uleb(std::string& out, uint64_t v) {
  while (v >= 0x80) {
    out.push_back(char(0x80 | (v & 0x7f)));
    v >>= 7;
  }
  out.push_back(char(v));
}

uint64_t read_uleb(std::string_view s, size_t& off) {
  uint64_t v = 0;
  int shift = 0;
  while (true) {
    if (off >= s.size())
      throw Error(Errc::bitstream, "payload ends inside a varint");
    uint8_t byte = uint8_t(s[off++]);
    if (shift >= 63 && byte > 1)
      throw Error(Errc::bitstream, "varint overflows 64 bits");
    v |= uint64_t(byte & 0x7f) << shift;
    if (!(byte & 0x80)) return v;
    shift += 7;
  }
}

// Signed values ride the unsigned varint via zigzag mapping.
void append_sleb(std::string& out, int64_t v) {
  append_uleb(out, (uint64_t(v) << 1) ^ uint64_t(v >> 63));
}

int64_t read_sleb(std::string_view s, size_t& off) {
  uint64_t u = read_uleb(s, off);
  return int64_t(u >> 1) ^ -int64_t(u & 1);
}

void build_steps(int crf, int steps[64]) {
  for (int k = 0; k < 64; ++k) steps[k] = quantizer_step(crf, k);
}

// Walks one block's (run, level) pairs. With `levels` null only the structure
// is checked, which is how frame boundaries are found in a concatenated
// stream.
void scan_block(std::string_view payload, size_t& off, int64_t* levels) {
  int pos = 0;
  while (pos < 64) {
    uint64_t run = read_uleb(payload, off);
    if (run > uint64_t(64 - pos))
      throw Error(Errc::bitstream, "zero run overflows the block");
    pos += int(run);
    if (pos == 64) break;
    int64_t level = read_sleb(payload, off);
    if (levels) levels[pos] = level;
    ++pos;
  }
}

}  // namespace

int quantizer_step(int crf, int coeff_index) {
  if (crf < 0 || crf > 51)
    throw Error(Errc::domain, "crf must be in [0, 51]");
  if (coeff_index < 0 || coeff_index > 63)
    throw Error(Errc::domain, "coefficient index must be in [0, 63]");
  // Ramp 5..11 across the scan keeps the DC finest; every base stays <= 11 so
  // the crf 0 scale of 2^-3 pins all steps to 1.
  int base = 5 + (6 * coeff_index + 31) / 63;
  double scaled = double(base) * std::exp2((crf - 18) / 6.0);
  return std::max(1, int(std::llround(scaled)));
}

CompressedFrame encode_frame(const Frame& frame, QualityLevel q) {
  validate(frame);
  if (frame.width > 65535 || frame.height > 65535)
    throw Error(Errc::domain, "frame dimensions exceed 65535");
  int steps[64];
  build_steps(q.crf, steps);

  int bw = (frame.width + 7) / 8;
  int bh = (frame.height + 7) / 8;
  CompressedFrame cf;
  cf.width = frame.width;
  cf.height = frame.height;
  cf.quality = q;

  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      // Load with edge replication so partial border blocks stay smooth.
      double block[8][8];
      for (int y = 0; y < 8; ++y) {
        int sy = std::min(by * 8 + y, frame.height - 1);
        for (int x = 0; x < 8; ++x) {
          int sx = std::min(bx * 8 + x, frame.width - 1);
          block[y][x] = double(frame.at(sx, sy)) - 128.0;
        }
      }

      // Separable forward transform: rows, then columns.
      double rows[8][8], coef[8][8];
      for (int y = 0; y < 8; ++y)
        for (int u = 0; u < 8; ++u) {
          double s = 0.0;
          for (int x = 0; x < 8; ++x) s += block[y][x] * kBasis[u][x];
          rows[y][u] = s;
        }
      for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
          double s = 0.0;
          for (int y = 0; y < 8; ++y) s += rows[y][u] * kBasis[v][y];
          coef[v][u] = s;
        }

      int64_t levels[64];
      for (int k = 0; k < 64; ++k) {
        int idx = kZigzag[k];
        levels[k] = std::llround(coef[idx / 8][idx % 8] / double(steps[k]));
      }

      int pos = 0;
      while (pos < 64) {
        int next = pos;
        while (next < 64 && levels[next] == 0) ++next;
        append_uleb(cf.payload, uint64_t(next - pos));
        if (next == 64) break;
        append_sleb(cf.payload, levels[next]);
        pos = next + 1;
      }
    }
  }
  return cf;
}

Frame decode_frame(const CompressedFrame& cf) {
  if (cf.width <= 0 || cf.height <= 0)
    throw Error(Errc::bitstream, "non-positive frame dimensions");
  if (cf.quality.crf < 0 || cf.quality.crf > 51)
    throw Error(Errc::bitstream, "crf out of range");
  int steps[64];
  build_steps(cf.quality.crf, steps);

  Frame out;
  out.width = cf.width;
  out.height = cf.height;
  out.pixels.assign(size_t(cf.width) * size_t(cf.height), 0);

  int bw = (cf.width + 7) / 8;
  int bh = (cf.height + 7) / 8;
  size_t off = 0;
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      int64_t levels[64] = {};
      scan_block(cf.payload, off, levels);

      double coef[8][8];
      for (int k = 0; k < 64; ++k) {
        int idx = kZigzag[k];
        coef[idx / 8][idx % 8] = double(levels[k]) * double(steps[k]);
      }

      // Separable inverse transform.
      double cols[8][8], block[8][8];
      for (int v = 0; v < 8; ++v)
        for (int x = 0; x < 8; ++x) {
          double s = 0.0;
          for (int u = 0; u < 8; ++u) s += coef[v][u] * kBasis[u][x];
          cols[v][x] = s;
        }
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          double s = 0.0;
          for (int v = 0; v < 8; ++v) s += cols[v][x] * kBasis[v][y];
          block[y][x] = s + 128.0;
        }

      for (int y = 0; y < 8; ++y) {
        int dy = by * 8 + y;
        if (dy >= cf.height) break;
        for (int x = 0; x < 8; ++x) {
          int dx = bx * 8 + x;
          if (dx >= cf.width) break;
          double v = block[y][x];
          uint8_t px = v <= 0.0   ? 0
                       : v >= 255.0 ? 255
                                    : uint8_t(std::llround(v));
          out.set(dx, dy, px);
        }
      }
    }
  }
  if (off != cf.payload.size())
    throw Error(Errc::bitstream, "trailing bytes after the last block");
  return out;
}

std::pair<std::vector<CompressedFrame>, uint64_t> encode_sequence(
    const VideoSequence& seq, QualityLevel q) {
  if (seq.frames.empty())
    throw Error(Errc::empty_input, "cannot encode an empty sequence");
  validate(seq);
  std::vector<CompressedFrame> frames;
  frames.reserve(seq.frames.size());
  uint64_t total = 0;
  for (const Frame& f : seq.frames) {
    frames.push_back(encode_frame(f, q));
    total += frames.back().size_bits();
  }
  return {std::move(frames), total};
}

std::string serialize_frame(const CompressedFrame& cf) {
  if (cf.width < 1 || cf.width > 65535 || cf.height < 1 || cf.height > 65535)
    throw Error(Errc::domain, "frame dimensions must fit in u16");
  if (cf.quality.crf < 0 || cf.quality.crf > 51)
    throw Error(Errc::domain, "crf must be in [0, 51]");
  std::string out = "BDC1";
  out.push_back(char(cf.width >> 8));
  out.push_back(char(cf.width & 0xff));
  out.push_back(char(cf.height >> 8));
  out.push_back(char(cf.height & 0xff));
  out.push_back(char(cf.quality.crf));
  out += cf.payload;
  return out;
}

CompressedFrame parse_frame(std::string_view bytes, size_t& offset) {
  if (offset > bytes.size() || bytes.size() - offset < 9)
    throw Error(Errc::bitstream, "truncated frame header");
  if (bytes.substr(offset, 4) != "BDC1")
    throw Error(Errc::bitstream, "bad magic, expected BDC1");
  auto u8 = [&](size_t i) { return uint32_t(uint8_t(bytes[offset + i])); };
  CompressedFrame cf;
  cf.width = int((u8(4) << 8) | u8(5));
  cf.height = int((u8(6) << 8) | u8(7));
  cf.quality.crf = int(u8(8));
  if (cf.width == 0 || cf.height == 0)
    throw Error(Errc::bitstream, "zero frame dimensions");
  if (cf.quality.crf > 51) throw Error(Errc::bitstream, "crf out of range");
  offset += 9;

  // The payload has no length field; walk the block structure to find its end.
  size_t blocks = size_t((cf.width + 7) / 8) * size_t((cf.height + 7) / 8);
  std::string_view rest = bytes.substr(offset);
  size_t end = 0;
  for (size_t b = 0; b < blocks; ++b) scan_block(rest, end, nullptr);
  cf.payload.assign(rest.substr(0, end));
  offset += end;
  return cf;
}

std::vector<CompressedFrame> parse_stream(std::string_view bytes) {
  std::vector<CompressedFrame> frames;
  size_t offset = 0;
  while (offset < bytes.size()) frames.push_back(parse_frame(bytes, offset));
  return frames;
}

}  // namespace pdet
