#include "pdet/frameio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pdet/error.hpp"

namespace pdet {

namespace {

using nlohmann::json;

bool parse_int(std::string_view s, int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string preview(std::string_view s, size_t n = 24) {
  std::string p(s.substr(0, n));
  for (char& c : p)
    if (!std::isprint(static_cast<unsigned char>(c))) c = '?';
  return p;
}

}  // namespace

VideoSequence read_y4m(std::string_view bytes) {
  size_t nl = bytes.find('\n');
  if (nl == std::string_view::npos)
    throw Error(Errc::truncated, "missing newline after stream header");
  std::string_view header = bytes.substr(0, nl);

  int64_t width = -1, height = -1, fnum = 0, fden = 0;
  bool mono = false;
  size_t pos = 0;
  bool first = true;
  while (pos <= header.size()) {
    size_t sp = header.find(' ', pos);
    std::string_view tok = header.substr(
        pos, sp == std::string_view::npos ? header.size() - pos : sp - pos);
    pos = sp == std::string_view::npos ? header.size() + 1 : sp + 1;
    if (tok.empty()) continue;
    if (first) {
      if (tok != "YUV4MPEG2")
        throw Error(Errc::format,
                    "expected YUV4MPEG2 signature, got '" + preview(tok) + "'");
      first = false;
      continue;
    }
    switch (tok[0]) {
      case 'W':
        if (!parse_int(tok.substr(1), width) || width < 0)
          throw Error(Errc::format, "bad width token '" + preview(tok) + "'");
        break;
      case 'H':
        if (!parse_int(tok.substr(1), height) || height < 0)
          throw Error(Errc::format, "bad height token '" + preview(tok) + "'");
        break;
      case 'F': {
        size_t colon = tok.find(':');
        if (colon == std::string_view::npos ||
            !parse_int(tok.substr(1, colon - 1), fnum) ||
            !parse_int(tok.substr(colon + 1), fden) || fnum < 1 || fden < 1)
          throw Error(Errc::format,
                      "bad frame rate token '" + preview(tok) + "'");
        break;
      }
      case 'C':
        if (tok.substr(1) != "mono")
          throw Error(Errc::unsupported,
                      "colorspace '" + preview(tok) + "' not supported, only Cmono");
        mono = true;
        break;
      case 'I':
      case 'A':
      case 'X':
        break;  // interlacing, aspect and extensions carry no luma information
      default:
        throw Error(Errc::format, "unknown header token '" + preview(tok) + "'");
    }
  }
  if (first) throw Error(Errc::format, "empty stream header");
  if (width < 0) throw Error(Errc::format, "header missing width");
  if (height < 0) throw Error(Errc::format, "header missing height");
  if (fnum == 0) throw Error(Errc::format, "header missing frame rate");
  if (!mono)
    throw Error(Errc::unsupported, "header missing Cmono colorspace tag");
  if (width > 65535 || height > 65535)
    throw Error(Errc::unsupported, "frame dimensions exceed 65535");

  VideoSequence seq;
  seq.fps = {fnum, fden};
  size_t off = nl + 1;
  size_t need = size_t(width) * size_t(height);
  while (off < bytes.size()) {
    size_t idx = seq.frames.size();
    if (bytes.substr(off, 5) != "FRAME")
      throw Error(Errc::format,
                  "expected FRAME marker before frame " + std::to_string(idx));
    size_t fnl = bytes.find('\n', off);
    if (fnl == std::string_view::npos)
      throw Error(Errc::truncated,
                  "missing newline after FRAME marker " + std::to_string(idx));
    if (width == 0 || height == 0)
      throw Error(Errc::format, "FRAME present in zero-dimension stream");
    off = fnl + 1;
    if (bytes.size() - off < need)
      throw Error(Errc::truncated,
                  "frame " + std::to_string(idx) + " payload truncated");
    Frame f;
    f.width = int(width);
    f.height = int(height);
    f.pixels.assign(bytes.begin() + off, bytes.begin() + off + need);
    seq.frames.push_back(std::move(f));
    off += need;
  }
  return seq;
}

std::string write_y4m(const VideoSequence& seq) {
  if (!seq.frames.empty()) validate(seq);
  if (seq.fps.num < 1 || seq.fps.den < 1)
    throw Error(Errc::domain, "frame rate must be positive");
  std::string out = "YUV4MPEG2 W" + std::to_string(seq.width()) + " H" +
                    std::to_string(seq.height()) + " F" +
                    std::to_string(seq.fps.num) + ":" +
                    std::to_string(seq.fps.den) + " Cmono\n";
  for (const Frame& f : seq.frames) {
    out += "FRAME\n";
    out.append(f.pixels.begin(), f.pixels.end());
  }
  return out;
}

namespace {

// PGM allows '#' comments and arbitrary whitespace between header tokens.
std::string_view next_pgm_token(std::string_view s, size_t& off) {
  while (off < s.size()) {
    char c = s[off];
    if (c == '#') {
      size_t nl = s.find('\n', off);
      if (nl == std::string_view::npos) {
        off = s.size();
        break;
      }
      off = nl + 1;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++off;
    } else {
      break;
    }
  }
  size_t start = off;
  while (off < s.size() &&
         !std::isspace(static_cast<unsigned char>(s[off])) && s[off] != '#')
    ++off;
  return s.substr(start, off - start);
}

}  // namespace

Frame read_pgm(std::string_view bytes) {
  size_t off = 0;
  std::string_view magic = next_pgm_token(bytes, off);
  if (magic == "P2")
    throw Error(Errc::unsupported, "ASCII PGM (P2) not supported, only P5");
  if (magic != "P5")
    throw Error(Errc::format, "not a PGM file (magic '" + preview(magic) + "')");

  int64_t w = 0, h = 0, maxval = 0;
  if (!parse_int(next_pgm_token(bytes, off), w) || w < 1)
    throw Error(Errc::format, "bad PGM width");
  if (!parse_int(next_pgm_token(bytes, off), h) || h < 1)
    throw Error(Errc::format, "bad PGM height");
  if (!parse_int(next_pgm_token(bytes, off), maxval))
    throw Error(Errc::format, "bad PGM maxval");
  if (maxval != 255)
    throw Error(Errc::unsupported,
                "PGM maxval " + std::to_string(maxval) + " not supported, only 255");
  if (off >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[off])))
    throw Error(Errc::format, "missing whitespace after PGM maxval");
  ++off;

  size_t need = size_t(w) * size_t(h);
  if (bytes.size() - off < need)
    throw Error(Errc::truncated, "PGM pixel data truncated");
  if (bytes.size() - off > need)
    throw Error(Errc::format, "trailing bytes after PGM pixel data");

  Frame f;
  f.width = int(w);
  f.height = int(h);
  f.pixels.assign(bytes.begin() + off, bytes.begin() + off + need);
  return f;
}

std::string write_pgm(const Frame& frame) {
  validate(frame);
  std::string out = "P5\n" + std::to_string(frame.width) + " " +
                    std::to_string(frame.height) + "\n255\n";
  out.append(frame.pixels.begin(), frame.pixels.end());
  return out;
}

namespace {

double require_number(const json& obj, const char* key, size_t lineno) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw Error(Errc::schema, "line " + std::to_string(lineno) +
                                  ": box field '" + key + "' must be a number");
  return obj[key].get<double>();
}

std::vector<FrameAnnotation> parse_jsonl(std::string_view bytes,
                                         bool require_conf) {
  std::vector<FrameAnnotation> out;
  size_t pos = 0, lineno = 0;
  while (pos <= bytes.size()) {
    size_t nl = bytes.find('\n', pos);
    std::string_view line = bytes.substr(
        pos, nl == std::string_view::npos ? bytes.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? bytes.size() + 1 : nl + 1;
    ++lineno;
    if (line.empty()) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::parse,
                  "line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object())
      throw Error(Errc::schema,
                  "line " + std::to_string(lineno) + ": expected an object");
    if (!j.contains("frame") || !j["frame"].is_number_integer() ||
        j["frame"].get<int64_t>() < 0)
      throw Error(Errc::schema, "line " + std::to_string(lineno) +
                                    ": 'frame' must be a non-negative integer");
    if (!j.contains("boxes") || !j["boxes"].is_array())
      throw Error(Errc::schema, "line " + std::to_string(lineno) +
                                    ": 'boxes' must be an array");

    FrameAnnotation a;
    a.frame_index = int(j["frame"].get<int64_t>());
    for (const json& jb : j["boxes"]) {
      if (!jb.is_object())
        throw Error(Errc::schema, "line " + std::to_string(lineno) +
                                      ": box entries must be objects");
      BoundingBox b;
      b.x = require_number(jb, "x", lineno);
      b.y = require_number(jb, "y", lineno);
      b.w = require_number(jb, "w", lineno);
      b.h = require_number(jb, "h", lineno);
      if (b.w <= 0.0 || b.h <= 0.0)
        throw Error(Errc::schema, "line " + std::to_string(lineno) +
                                      ": box extents must be positive");
      if (jb.contains("conf")) {
        if (!jb["conf"].is_number())
          throw Error(Errc::schema, "line " + std::to_string(lineno) +
                                        ": 'conf' must be a number");
        double c = jb["conf"].get<double>();
        if (c < 0.0 || c > 1.0)
          throw Error(Errc::schema, "line " + std::to_string(lineno) +
                                        ": 'conf' must be in [0, 1]");
        b.conf = c;
      } else if (require_conf) {
        throw Error(Errc::schema, "line " + std::to_string(lineno) +
                                      ": detection box missing 'conf'");
      }
      a.boxes.push_back(std::move(b));
    }
    out.push_back(std::move(a));
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const FrameAnnotation& l, const FrameAnnotation& r) {
                     return l.frame_index < r.frame_index;
                   });
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i].frame_index == out[i - 1].frame_index)
      throw Error(Errc::duplicate, "duplicate frame index " +
                                       std::to_string(out[i].frame_index));
  return out;
}

}  // namespace

std::vector<FrameAnnotation> read_annotations(std::string_view bytes) {
  return parse_jsonl(bytes, false);
}

std::vector<FrameAnnotation> read_detections(std::string_view bytes) {
  return parse_jsonl(bytes, true);
}

std::string write_annotations(const std::vector<FrameAnnotation>& annos) {
  std::string out;
  for (const FrameAnnotation& a : annos) {
    json boxes = json::array();
    for (const BoundingBox& b : a.boxes) {
      json jb{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
      if (b.conf) jb["conf"] = *b.conf;
      boxes.push_back(std::move(jb));
    }
    json j{{"frame", a.frame_index}, {"boxes", std::move(boxes)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::config, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof())
    throw Error(Errc::config, "read failed: " + path);
  return std::move(ss).str();
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::config, "cannot open file for writing: " + path);
  out.write(data.data(), std::streamsize(data.size()));
  if (!out) throw Error(Errc::config, "write failed: " + path);
}

}  // namespace pdet
