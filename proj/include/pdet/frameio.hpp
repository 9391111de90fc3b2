#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pdet/boxes.hpp"
#include "pdet/frame.hpp"

namespace pdet {

// Boxes attached to one frame index. Annotation files may omit conf
// (ground truth); detection files must carry it on every box.
struct FrameAnnotation {
  int frame_index = 0;
  std::vector<BoundingBox> boxes;
  bool operator==(const FrameAnnotation&) const = default;
};

// YUV4MPEG2 restricted to monochrome: header tokens W, H, F<num>:<den> and
// Cmono are honored, I/A/X are ignored, any other colorspace is rejected as
// unsupported. An empty sequence round-trips as W0 H0 with no FRAME markers.
VideoSequence read_y4m(std::string_view bytes);
std::string write_y4m(const VideoSequence& seq);

// Binary PGM (P5), maxval 255.
Frame read_pgm(std::string_view bytes);
std::string write_pgm(const Frame& frame);

// JSON Lines, one object per line: {"frame": n, "boxes": [{"x","y","w","h"
// [, "conf"]}]}. Frame indices must be unique and non-negative; extents
// positive; conf in [0,1]. Results are sorted by frame index.
std::vector<FrameAnnotation> read_annotations(std::string_view bytes);
std::vector<FrameAnnotation> read_detections(std::string_view bytes);
std::string write_annotations(const std::vector<FrameAnnotation>& annos);

// Whole-file helpers; failures raise Errc::config naming the path.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

}  // namespace pdet
