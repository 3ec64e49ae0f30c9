#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "idpr/image.hpp"
#include "idpr/part_graph.hpp"

namespace idpr {

// One dataset record: a grayscale image plus, for positives, the annotated
// pose. Negatives (background-only images) have no pose.
struct AnnotatedImage {
  std::string id;
  std::string image_path;
  Image image;
  std::optional<Pose> pose;
  std::optional<std::array<double, 4>> torso_box;  // x0, y0, x1, y1
};

// Annotation files are JSONL: one object per line with fields `id`,
// `image_path` (relative paths resolve against the annotation file's
// directory), `joints` (array of [x, y] pairs, or null for negatives) and
// optional `torso_box` [x0, y0, x1, y1]. Malformed records raise
// line-numbered errors; records whose joints fall outside the image are
// excluded with a warning. expected_joints >= 0 enforces the joint count.
std::vector<AnnotatedImage> load_dataset(const std::string& annotation_path,
                                         int expected_joints = -1);

// Writes every image into image_dir as `<id><image_ext>` and the JSONL
// next to them at annotation_path, with image_path entries relative to the
// annotation file where possible.
void save_dataset(const std::vector<AnnotatedImage>& instances,
                  const std::string& annotation_path,
                  const std::string& image_dir,
                  const std::string& image_ext = ".png");

}  // namespace idpr
