#include "idpr/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "idpr/error.hpp"
#include "idpr/image_io.hpp"

namespace idpr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void record_error(const std::string& path, int line,
                               const std::string& what) {
  throw DataError(path + ":" + std::to_string(line) + ": " + what);
}

bool joints_in_bounds(const Pose& pose, const Image& image) {
  for (const Vec2& j : pose.joints) {
    if (!j.finite() || j.x < 0.0 || j.x >= image.width() || j.y < 0.0 ||
        j.y >= image.height()) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<AnnotatedImage> load_dataset(const std::string& annotation_path,
                                         int expected_joints) {
  std::ifstream in(annotation_path);
  if (!in) throw DataError("cannot open annotation file " + annotation_path);
  const fs::path base = fs::path(annotation_path).parent_path();

  std::vector<AnnotatedImage> out;
  std::string line;
  int line_no = 0;
  int excluded = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      record_error(annotation_path, line_no, e.what());
    }
    if (!record.is_object()) {
      record_error(annotation_path, line_no, "record is not a JSON object");
    }
    if (!record.contains("id") || !record["id"].is_string()) {
      record_error(annotation_path, line_no, "missing string field 'id'");
    }
    if (!record.contains("image_path") || !record["image_path"].is_string()) {
      record_error(annotation_path, line_no,
                   "missing string field 'image_path'");
    }
    if (!record.contains("joints")) {
      record_error(annotation_path, line_no, "missing field 'joints'");
    }

    AnnotatedImage instance;
    instance.id = record["id"].get<std::string>();
    instance.image_path = record["image_path"].get<std::string>();

    const json& joints = record["joints"];
    if (joints.is_array()) {
      Pose pose;
      for (const json& j : joints) {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
            !j[1].is_number()) {
          record_error(annotation_path, line_no,
                       "joint entries must be [x, y] pairs (record '" +
                           instance.id + "')");
        }
        pose.joints.emplace_back(j[0].get<double>(), j[1].get<double>());
      }
      if (expected_joints >= 0 && pose.size() != expected_joints) {
        record_error(annotation_path, line_no,
                     "record '" + instance.id + "' has " +
                         std::to_string(pose.size()) + " joints, expected " +
                         std::to_string(expected_joints));
      }
      instance.pose = std::move(pose);
    } else if (!joints.is_null()) {
      record_error(annotation_path, line_no, "'joints' must be array or null");
    }

    if (record.contains("torso_box")) {
      const json& box = record["torso_box"];
      if (!box.is_array() || box.size() != 4) {
        record_error(annotation_path, line_no,
                     "'torso_box' must be [x0, y0, x1, y1]");
      }
      instance.torso_box = {{box[0].get<double>(), box[1].get<double>(),
                             box[2].get<double>(), box[3].get<double>()}};
    }

    const fs::path img_path = fs::path(instance.image_path).is_absolute()
                                  ? fs::path(instance.image_path)
                                  : base / instance.image_path;
    try {
      instance.image = load_image(img_path.string());
    } catch (const Error& e) {
      record_error(annotation_path, line_no,
                   "record '" + instance.id + "': " + e.what());
    }

    if (instance.pose && !joints_in_bounds(*instance.pose, instance.image)) {
      std::cerr << "warning: record '" << instance.id
                << "' has joints outside the image, excluded\n";
      ++excluded;
      continue;
    }
    out.push_back(std::move(instance));
  }
  if (excluded > 0) {
    std::cerr << "warning: excluded " << excluded << " of "
              << (excluded + static_cast<int>(out.size()))
              << " records with out-of-bounds joints\n";
  }
  return out;
}

void save_dataset(const std::vector<AnnotatedImage>& instances,
                  const std::string& annotation_path,
                  const std::string& image_dir, const std::string& image_ext) {
  fs::create_directories(image_dir);
  const fs::path anno_dir = fs::path(annotation_path).parent_path();
  // The index is written to a temp file and renamed into place, so a
  // failed run never leaves a partial annotation file behind.
  const std::string tmp_path = annotation_path + ".tmp";
  std::ofstream out(tmp_path);
  if (!out) throw DataError("cannot write annotation file " + annotation_path);

  for (const AnnotatedImage& instance : instances) {
    const fs::path img_file = fs::path(image_dir) / (instance.id + image_ext);
    save_image(instance.image, img_file.string());

    fs::path rel = img_file.lexically_relative(anno_dir);
    if (rel.empty()) rel = img_file;

    json record;
    record["id"] = instance.id;
    record["image_path"] = rel.generic_string();
    if (instance.pose) {
      json joints = json::array();
      for (const Vec2& j : instance.pose->joints) {
        joints.push_back(json::array({j.x, j.y}));
      }
      record["joints"] = joints;
    } else {
      record["joints"] = nullptr;
    }
    if (instance.torso_box) {
      record["torso_box"] = *instance.torso_box;
    }
    out << record.dump() << '\n';
  }
  out.close();
  if (!out) throw DataError("failed writing " + annotation_path);
  fs::rename(tmp_path, annotation_path);
}

}  // namespace idpr
