#include "idpr/score_maps.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "idpr/error.hpp"
#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"

namespace idpr {

ScoreMapStack make_score_map_stack(const PartGraph& graph,
                                   const RelationModel& relations, int width,
                                   int height, int stride) {
  if (!relations.consistent_with(graph)) {
    throw ConfigError("relation model does not match graph");
  }
  std::vector<std::pair<int, int>> dir_parts;
  std::vector<int> type_counts;
  for (int d = 0; d < graph.num_directed_edges(); ++d) {
    dir_parts.push_back(graph.directed_endpoints(d));
    type_counts.push_back(relations.type_count(d));
  }
  return ScoreMapStack(width, height, stride, graph.num_parts(),
                       std::move(dir_parts), std::move(type_counts));
}

ScoreMapStack::ScoreMapStack(int width, int height, int stride, int num_parts,
                             std::vector<std::pair<int, int>> dir_parts,
                             std::vector<int> type_counts)
    : width_(width),
      height_(height),
      stride_(stride),
      num_parts_(num_parts),
      dir_parts_(std::move(dir_parts)),
      type_counts_(std::move(type_counts)) {
  if (width_ < 1 || height_ < 1) {
    throw ConfigError("score maps need positive dimensions");
  }
  if (stride_ < 1) {
    throw ConfigError("stride must be >= 1");
  }
  if (num_parts_ < 1) {
    throw ConfigError("score maps need at least one part");
  }
  if (dir_parts_.size() != type_counts_.size()) {
    throw ConfigError("directed-edge endpoint and type-count lists disagree");
  }
  int channels = num_parts_;
  idpr_base_.reserve(dir_parts_.size());
  for (std::size_t d = 0; d < dir_parts_.size(); ++d) {
    const auto [from, to] = dir_parts_[d];
    if (from < 0 || from >= num_parts_ || to < 0 || to >= num_parts_ ||
        from == to) {
      throw ConfigError("directed edge endpoints out of range");
    }
    if (type_counts_[d] < 1) {
      throw ConfigError("every directed edge needs at least one type");
    }
    idpr_base_.push_back(channels);
    channels += type_counts_[d];
  }
  planes_.assign(channels, Grid<float>(width_, height_, 0.0f));
}

int ScoreMapStack::appearance_channel(int part) const {
  if (part < 0 || part >= num_parts_) {
    throw BoundsError("part index " + std::to_string(part) + " out of range");
  }
  return part;
}

int ScoreMapStack::idpr_channel(int dir_id, int type) const {
  if (dir_id < 0 || dir_id >= num_directed_edges()) {
    throw BoundsError("directed edge " + std::to_string(dir_id) +
                      " out of range");
  }
  if (type < 0 || type >= type_counts_[dir_id]) {
    throw InvalidTypeError("type " + std::to_string(type) +
                           " out of range for directed edge " +
                           std::to_string(dir_id));
  }
  return idpr_base_[dir_id] + type;
}

bool ScoreMapStack::operator==(const ScoreMapStack& other) const {
  return width_ == other.width_ && height_ == other.height_ &&
         stride_ == other.stride_ && num_parts_ == other.num_parts_ &&
         dir_parts_ == other.dir_parts_ && type_counts_ == other.type_counts_ &&
         planes_ == other.planes_;
}

namespace {

constexpr char kMagic[4] = {'I', 'D', 'P', 'R'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kAppearanceMark = 0xFFFFFFFFu;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  put_u32(out, bits);
}

class Cursor {
public:
  Cursor(const std::string& data) : data_(data) {}

  std::uint32_t u32() {
    if (pos_ + 4 > data_.size()) {
      throw ScoreMapIoError(ScoreMapIoError::Kind::kTruncated,
                            "file ends inside a header field");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(data_.data() + pos_);
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
  }

  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_score_maps(const ScoreMapStack& stack,
                     const std::filesystem::path& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(stack.width()));
  put_u32(out, static_cast<std::uint32_t>(stack.height()));
  put_u32(out, static_cast<std::uint32_t>(stack.stride()));
  put_u32(out, static_cast<std::uint32_t>(stack.num_channels()));
  for (int i = 0; i < stack.num_parts(); ++i) {
    put_u32(out, static_cast<std::uint32_t>(i));
    put_u32(out, kAppearanceMark);
    put_u32(out, 0);
  }
  for (int d = 0; d < stack.num_directed_edges(); ++d) {
    const auto [from, to] = stack.dir_parts(d);
    for (int t = 0; t < stack.type_count(d); ++t) {
      put_u32(out, static_cast<std::uint32_t>(from));
      put_u32(out, static_cast<std::uint32_t>(to));
      put_u32(out, static_cast<std::uint32_t>(t));
    }
  }
  for (int i = 0; i < stack.num_parts(); ++i) {
    for (float v : stack.appearance(i).cells()) put_f32(out, v);
  }
  for (int d = 0; d < stack.num_directed_edges(); ++d) {
    for (int t = 0; t < stack.type_count(d); ++t) {
      for (float v : stack.idpr(d, t).cells()) put_f32(out, v);
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw DataError("cannot open " + path.string() + " for writing");
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw DataError("short write to " + path.string());
  }
}

ScoreMapStack load_score_maps(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw DataError("cannot open " + path.string());
  }
  std::string data((std::istreambuf_iterator<char>(file)),
                   std::istreambuf_iterator<char>());

  if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0) {
    throw ScoreMapIoError(ScoreMapIoError::Kind::kBadMagic,
                          "not a score-map file: " + path.string());
  }
  std::string body = data.substr(4);
  Cursor cur(body);
  const std::uint32_t version = cur.u32();
  if (version != kVersion) {
    throw ScoreMapIoError(ScoreMapIoError::Kind::kVersionMismatch,
                          "score-map version " + std::to_string(version) +
                              ", expected " + std::to_string(kVersion));
  }
  const std::uint32_t w = cur.u32();
  const std::uint32_t h = cur.u32();
  const std::uint32_t stride = cur.u32();
  const std::uint32_t channels = cur.u32();
  if (w == 0 || h == 0 || stride == 0 || channels == 0) {
    throw ScoreMapIoError(ScoreMapIoError::Kind::kInconsistent,
                          "zero dimension, stride, or channel count");
  }

  struct Entry {
    std::uint32_t a, b, c;
  };
  std::vector<Entry> directory(channels);
  for (auto& e : directory) {
    e.a = cur.u32();
    e.b = cur.u32();
    e.c = cur.u32();
  }

  // Leading appearance channels, one per part in order.
  std::uint32_t num_parts = 0;
  while (num_parts < channels && directory[num_parts].b == kAppearanceMark) {
    const Entry& e = directory[num_parts];
    if (e.a != num_parts || e.c != 0) {
      throw ScoreMapIoError(ScoreMapIoError::Kind::kInconsistent,
                            "appearance channels out of order");
    }
    ++num_parts;
  }
  if (num_parts == 0) {
    throw ScoreMapIoError(ScoreMapIoError::Kind::kInconsistent,
                          "no appearance channels");
  }

  // Remaining channels: contiguous (from, to) groups with ascending types.
  std::vector<std::pair<int, int>> dir_parts;
  std::vector<int> type_counts;
  std::uint32_t pos = num_parts;
  while (pos < channels) {
    const std::uint32_t from = directory[pos].a;
    const std::uint32_t to = directory[pos].b;
    if (from >= num_parts || to >= num_parts || from == to) {
      throw ScoreMapIoError(ScoreMapIoError::Kind::kInconsistent,
                            "bad endpoints in channel directory");
    }
    std::uint32_t t = 0;
    while (pos < channels && directory[pos].a == from &&
           directory[pos].b == to) {
      if (directory[pos].c != t) {
        throw ScoreMapIoError(ScoreMapIoError::Kind::kInconsistent,
                              "types of a directed edge out of order");
      }
      ++t;
      ++pos;
    }
    dir_parts.emplace_back(static_cast<int>(from), static_cast<int>(to));
    type_counts.push_back(static_cast<int>(t));
  }
  for (std::size_t d = 0; d + 1 < dir_parts.size(); d += 2) {
    if (dir_parts[d].first != dir_parts[d + 1].second ||
        dir_parts[d].second != dir_parts[d + 1].first) {
      throw ScoreMapIoError(ScoreMapIoError::Kind::kInconsistent,
                            "directed edges do not come in reverse pairs");
    }
  }
  if (dir_parts.size() % 2 != 0) {
    throw ScoreMapIoError(ScoreMapIoError::Kind::kInconsistent,
                          "odd number of directed edges");
  }

  const std::size_t plane = static_cast<std::size_t>(w) * h;
  if (cur.remaining() < plane * channels * 4) {
    throw ScoreMapIoError(ScoreMapIoError::Kind::kTruncated,
                          "file ends inside the plane payload");
  }
  if (cur.remaining() > plane * channels * 4) {
    throw ScoreMapIoError(ScoreMapIoError::Kind::kInconsistent,
                          "trailing bytes after the plane payload");
  }

  ScoreMapStack stack(static_cast<int>(w), static_cast<int>(h),
                      static_cast<int>(stride), static_cast<int>(num_parts),
                      std::move(dir_parts), std::move(type_counts));
  for (int i = 0; i < stack.num_parts(); ++i) {
    for (float& v : stack.appearance(i).cells()) v = cur.f32();
  }
  for (int d = 0; d < stack.num_directed_edges(); ++d) {
    for (int t = 0; t < stack.type_count(d); ++t) {
      for (float& v : stack.idpr(d, t).cells()) v = cur.f32();
    }
  }
  return stack;
}

}  // namespace idpr
