#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "idpr/error.hpp"

namespace idpr {

// Dense row-major 2D grid. (x, y) indexing with x the column.
template <typename T>
class Grid {
public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        cells_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  bool contains(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  std::size_t flat(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  T& operator()(int x, int y) { return cells_[flat(x, y)]; }
  const T& operator()(int x, int y) const { return cells_[flat(x, y)]; }

  T& at(int x, int y) {
    check(x, y);
    return cells_[flat(x, y)];
  }
  const T& at(int x, int y) const {
    check(x, y);
    return cells_[flat(x, y)];
  }

  T* row(int y) { return cells_.data() + static_cast<std::size_t>(y) * width_; }
  const T* row(int y) const {
    return cells_.data() + static_cast<std::size_t>(y) * width_;
  }

  T* data() { return cells_.data(); }
  const T* data() const { return cells_.data(); }

  std::vector<T>& cells() { return cells_; }
  const std::vector<T>& cells() const { return cells_; }

  void fill(T value) { cells_.assign(cells_.size(), value); }

  bool operator==(const Grid& o) const {
    return width_ == o.width_ && height_ == o.height_ && cells_ == o.cells_;
  }

private:
  void check(int x, int y) const {
    if (!contains(x, y)) {
      throw BoundsError("grid index (" + std::to_string(x) + "," +
                        std::to_string(y) + ") outside " +
                        std::to_string(width_) + "x" + std::to_string(height_));
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> cells_;
};

}  // namespace idpr
