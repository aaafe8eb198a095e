#pragma once

// Axis-aligned windows of Z^d and occupied sets stored as packed bitsets.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "oppaths/lattice.hpp"

namespace oppaths {

// Inclusive per-axis bounds. Axes >= d are pinned to [0, 0].
struct Window {
  int d = 1;
  Coord lo{};
  Coord hi{};

  static Window cube(int d, const Coord& center, std::int64_t radius);
  static Window empty(int d);

  bool is_empty() const;
  bool contains(const Coord& z) const;
  std::size_t volume() const;
  std::int64_t extent(int axis) const { return std::int64_t{hi[axis]} - lo[axis] + 1; }

  // Throws WindowError when the result leaves the packed coordinate range.
  Window inflated(std::int64_t r) const;
  Window intersect(const Window& other) const;
  Window hull_with(const Window& other) const;

  // Row-major, axis 0 slowest.
  std::size_t index_of(const Coord& z) const;
  Coord coord_at(std::size_t index) const;

  friend bool operator==(const Window&, const Window&) = default;
};

class Front {
 public:
  Front() = default;
  Front(std::int64_t t, Window window);

  std::int64_t layer() const { return t_; }
  const Window& window() const { return window_; }

  bool contains(const Coord& z) const;
  // Throws WindowError when z lies outside the window.
  void insert(const Coord& z);
  void insert_index(std::size_t index) { bits_[index >> 6] |= std::uint64_t{1} << (index & 63); }
  bool test_index(std::size_t index) const { return (bits_[index >> 6] >> (index & 63)) & 1U; }

  std::size_t count() const;
  bool empty() const;
  std::vector<Coord> sites() const;
  Window bounding_box() const;

  // Same occupied set re-expressed on another window (sites outside dropped).
  Front restricted_to(const Window& window) const;
  bool subset_of(const Front& other) const;
  bool same_sites(const Front& other) const;
  void merge(const Front& other);

  const std::vector<std::uint64_t>& bits() const { return bits_; }

  template <class Fn>
  void for_each_index(Fn&& fn) const {
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      std::uint64_t word = bits_[w];
      while (word != 0) {
        const int b = std::countr_zero(word);
        fn(w * 64 + static_cast<std::size_t>(b));
        word &= word - 1;
      }
    }
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for_each_index([&](std::size_t i) { fn(window_.coord_at(i)); });
  }

 private:
  std::int64_t t_ = 0;
  Window window_{};
  std::vector<std::uint64_t> bits_;
};

}  // namespace oppaths
