#include "oppaths/front.hpp"

#include <algorithm>

#include "oppaths/errors.hpp"

namespace oppaths {

Window Window::cube(int d, const Coord& center, std::int64_t radius) {
  Window w;
  w.d = d;
  for (int i = 0; i < d; ++i) {
    const std::int64_t lo = center[i] - radius;
    const std::int64_t hi = center[i] + radius;
    if (lo < -kCoordLimit || hi > kCoordLimit) {
      throw WindowError("window exceeds the coordinate range |z_i| <= 2^20 - 1");
    }
    w.lo[i] = static_cast<std::int32_t>(lo);
    w.hi[i] = static_cast<std::int32_t>(hi);
  }
  return w;
}

Window Window::empty(int d) {
  Window w;
  w.d = d;
  w.lo[0] = 1;
  w.hi[0] = 0;
  return w;
}

bool Window::is_empty() const {
  for (int i = 0; i < d; ++i) {
    if (lo[i] > hi[i]) return true;
  }
  return false;
}

bool Window::contains(const Coord& z) const {
  for (int i = 0; i < kMaxDim; ++i) {
    if (i < d) {
      if (z[i] < lo[i] || z[i] > hi[i]) return false;
    } else if (z[i] != 0) {
      return false;
    }
  }
  return true;
}

std::size_t Window::volume() const {
  if (is_empty()) return 0;
  std::size_t v = 1;
  for (int i = 0; i < d; ++i) v *= static_cast<std::size_t>(extent(i));
  return v;
}

Window Window::inflated(std::int64_t r) const {
  if (is_empty()) return *this;
  Window w = *this;
  for (int i = 0; i < d; ++i) {
    const std::int64_t lo2 = std::int64_t{lo[i]} - r;
    const std::int64_t hi2 = std::int64_t{hi[i]} + r;
    if (lo2 < -kCoordLimit || hi2 > kCoordLimit) {
      throw WindowError("inflated window exceeds the coordinate range");
    }
    if (lo2 > hi2) return Window::empty(d);
    w.lo[i] = static_cast<std::int32_t>(lo2);
    w.hi[i] = static_cast<std::int32_t>(hi2);
  }
  return w;
}

Window Window::intersect(const Window& other) const {
  Window w = *this;
  for (int i = 0; i < d; ++i) {
    w.lo[i] = std::max(lo[i], other.lo[i]);
    w.hi[i] = std::min(hi[i], other.hi[i]);
  }
  return w.is_empty() ? Window::empty(d) : w;
}

Window Window::hull_with(const Window& other) const {
  if (is_empty()) return other;
  if (other.is_empty()) return *this;
  Window w = *this;
  for (int i = 0; i < d; ++i) {
    w.lo[i] = std::min(lo[i], other.lo[i]);
    w.hi[i] = std::max(hi[i], other.hi[i]);
  }
  return w;
}

std::size_t Window::index_of(const Coord& z) const {
  std::size_t idx = 0;
  for (int i = 0; i < d; ++i) {
    idx = idx * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(z[i] - lo[i]);
  }
  return idx;
}

Coord Window::coord_at(std::size_t index) const {
  Coord z{};
  for (int i = d - 1; i >= 0; --i) {
    const auto ext = static_cast<std::size_t>(extent(i));
    z[i] = lo[i] + static_cast<std::int32_t>(index % ext);
    index /= ext;
  }
  return z;
}

Front::Front(std::int64_t t, Window window)
    : t_(t), window_(window), bits_((window_.volume() + 63) / 64, 0) {}

bool Front::contains(const Coord& z) const {
  if (!window_.contains(z)) return false;
  return test_index(window_.index_of(z));
}

void Front::insert(const Coord& z) {
  if (!window_.contains(z)) {
    throw WindowError("site " + to_string(z, window_.d) + " outside the front window");
  }
  insert_index(window_.index_of(z));
}

std::size_t Front::count() const {
  std::size_t c = 0;
  for (auto w : bits_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool Front::empty() const {
  return std::all_of(bits_.begin(), bits_.end(), [](std::uint64_t w) { return w == 0; });
}

std::vector<Coord> Front::sites() const {
  std::vector<Coord> out;
  for_each([&](const Coord& z) { out.push_back(z); });
  return out;
}

Window Front::bounding_box() const {
  Window box = Window::empty(window_.d);
  bool first = true;
  for_each([&](const Coord& z) {
    if (first) {
      box.lo = z;
      box.hi = z;
      first = false;
      return;
    }
    for (int i = 0; i < window_.d; ++i) {
      box.lo[i] = std::min(box.lo[i], z[i]);
      box.hi[i] = std::max(box.hi[i], z[i]);
    }
  });
  return box;
}

Front Front::restricted_to(const Window& window) const {
  Front out(t_, window);
  for_each([&](const Coord& z) {
    if (window.contains(z)) out.insert_index(window.index_of(z));
  });
  return out;
}

bool Front::subset_of(const Front& other) const {
  bool ok = true;
  for_each([&](const Coord& z) {
    if (ok && !other.contains(z)) ok = false;
  });
  return ok;
}

bool Front::same_sites(const Front& other) const {
  return subset_of(other) && other.subset_of(*this);
}

void Front::merge(const Front& other) {
  if (other.window_ == window_) {
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
    return;
  }
  other.for_each([&](const Coord& z) { insert(z); });
}

}  // namespace oppaths
