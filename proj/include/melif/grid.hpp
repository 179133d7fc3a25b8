#ifndef MELIF_GRID_HPP
#define MELIF_GRID_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "melif/common.hpp"

namespace melif {

/// Grid resolution: delta = 1 / steps_per_unit, so 0 and 1 are always on the grid.
class GridSpacing {
 public:
  explicit GridSpacing(std::int64_t steps_per_unit = 4) : steps_(steps_per_unit) {
    if (steps_ < 1) throw Error("grid spacing: steps per unit must be positive");
  }

  /// Accepts delta only when 1/delta is a positive integer.
  static GridSpacing from_delta(double delta) {
    if (!(delta > 0) || !std::isfinite(delta)) throw Error("grid spacing: delta must be positive");
    double inv = 1.0 / delta;
    double r = std::round(inv);
    if (r < 1 || std::abs(inv - r) > 1e-9 * r)
      throw Error("grid spacing: 1/delta must be a positive integer (got delta=" + std::to_string(delta) + ")");
    return GridSpacing(static_cast<std::int64_t>(r));
  }

  std::int64_t steps_per_unit() const { return steps_; }
  double delta() const { return 1.0 / static_cast<double>(steps_); }

  friend bool operator==(const GridSpacing&, const GridSpacing&) = default;

 private:
  std::int64_t steps_;
};

/// A weight vector on the grid, identified by integer step counts per coordinate.
class GridPoint {
 public:
  GridPoint() = default;
  GridPoint(std::vector<std::int64_t> steps, GridSpacing spacing) : steps_(std::move(steps)), spacing_(spacing) {}

  /// Nearest grid point to the given weights; throws if a weight is off-grid.
  static GridPoint from_weights(std::span<const double> weights, GridSpacing spacing) {
    std::vector<std::int64_t> steps(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) {
      double s = weights[k] * static_cast<double>(spacing.steps_per_unit());
      double r = std::round(s);
      if (std::abs(s - r) > 1e-9) throw Error("weight " + std::to_string(weights[k]) + " is not on the grid");
      steps[k] = static_cast<std::int64_t>(r);
    }
    return GridPoint(std::move(steps), spacing);
  }

  std::size_t dim() const { return steps_.size(); }
  std::span<const std::int64_t> steps() const { return steps_; }
  GridSpacing spacing() const { return spacing_; }

  double weight(std::size_t k) const {
    return static_cast<double>(steps_[k]) / static_cast<double>(spacing_.steps_per_unit());
  }

  std::vector<double> weights() const {
    std::vector<double> w(steps_.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = weight(k);
    return w;
  }

  GridPoint shifted(std::size_t dim, std::int64_t by) const {
    GridPoint p = *this;
    p.steps_.at(dim) += by;
    return p;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < steps_.size(); ++k) os << (k ? ", " : "") << weight(k);
    os << ')';
    return os.str();
  }

  friend bool operator==(const GridPoint&, const GridPoint&) = default;

 private:
  std::vector<std::int64_t> steps_;
  GridSpacing spacing_;
};

struct GridPointHash {
  std::size_t operator()(const GridPoint& p) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.spacing().steps_per_unit());
    for (auto s : p.steps()) {
      h ^= static_cast<std::uint64_t>(s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// The 2N points one grid step away: dim 0 +delta, dim 0 -delta, dim 1 +delta, ...
inline std::vector<GridPoint> neighbors(const GridPoint& p) {
  std::vector<GridPoint> out;
  out.reserve(2 * p.dim());
  for (std::size_t d = 0; d < p.dim(); ++d) {
    out.push_back(p.shifted(d, +1));
    out.push_back(p.shifted(d, -1));
  }
  return out;
}

/// The N unit vectors followed by the all-ones vector (which is the unit vector when N = 1).
inline std::vector<GridPoint> default_starting_points(std::size_t dims, GridSpacing spacing) {
  const auto one = spacing.steps_per_unit();
  std::vector<GridPoint> out;
  for (std::size_t k = 0; k < dims; ++k) {
    std::vector<std::int64_t> s(dims, 0);
    s[k] = one;
    out.emplace_back(std::move(s), spacing);
  }
  if (dims != 1) out.emplace_back(std::vector<std::int64_t>(dims, one), spacing);
  return out;
}

}  // namespace melif

#endif  // MELIF_GRID_HPP
