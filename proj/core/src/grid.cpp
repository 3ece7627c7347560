#include "bvpdisc/grid.hpp"

#include <cmath>
#include <string>

#include "bvpdisc/error.hpp"

namespace bvpdisc {

Grid::Grid(double a, double b, std::size_t n) : a_(a), b_(b), h_(0.0) {
  if (n < kMinPoints) {
    throw InvalidArgument("Grid needs at least " + std::to_string(kMinPoints) +
                          " points, got " + std::to_string(n));
  }
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidArgument("Grid interval must satisfy a < b");
  }
  h_ = (b - a) / static_cast<double>(n - 1);
  points_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    points_[k] = a + static_cast<double>(k) * h_;
  }
  points_.back() = b;
}

Grid Grid::refined(std::size_t factor) const {
  if (factor == 0) throw InvalidArgument("refinement factor must be positive");
  return Grid(a_, b_, factor * (size() - 1) + 1);
}

}  // namespace bvpdisc
