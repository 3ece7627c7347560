#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bvpdisc {

// Equispaced discretization of [a, b] with n points, x_k = a + k (b - a) / (n - 1).
class Grid {
 public:
  static constexpr std::size_t kMinPoints = 5;

  Grid(double a, double b, std::size_t n);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t size() const noexcept { return points_.size(); }
  double spacing() const noexcept { return h_; }
  double length() const noexcept { return b_ - a_; }

  std::span<const double> points() const noexcept { return points_; }
  double operator[](std::size_t k) const noexcept { return points_[k]; }

  // Same interval, `factor` times as many intervals.
  Grid refined(std::size_t factor) const;

  bool operator==(const Grid& other) const noexcept {
    return a_ == other.a_ && b_ == other.b_ && size() == other.size();
  }

 private:
  double a_;
  double b_;
  double h_;
  std::vector<double> points_;
};

}  // namespace bvpdisc
