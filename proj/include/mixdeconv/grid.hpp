#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mixdeconv {

//! Uniform midpoint discretization of a bounded mixing-parameter support.
//!
//! Node j sits at the centre of the j-th of m equal cells covering [lo, hi],
//! and every cell carries the weight (hi - lo) / m, so integrals over the
//! support reduce to weighted sums over nodes. Immutable once built.
class Grid
{
public:
  //! @throws Error(invalid_range) if lo >= hi or either end is not finite,
  //!   Error(too_few_nodes) if m < 2.
  static Grid uniform(double lo, double hi, std::size_t m);

  //! Parses the command-line form "lo:hi:m".
  static Grid parse(std::string_view spec);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return nodes_.size(); }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  double node(std::size_t j) const { return nodes_[j]; }
  double weight(std::size_t j) const { return weights_[j]; }

  //! Sum of values[j] * weight[j].
  double integrate(std::span<const double> values) const;

  bool operator==(const Grid& other) const
  {
    return lo_ == other.lo_ && hi_ == other.hi_ && size() == other.size();
  }

private:
  Grid() = default;

  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline Grid make_uniform_grid(double lo, double hi, std::size_t m)
{
  return Grid::uniform(lo, hi, m);
}

inline double integrate(const Grid& grid, std::span<const double> values)
{
  return grid.integrate(values);
}

} // namespace mixdeconv
