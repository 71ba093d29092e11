#include "mixdeconv/grid.hpp"

#include "mixdeconv/error.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace mixdeconv {

Grid Grid::uniform(double lo, double hi, std::size_t m)
{
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw Error(ErrorCode::invalid_range,
                "grid support requires lo < hi, got [" + std::to_string(lo) +
                  ", " + std::to_string(hi) + "]");
  if (m < 2)
    throw Error(ErrorCode::too_few_nodes,
                "grid needs at least 2 nodes, got " + std::to_string(m));

  Grid g;
  g.lo_ = lo;
  g.hi_ = hi;
  const double width = (hi - lo) / static_cast<double>(m);
  g.nodes_.resize(m);
  g.weights_.assign(m, width);
  for (std::size_t j = 0; j < m; ++j)
    g.nodes_[j] = lo + (static_cast<double>(j) + 0.5) * width;
  return g;
}

namespace {

template<class T>
T parse_field(std::string_view text, std::string_view what)
{
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::invalid_config,
                "cannot parse grid " + std::string(what) + " from '" +
                  std::string(text) + "'");
  return value;
}

} // namespace

Grid Grid::parse(std::string_view spec)
{
  const auto first = spec.find(':');
  const auto second = first == std::string_view::npos
                        ? std::string_view::npos
                        : spec.find(':', first + 1);
  if (second == std::string_view::npos)
    throw Error(ErrorCode::invalid_config,
                "grid must be given as lo:hi:m, got '" + std::string(spec) + "'");
  const double lo = parse_field<double>(spec.substr(0, first), "lo");
  const double hi =
    parse_field<double>(spec.substr(first + 1, second - first - 1), "hi");
  const auto m = parse_field<std::size_t>(spec.substr(second + 1), "m");
  return uniform(lo, hi, m);
}

double Grid::integrate(std::span<const double> values) const
{
  if (values.size() != size())
    throw Error(ErrorCode::length_mismatch,
                "integrate: " + std::to_string(values.size()) +
                  " values for a grid of " + std::to_string(size()) + " nodes");
  double sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j)
    sum += values[j] * weights_[j];
  return sum;
}

} // namespace mixdeconv
