#include "mixdeconv/error.hpp"
#include "mixdeconv/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace mixdeconv;

TEST_CASE("uniform grid uses cell midpoints")
{
  const Grid g = make_uniform_grid(0.0, 10.0, 5);
  REQUIRE(g.size() == 5);
  const std::vector<double> expected{ 1, 3, 5, 7, 9 };
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(g.node(j) == doctest::Approx(expected[j]).epsilon(1e-15));
    CHECK(g.weight(j) == 2.0);
  }

  const Grid two = make_uniform_grid(0.0, 1.0, 2);
  CHECK(two.node(0) == 0.25);
  CHECK(two.node(1) == 0.75);
  CHECK(two.weight(0) == 0.5);
  CHECK(two.weight(1) == 0.5);
}

TEST_CASE("Unif(0,25) support with 500 cells")
{
  const Grid g = make_uniform_grid(0.0, 25.0, 500);
  CHECK(g.size() == 500);
  for (double w : g.weights())
    CHECK(w == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(g.node(0) == doctest::Approx(0.025));
  CHECK(g.node(499) == doctest::Approx(24.975));
}

TEST_CASE("grid invariants")
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lo_dist(-50.0, 50.0);
  std::uniform_real_distribution<double> width_dist(1e-3, 100.0);
  std::uniform_int_distribution<std::size_t> m_dist(2, 3000);
  for (int trial = 0; trial < 100; ++trial) {
    const double lo = lo_dist(rng);
    const double hi = lo + width_dist(rng);
    const Grid g = Grid::uniform(lo, hi, m_dist(rng));
    for (std::size_t j = 0; j < g.size(); ++j) {
      CHECK(g.node(j) >= lo);
      CHECK(g.node(j) <= hi);
      CHECK(g.weight(j) > 0.0);
      if (j > 0)
        CHECK(g.node(j) > g.node(j - 1));
    }
    const std::vector<double> ones(g.size(), 1.0);
    CHECK(g.integrate(ones) == doctest::Approx(hi - lo).epsilon(1e-12));
  }
}

TEST_CASE("integrate")
{
  const Grid g = make_uniform_grid(0.0, 10.0, 5);
  CHECK(integrate(g, std::vector<double>(5, 0.1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate(g, std::vector<double>(5, 0.0)) == 0.0);
  CHECK(integrate(make_uniform_grid(0, 1, 2), std::vector<double>{ 1, 3 }) == 2.0);

  SUBCASE("linearity")
  {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    const Grid h = make_uniform_grid(-3.0, 4.0, 257);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> u(h.size()), v(h.size()), mix(h.size()), magnitude(h.size());
      const double a = z(rng), b = z(rng);
      for (std::size_t j = 0; j < h.size(); ++j) {
        u[j] = z(rng);
        v[j] = z(rng);
        mix[j] = a * u[j] + b * v[j];
        magnitude[j] = std::abs(a * u[j]) + std::abs(b * v[j]);
      }
      const double lhs = h.integrate(mix);
      const double rhs = a * h.integrate(u) + b * h.integrate(v);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * h.integrate(magnitude));
    }
  }

  SUBCASE("length mismatch")
  {
    try {
      (void)g.integrate(std::vector<double>(4, 1.0));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::length_mismatch);
    }
  }
}

TEST_CASE("construction errors")
{
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::io_error;
  };
  CHECK(code_of([] { Grid::uniform(1.0, 1.0, 10); }) == ErrorCode::invalid_range);
  CHECK(code_of([] { Grid::uniform(2.0, 1.0, 10); }) == ErrorCode::invalid_range);
  CHECK(code_of([] { Grid::uniform(0.0, 1.0, 1); }) == ErrorCode::too_few_nodes);
  CHECK(code_of([] { Grid::parse("0:10"); }) == ErrorCode::invalid_config);
  CHECK(code_of([] { Grid::parse("0:ten:5"); }) == ErrorCode::invalid_config);
}

TEST_CASE("parse lo:hi:m")
{
  const Grid g = Grid::parse("0:25:500");
  CHECK(g == make_uniform_grid(0.0, 25.0, 500));
  CHECK(Grid::parse("-1.5:2.5:4").node(0) == doctest::Approx(-1.0));
}
