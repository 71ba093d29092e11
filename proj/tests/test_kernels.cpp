#include "mixdeconv/kernels.hpp"

#include "test_support.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace mixdeconv;
using mixdeconv::testing::error_code_of;

// Reference values below come from scipy.stats (norm.pdf, poisson.pmf,
// gamma.pdf with scale = 1/rate, t.pdf), computed outside this code base.

TEST_CASE("kernel density reference values")
{
  CHECK(kernel_density(KernelModel::normal(0.5), 2.0, 2.0) ==
        doctest::Approx(0.5641895835477563).epsilon(1e-13));
  CHECK(kernel_density(KernelModel::poisson(), 0.0, 1.0) ==
        doctest::Approx(0.36787944117144233).epsilon(1e-13));
  CHECK(kernel_density(KernelModel::poisson(), 2.0, 1.0) ==
        doctest::Approx(0.18393972058572114).epsilon(1e-13));
  CHECK(kernel_density(presets::kernel3(), 1.0, 1.0) ==
        doctest::Approx(1.776706347841696).epsilon(1e-12));
  CHECK(kernel_density(presets::kernel2(), 1.1, 1.0) ==
        doctest::Approx(1.1846134218951128).epsilon(1e-12));
  CHECK(kernel_density(KernelModel::normal_sd(std::sqrt(0.5)), 0.0, 0.0) ==
        doctest::Approx(0.5641895835477563).epsilon(1e-13));
}

TEST_CASE("presets")
{
  CHECK(presets::kernel1().variance() == 0.5);
  CHECK(presets::kernel2().scale() == 0.3);
  CHECK(presets::kernel2().df() == 5.0);
  CHECK(presets::kernel3().shape_mult() == 20.0);
  CHECK(presets::kernel3().rate() == 20.0);
  CHECK(kernel_from_name("kernel2") == presets::kernel2());
  CHECK(kernel_from_name("poisson").family() == KernelFamily::poisson);
  CHECK(error_code_of([] { kernel_from_name("laplace"); }) == ErrorCode::invalid_config);
}

TEST_CASE("parameter and observation errors")
{
  CHECK(error_code_of([] { KernelModel::normal(0.0); }) == ErrorCode::invalid_parameter);
  CHECK(error_code_of([] { KernelModel::student_t(0.3, -1.0); }) == ErrorCode::invalid_parameter);
  CHECK(error_code_of([] { KernelModel::gamma(20.0, 0.0); }) == ErrorCode::invalid_parameter);
  CHECK(error_code_of([] { KernelModel::poisson().density(1.0, 0.0); }) ==
        ErrorCode::invalid_parameter);
  CHECK(error_code_of([] { presets::kernel3().density(1.0, -0.5); }) ==
        ErrorCode::invalid_parameter);
  CHECK(error_code_of([] { KernelModel::poisson().density(1.5, 1.0); }) ==
        ErrorCode::domain_violation);
  CHECK(error_code_of([] { KernelModel::poisson().density(-1.0, 1.0); }) ==
        ErrorCode::domain_violation);
  CHECK(error_code_of([] { presets::kernel3().density(0.0, 1.0); }) ==
        ErrorCode::domain_violation);
  CHECK(error_code_of([] { (void)presets::kernel1().rate(); }) == ErrorCode::invalid_parameter);
}

TEST_CASE("large gamma shapes and counts stay finite")
{
  const double g = presets::kernel3().density(25.0, 25.0);
  CHECK(std::isfinite(g));
  CHECK(g > 0.0);
  const double p = KernelModel::poisson().density(400.0, 400.0);
  CHECK(p == doctest::Approx(0.019942958805031).epsilon(1e-12));
}

TEST_CASE("location families are shift invariant")
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (const auto& km : { presets::kernel1(), presets::kernel2(), KernelModel::normal(3.0) }) {
    for (int trial = 0; trial < 200; ++trial) {
      const double y = u(rng), x = u(rng), c = u(rng);
      CHECK(std::abs(km.density(y, x) - km.density(y + c, x + c)) <= 1e-12);
    }
  }
}

TEST_CASE("kernels are normalized in y")
{
  const Grid g = make_uniform_grid(0.0, 10.0, 20);
  for (double x : g.nodes()) {
    {
      const auto km = presets::kernel1();
      double sum = 0.0;
      const int steps = 200000;
      const double a = x - 20.0, b = x + 20.0, h = (b - a) / steps;
      for (int s = 0; s < steps; ++s)
        sum += km.density(a + (s + 0.5) * h, x) * h;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
    }
    {
      const auto km = presets::kernel2();
      double sum = 0.0;
      const int steps = 400000;
      const double a = x - 600.0, b = x + 600.0, h = (b - a) / steps;
      for (int s = 0; s < steps; ++s)
        sum += km.density(a + (s + 0.5) * h, x) * h;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
    }
    {
      const auto km = presets::kernel3();
      double sum = 0.0;
      const int steps = 200000;
      const double b = 4.0 * x + 10.0, h = b / steps;
      for (int s = 0; s < steps; ++s)
        sum += km.density((s + 0.5) * h, x) * h;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
    }
  }
  const Grid counts_grid = make_uniform_grid(0.0, 25.0, 50);
  for (double x : counts_grid.nodes()) {
    double sum = 0.0;
    for (int y = 0; y <= 200; ++y)
      sum += KernelModel::poisson().density(y, x);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("kernel matrix")
{
  SUBCASE("normal row")
  {
    const Grid g = make_uniform_grid(-0.5, 1.5, 2);
    const auto k = build_kernel_matrix(KernelModel::normal(1.0),
                                       make_dataset({ 1.0 }, DataKind::continuous), g);
    REQUIRE(k.observations() == 1);
    REQUIRE(k.columns() == 2);
    CHECK(k(0, 0) == doctest::Approx(0.24197072451914337).epsilon(1e-13));
    CHECK(k(0, 1) == doctest::Approx(0.3989422804014327).epsilon(1e-13));
  }

  SUBCASE("poisson entry")
  {
    const Grid g = make_uniform_grid(0.5, 2.5, 2);
    const auto k = build_kernel_matrix(KernelModel::poisson(),
                                       make_dataset({ 2.0 }, DataKind::count), g);
    CHECK(g.node(0) == 1.0);
    CHECK(k(0, 0) == doctest::Approx(0.18393972058572114).epsilon(1e-13));
  }

  SUBCASE("empty dataset")
  {
    const Grid g = make_uniform_grid(0.0, 1.0, 2);
    CHECK(error_code_of([&] { build_kernel_matrix(presets::kernel1(), Dataset{}, g); }) ==
          ErrorCode::empty_dataset);
    CHECK(error_code_of([] { make_dataset({}, DataKind::continuous); }) ==
          ErrorCode::empty_dataset);
  }

  SUBCASE("domain violation names the row")
  {
    const Grid g = make_uniform_grid(0.0, 10.0, 4);
    const Dataset d = make_dataset({ 1.0, 2.0, 3.0, -1.0 }, DataKind::continuous);
    try {
      build_kernel_matrix(presets::kernel3(), d, g);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::domain_violation);
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }

  SUBCASE("grid outside the parameter range")
  {
    const Grid g = make_uniform_grid(-1.0, 1.0, 4);
    CHECK(error_code_of([&] {
            build_kernel_matrix(KernelModel::poisson(), make_dataset({ 1.0 }, DataKind::count), g);
          }) == ErrorCode::invalid_parameter);
  }

  SUBCASE("duplicates share rows and input order is irrelevant")
  {
    const Grid g = make_uniform_grid(0.0, 10.0, 50);
    const auto a = build_kernel_matrix(presets::kernel1(),
                                       make_dataset({ 2.0, 1.0, 2.0, 7.5 }, DataKind::continuous), g);
    const auto b = build_kernel_matrix(presets::kernel1(),
                                       make_dataset({ 7.5, 2.0, 2.0, 1.0 }, DataKind::continuous), g);
    CHECK(a.distinct_rows() == 3);
    CHECK(a.observations() == 4);
    for (std::size_t j = 0; j < g.size(); ++j) {
      CHECK(a(0, j) == a(2, j));
      CHECK(a(0, j) == b(1, j));
    }
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(a.row_count(r) == b.row_count(r));
      CHECK(a.row_log_scale(r) == b.row_log_scale(r));
    }
  }

  SUBCASE("far observations keep a usable row")
  {
    const Grid g = make_uniform_grid(0.0, 10.0, 100);
    const auto k = build_kernel_matrix(presets::kernel1(),
                                       make_dataset({ 60.0 }, DataKind::continuous), g);
    CHECK(k.scaled_row(0)[99] == 1.0);
    CHECK(std::isfinite(k.row_log_scale(0)));
  }

  SUBCASE("bit-for-bit reproducible")
  {
    const Grid g = make_uniform_grid(0.0, 10.0, 300);
    std::mt19937_64 rng(5);
    std::gamma_distribution<double> gd(3.0, 1.0);
    std::vector<double> y(200);
    for (double& v : y)
      v = gd(rng);
    const Dataset d = make_dataset(y, DataKind::continuous);
    for (const auto& km : { presets::kernel1(), presets::kernel2(), presets::kernel3() })
      CHECK(build_kernel_matrix(km, d, g) == build_kernel_matrix(km, d, g));
  }

  SUBCASE("from_values")
  {
    const std::vector<double> e{ 1.0, 2.0, 0.0, 0.5 };
    const auto k = KernelMatrix::from_values(2, 2, e);
    CHECK(k(0, 1) == doctest::Approx(2.0));
    CHECK(k(1, 0) == 0.0);
    CHECK(k(1, 1) == doctest::Approx(0.5));
    const std::vector<double> zero_row{ 1.0, 1.0, 0.0, 0.0 };
    CHECK(error_code_of([&] { KernelMatrix::from_values(2, 2, zero_row); }) ==
          ErrorCode::domain_violation);
    CHECK(error_code_of([&] { KernelMatrix::from_values(3, 2, e); }) ==
          ErrorCode::dimension_mismatch);
  }
}

TEST_CASE("kernel sampling matches the kernel mean")
{
  std::mt19937_64 rng(17);
  const int draws = 200000;
  for (const auto& km : { presets::kernel1(), presets::kernel2(), presets::kernel3(),
                          KernelModel::poisson() }) {
    double sum = 0.0;
    for (int i = 0; i < draws; ++i)
      sum += km.sample(4.0, rng);
    CHECK(sum / draws == doctest::Approx(4.0).epsilon(0.01));
  }
}
