#include "core/emissions.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace mbm;

namespace {

double weighted_objective(Family f, const std::vector<double>& x, const std::vector<double>& w,
                          const BlockPairParameter& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * log_density(f, x[i], p);
  return s;
}

}  // namespace

TEST_SUITE("emissions") {
  TEST_CASE("log densities") {
    CHECK(log_density(Family::Bernoulli, 1.0, {0.5}) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    CHECK(log_density(Family::Bernoulli, 0.0, {0.25}) == doctest::Approx(std::log(0.75)).epsilon(1e-15));
    CHECK(log_density(Family::Poisson, 2.0, {1.0}) == doctest::Approx(-1.0 - std::log(2.0)).epsilon(1e-15));
    const double v = 1.0 / (2.0 * 3.14159265358979323846);
    CHECK(std::abs(log_density(Family::Gaussian, 1.7, {1.7, v})) < 1e-15);
  }

  TEST_CASE("support violations") {
    CHECK_THROWS_AS(log_density(Family::Bernoulli, 2.0, {0.5}), ValidationError);
    CHECK_THROWS_AS(log_density(Family::Poisson, 0.5, {1.0}), ValidationError);
    CHECK_THROWS_AS(log_density(Family::Poisson, -1.0, {1.0}), ValidationError);
    CHECK(in_support(Family::Gaussian, -1e300));
    CHECK_FALSE(in_support(Family::Gaussian, std::nan("")));
  }

  TEST_CASE("clamping keeps densities finite") {
    for (double a : {0.0, 1.0}) {
      for (double x : {0.0, 1.0}) CHECK(std::isfinite(log_density(Family::Bernoulli, x, {a})));
    }
    CHECK(std::isfinite(log_density(Family::Poisson, 3.0, {0.0})));
    CHECK(effective_alpha(Family::Bernoulli, 0.0) == kAlphaFloor);
    CHECK(effective_alpha(Family::Bernoulli, 1.0) == 1.0 - kAlphaFloor);
    CHECK(effective_alpha(Family::Gaussian, -4.0) == -4.0);
  }

  TEST_CASE("decomposition into coefficients") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int rep = 0; rep < 200; ++rep) {
      const BlockPairParameter b{u(gen), 0.5};
      const BlockPairParameter p{10 * u(gen), 0.5};
      const BlockPairParameter g{10 * u(gen) - 5, 3 * u(gen)};
      for (double x : {0.0, 1.0}) {
        const auto c = density_coefficients(Family::Bernoulli, b);
        CHECK(c.c0 + c.c1 * x + c.c2 * x * x + base_measure(Family::Bernoulli, x) ==
              doctest::Approx(log_density(Family::Bernoulli, x, b)).epsilon(1e-12));
      }
      for (double x : {0.0, 1.0, 4.0, 17.0}) {
        const auto c = density_coefficients(Family::Poisson, p);
        CHECK(c.c0 + c.c1 * x + c.c2 * x * x + base_measure(Family::Poisson, x) ==
              doctest::Approx(log_density(Family::Poisson, x, p)).epsilon(1e-12));
      }
      for (double x : {-3.5, 0.0, 2.25}) {
        const auto c = density_coefficients(Family::Gaussian, g);
        CHECK(c.c0 + c.c1 * x + c.c2 * x * x + base_measure(Family::Gaussian, x) ==
              doctest::Approx(log_density(Family::Gaussian, x, g)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("M-step estimates") {
    // X = [[1,0],[0,1]], unit weights, single block each side
    CHECK(mstep_parameter(2.0, 2.0, 4.0, Family::Bernoulli).alpha == 0.5);
    const auto zero = mstep_parameter(0.0, 0.0, 5.0, Family::Bernoulli);
    CHECK(zero.alpha == 0.0);
    CHECK_FALSE(zero.degenerate);
    CHECK(effective_alpha(Family::Bernoulli, zero.alpha) == 1e-8);
    const auto g = mstep_parameter(1.0 + 3.0, 1.0 + 9.0, 2.0, Family::Gaussian);
    CHECK(g.alpha == 2.0);
    CHECK(g.variance == 1.0);
  }

  TEST_CASE("variance floor and empty-block fallback") {
    const auto flat = mstep_parameter(6.0, 12.0, 3.0, Family::Gaussian);
    CHECK(flat.variance == kVarianceFloor);
    const BlockPairParameter fb{0.3, 2.0, false};
    const auto empty = mstep_parameter(0.0, 0.0, 1e-12, Family::Gaussian, fb);
    CHECK(empty.degenerate);
    CHECK(empty.alpha == 0.3);
    CHECK(empty.variance == 2.0);
    CHECK_THROWS_AS(mstep_parameter(0.0, 0.0, -1.0, Family::Bernoulli), std::invalid_argument);
  }

  TEST_CASE("M-step maximises the weighted log-density") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 300; ++rep) {
      const Family f = static_cast<Family>(rep % 3);
      const int n = 3 + rep % 17;
      std::vector<double> x(n), w(n);
      double sw = 0, sx = 0, sxx = 0;
      for (int i = 0; i < n; ++i) {
        switch (f) {
          case Family::Bernoulli: x[i] = u(gen) < 0.4 ? 1.0 : 0.0; break;
          case Family::Poisson: x[i] = std::floor(6 * u(gen)); break;
          case Family::Gaussian: x[i] = 4 * u(gen) - 2; break;
        }
        w[i] = u(gen);
        sw += w[i];
        sx += w[i] * x[i];
        sxx += w[i] * x[i] * x[i];
      }
      const auto best = mstep_parameter(sx, sxx, sw, f);
      const double at = weighted_objective(f, x, w, best);
      for (double d : {-1e-3, 1e-3}) {
        BlockPairParameter a = best;
        a.alpha += d;
        if (f == Family::Bernoulli && (a.alpha <= 0 || a.alpha >= 1)) continue;
        if (f == Family::Poisson && a.alpha <= 0) continue;
        CHECK(weighted_objective(f, x, w, a) <= at + 1e-12);
        if (f == Family::Gaussian && best.variance > kVarianceFloor) {
          BlockPairParameter v = best;
          v.variance += d * best.variance;
          CHECK(weighted_objective(f, x, w, v) <= at + 1e-12);
        }
      }
    }
  }

  TEST_CASE("family names and dimensions") {
    CHECK(parameter_dimension(Family::Gaussian) == 2);
    CHECK(parameter_dimension(Family::Poisson) == 1);
    CHECK(parse_family("bernoulli") == Family::Bernoulli);
    CHECK(std::string(family_name(Family::Poisson)) == "poisson");
    CHECK_THROWS_AS(parse_family("cauchy"), ValidationError);
  }
}
