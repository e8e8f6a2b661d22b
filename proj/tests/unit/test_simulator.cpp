#include "core/simulator.hpp"

#include <cmath>

#include "core/network_io.hpp"
#include "doctest.h"
#include "support/instances.hpp"
#include "unit/common.hpp"

using namespace mbm;
using namespace mbm::testing;

namespace {

GeneratorSpec one_pair(double alpha, std::vector<double> pi, Family f = Family::Bernoulli) {
  GeneratorSpec spec;
  spec.groups = {{"a", 50}, {"b", 40}};
  InteractionSpec s;
  s.source = 0;
  s.target = 1;
  s.family = f;
  spec.pairs = {s};
  const std::size_t k = pi.size();
  spec.params.pi = {std::move(pi), {1.0}};
  spec.params.alpha.push_back(Grid<BlockPairParameter>(k, 1, {alpha, 1.0, false}));
  return spec;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("degenerate proportions and connection probabilities") {
    auto spec = one_pair(0.0, {1.0, 0.0});
    spec.seed = 1;
    const auto data = sample(spec);
    CHECK(data.truth[0] == std::vector<int>(50, 0));
    CHECK(data.network.matrix(0).total_value() == 0.0);
    auto full = one_pair(1.0, {0.0, 1.0});
    const auto d2 = sample(full);
    CHECK(d2.truth[0] == std::vector<int>(50, 1));
    CHECK(d2.network.matrix(0).total_value() == 50.0 * 40.0);
  }

  TEST_CASE("presets") {
    const auto s1 = scenario1();
    CHECK(s1.groups.size() == 4);
    CHECK(s1.model_size().blocks() == std::vector<int>{7, 2, 2, 1});
    CHECK(s1.params.alpha[2](5, 0).alpha == 0.5108);
    double total = 0.0;
    for (double p : s1.params.pi[0]) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s1.params.pi[0][0] == doctest::Approx(0.3651).epsilon(1e-3));
    const auto s2 = scenario2();
    CHECK(s2.model_size().blocks() == std::vector<int>{3, 2});
    CHECK(s2.params.alpha[0](2, 1).alpha == 0.585);
    CHECK(s2.pairs[0].intra());
    CHECK_FALSE(s2.pairs[0].self_loops);
    CHECK(s2.pairs[0].orientation == Orientation::Oriented);
    CHECK_THROWS_AS(scenario(3), ValidationError);
  }

  TEST_CASE("empirical proportions match the plant mixture") {
    std::vector<double> counts(7, 0.0);
    double n = 0.0;
    for (int r = 0; r < 200; ++r) {
      auto spec = scenario1();
      spec.seed = 1000 + r;
      const auto data = sample(spec);
      for (int v : data.truth[0]) counts[v] += 1.0;
      n += data.truth[0].size();
      CHECK(data.truth[3] == std::vector<int>(30, 0));
    }
    const auto pi = scenario1().params.pi[0];
    for (int k = 0; k < 7; ++k) {
      const double se = std::sqrt(pi[k] * (1 - pi[k]) / n);
      CHECK(std::abs(counts[k] / n - pi[k]) < 5 * se);
    }
  }

  TEST_CASE("sample means follow the law of large numbers") {
    for (Family f : {Family::Bernoulli, Family::Poisson, Family::Gaussian}) {
      const double a = f == Family::Bernoulli ? 0.3 : (f == Family::Poisson ? 2.5 : -1.5);
      auto spec = one_pair(a, {1.0}, f);
      spec.groups = {{"a", 300}, {"b", 200}};
      spec.seed = 77;
      const auto data = sample(spec);
      const auto& m = data.network.matrix(0);
      const double n = 60000.0;
      const double mean = m.total_value() / n;
      const double var = m.total_square() / n - mean * mean;
      const double expected_var = f == Family::Bernoulli ? a * (1 - a) : (f == Family::Poisson ? a : 1.0);
      CHECK(std::abs(mean - a) < 5 * std::sqrt(expected_var / n));
      CHECK(var == doctest::Approx(expected_var).epsilon(0.05));
    }
  }

  TEST_CASE("seeded determinism") {
    auto spec = scenario2();
    spec.seed = 9;
    const auto a = sample(spec), b = sample(spec);
    CHECK(same_network(a.network, b.network));
    CHECK(a.truth == b.truth);
    spec.seed = 10;
    const auto c = sample(spec);
    CHECK_FALSE(c.network.matrix(0).values() == a.network.matrix(0).values());
  }

  TEST_CASE("generated networks respect the declared structure") {
    for (int r = 0; r < 10; ++r) {
      auto spec = scenario2();
      spec.seed = r;
      const auto data = sample(spec);
      const auto& ex = data.network.matrix(0);
      for (std::size_t i = 0; i < 30; ++i) {
        CHECK_FALSE(ex.observed(i, i));
        CHECK(ex.value(i, i) == 0.0);
      }
      CHECK(ex.dyad_count() == 870);
      CHECK(data.network.matrix(1).dyad_count() == 1110);
      for (double v : ex.values().data()) CHECK((v == 0.0 || v == 1.0));
    }
    GeneratorSpec sym;
    sym.groups = {{"a", 12}};
    InteractionSpec s;
    s.orientation = Orientation::NonOriented;
    s.family = Family::Poisson;
    s.self_loops = true;
    sym.pairs = {s};
    sym.params.pi = {{0.5, 0.5}};
    Grid<BlockPairParameter> g(2, 2, {1.0, 1.0, false});
    g(0, 1).alpha = g(1, 0).alpha = 4.0;
    sym.params.alpha.push_back(g);
    const auto d = sample(sym);
    const auto& m = d.network.matrix(0);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) CHECK(m.value(i, j) == m.value(j, i));
  }

  TEST_CASE("invalid specs") {
    auto spec = one_pair(0.5, {0.5, 0.4});
    CHECK_THROWS_AS(sample(spec), ValidationError);
    spec = one_pair(1.5, {1.0});
    CHECK_THROWS_AS(sample(spec), ValidationError);
    spec = one_pair(-1.0, {1.0}, Family::Poisson);
    CHECK_THROWS_AS(sample(spec), ValidationError);
    spec = one_pair(0.5, {1.0});
    spec.groups[1].size = 0;
    CHECK_THROWS_AS(sample(spec), ValidationError);
    CHECK_THROWS_AS(spec_from_json("{"), ParseError);
    CHECK_THROWS_AS(load_spec("/nonexistent/spec.json"), IoError);
  }

  TEST_CASE("spec JSON round trip and dataset directory") {
    auto spec = scenario1();
    spec.seed = 42;
    const auto back = spec_from_json(spec_to_json(spec));
    CHECK(back.seed == 42);
    CHECK(back.params.pi == spec.params.pi);
    for (std::size_t m = 0; m < spec.pairs.size(); ++m) CHECK(back.params.alpha[m] == spec.params.alpha[m]);
    const auto a = sample(spec), b = sample(back);
    CHECK(same_network(a.network, b.network));

    const auto dir = scratch_dir("simulator_dataset");
    write_dataset(spec, a, dir);
    const auto net = load_network(dir / "config.json", dir);
    CHECK(same_network(net, a.network));
    CHECK(read_labels(net, dir / "labels.csv") == a.truth);
    CHECK(load_spec(dir / "truth.json").params.pi == spec.params.pi);
  }
}
