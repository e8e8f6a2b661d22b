#include "core/network.hpp"

#include "doctest.h"
#include "support/instances.hpp"

using namespace mbm;
using mbm::testing::make_network;

namespace {

InteractionSpec intra(std::size_t q, Orientation o, bool loops = false) {
  InteractionSpec s;
  s.source = s.target = q;
  s.orientation = o;
  s.self_loops = loops;
  return s;
}

InteractionSpec inter(std::size_t a, std::size_t b, Family f = Family::Bernoulli) {
  InteractionSpec s;
  s.source = a;
  s.target = b;
  s.family = f;
  return s;
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("dyad counts") {
    const auto net = make_network({{"farmers", 30}, {"crops", 37}, {"small", 4}},
                                  {{intra(0, Orientation::Oriented), {}, {}},
                                   {inter(0, 1), {}, {}},
                                   {intra(2, Orientation::NonOriented), {}, {}}});
    CHECK(dyad_count(net, {0, 1}) == 1110);
    CHECK(dyad_count(net, {0, 0}) == 870);
    CHECK(dyad_count(net, {2, 2}) == 6);
    CHECK_THROWS_AS(dyad_count(net, {1, 0}), std::out_of_range);
    CHECK(net.total_dyads() == 1110 + 870 + 6);
  }

  TEST_CASE("dyad counts with self-loops") {
    const auto net = make_network({{"a", 5}, {"b", 4}}, {{intra(0, Orientation::Oriented, true), {}, {}},
                                                         {intra(1, Orientation::NonOriented, true), {}, {}}});
    CHECK(dyad_count(net, {0, 0}) == 25);
    CHECK(dyad_count(net, {1, 1}) == 10);
  }

  TEST_CASE("dyad count equals the number of observed mask cells") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
      const auto inst = mbm::testing::random_instance(rng, mbm::testing::RandomShape{});
      for (const auto& m : inst.net.matrices()) {
        std::size_t cells = 0;
        for (std::size_t i = 0; i < m.rows(); ++i)
          for (std::size_t j = 0; j < m.cols(); ++j)
            if (m.observed(i, j) && (!m.spec().symmetric() || j >= i)) ++cells;
        CHECK(m.dyad_count() == cells);
      }
    }
  }

  TEST_CASE("block pair index sets") {
    CHECK(block_pair_index_set(inter(0, 1), 3, 2).size() == 6);
    CHECK(block_pair_index_set(intra(0, Orientation::Oriented), 3, 3).size() == 9);
    const auto sym = block_pair_index_set(intra(0, Orientation::NonOriented), 3, 3);
    const std::vector<std::pair<int, int>> expected = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
    CHECK(sym == expected);
  }

  TEST_CASE("value domains are enforced") {
    CHECK_THROWS_AS(make_network({{"a", 1}, {"b", 1}}, {{inter(0, 1), {{2.0}}, {}}}), ValidationError);
    CHECK_THROWS_AS(make_network({{"a", 1}, {"b", 1}}, {{inter(0, 1, Family::Poisson), {{1.5}}, {}}}),
                    ValidationError);
    CHECK_THROWS_AS(make_network({{"a", 1}, {"b", 1}}, {{inter(0, 1, Family::Poisson), {{-1.0}}, {}}}),
                    ValidationError);
    CHECK_NOTHROW(make_network({{"a", 1}, {"b", 1}}, {{inter(0, 1, Family::Gaussian), {{-3.25}}, {}}}));
  }

  TEST_CASE("masked-out cells are not validated and read as zero") {
    const auto net = make_network({{"a", 1}, {"b", 2}}, {{inter(0, 1), {{7.0, 1.0}}, {{0, 1}}}});
    CHECK(net.matrix(0).value(0, 0) == 0.0);
    CHECK(net.matrix(0).dyad_count() == 1);
  }

  TEST_CASE("structural errors") {
    // non-oriented between two groups
    InteractionSpec bad = inter(0, 1);
    bad.orientation = Orientation::NonOriented;
    CHECK_THROWS_AS(make_network({{"a", 2}, {"b", 2}}, {{bad, {}, {}}}), ValidationError);
    // duplicate pair
    CHECK_THROWS_AS(make_network({{"a", 2}, {"b", 2}}, {{inter(0, 1), {}, {}}, {inter(0, 1), {}, {}}}),
                    ValidationError);
    // asymmetric non-oriented values
    CHECK_THROWS_AS(make_network({{"a", 2}}, {{intra(0, Orientation::NonOriented), {{0, 1}, {0, 0}}, {}}}),
                    ValidationError);
    // self-loop in the mask without self_loops
    CHECK_THROWS_AS(make_network({{"a", 2}}, {{intra(0, Orientation::Oriented), {}, {{1, 1}, {1, 1}}}}),
                    ValidationError);
    // duplicate group names
    CHECK_THROWS_AS(make_network({{"a", 2}, {"a", 2}}, {}), ValidationError);
    CHECK_THROWS_AS(make_network({}, {}), ValidationError);
  }

  TEST_CASE("non-oriented matrices are symmetric on the mask") {
    Rng rng(5);
    mbm::testing::RandomShape shape;
    shape.max_groups = 1;
    for (int rep = 0; rep < 30; ++rep) {
      const auto inst = mbm::testing::random_instance(rng, shape);
      for (const auto& m : inst.net.matrices()) {
        if (!m.spec().symmetric()) continue;
        for (std::size_t i = 0; i < m.rows(); ++i)
          for (std::size_t j = 0; j < m.cols(); ++j) {
            CHECK(m.observed(i, j) == m.observed(j, i));
            CHECK(m.value(i, j) == m.value(j, i));
          }
      }
    }
  }

  TEST_CASE("sparse indices agree with the dense grid") {
    Rng rng(9);
    for (int rep = 0; rep < 30; ++rep) {
      const auto inst = mbm::testing::random_instance(rng, mbm::testing::RandomShape{});
      for (const auto& m : inst.net.matrices()) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
          std::size_t nz = 0, missing = 0;
          for (std::size_t j = 0; j < m.cols(); ++j) {
            if (m.spec().intra() && i == j) continue;
            if (!m.observed(i, j)) ++missing;
            else if (m.value(i, j) != 0.0) ++nz;
          }
          CHECK(m.row_nonzeros(i).size() == nz);
          CHECK(m.row_missing(i).size() == missing);
        }
      }
    }
  }

  TEST_CASE("lookups") {
    const auto net = make_network({{"a", 2}, {"b", 3}}, {{inter(1, 0), {}, {}}});
    CHECK(net.group_index("b") == 1);
    CHECK_THROWS_AS(net.group_index("c"), ValidationError);
    CHECK(net.find_pair(1, 0) == 0);
    CHECK(net.find_pair(0, 1) == -1);
    CHECK(net.matrices_of(0) == std::vector<std::size_t>{0});
    CHECK(parse_orientation("non-oriented") == Orientation::NonOriented);
    CHECK_THROWS_AS(parse_orientation("sideways"), ValidationError);
  }
}
