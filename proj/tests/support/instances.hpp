#ifndef MBM_TESTS_INSTANCES_HPP
#define MBM_TESTS_INSTANCES_HPP

#include <string>
#include <vector>

#include "core/network.hpp"
#include "core/rng.hpp"
#include "core/vem.hpp"

namespace mbm::testing {

// Network from plain nested vectors. Nodes are named "<group>_<index>".
// An empty mask means default_mask.
struct MatrixInput {
  InteractionSpec spec;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<int>> mask;
};

MultipartiteNetwork make_network(const std::vector<std::pair<std::string, std::size_t>>& groups,
                                 const std::vector<MatrixInput>& matrices);

struct RandomShape {
  int max_groups = 3;
  int max_nodes = 20;
  int min_nodes = 1;
  int max_blocks = 3;
  int max_pairs = 4;
  bool allow_intra = true;
  bool allow_missing = true;
  std::vector<Family> families = {Family::Bernoulli, Family::Poisson, Family::Gaussian};
};

struct Instance {
  MultipartiteNetwork net;
  ModelSize k;
  MbmParameters params;
  Labels truth;
};

// Random groups, relations (families, orientation, self-loops, missing
// dyads), K, parameters, and data drawn from the model.
Instance random_instance(Rng& rng, const RandomShape& shape);

// Random instance with a fixed structure: sizes per group and relations.
Instance random_instance(Rng& rng, const std::vector<std::size_t>& sizes, const std::vector<InteractionSpec>& pairs,
                         const ModelSize& k, bool with_missing);

MbmParameters random_parameters(Rng& rng, const MultipartiteNetwork& net, const ModelSize& k);
VariationalAssignment random_tau(Rng& rng, const MultipartiteNetwork& net, const ModelSize& k);
Labels random_labels(Rng& rng, const MultipartiteNetwork& net, const ModelSize& k);

bool same_network(const MultipartiteNetwork& a, const MultipartiteNetwork& b);

}  // namespace mbm::testing

#endif  // MBM_TESTS_INSTANCES_HPP
