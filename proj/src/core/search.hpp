#ifndef MBM_CORE_SEARCH_HPP
#define MBM_CORE_SEARCH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/network.hpp"
#include "core/vem.hpp"

namespace mbm {

struct SearchConfig {
  // Upper bound K*_q per group; empty means 10 for every group.
  std::vector<int> k_max;
  // Split proposals per group and move; 0 means one per existing cluster.
  // Extra proposals beyond K_q bipartition random clusters at random.
  int n_split_restarts = 0;
  std::uint64_t seed = 0;
  // Concurrent candidate fits; <= 0 means hardware concurrency.
  int workers = 1;
  FitOptions fit;
  double smoothing = 0.1;
  int max_outer = 100;

  int bound(std::size_t q) const { return k_max.empty() ? 10 : k_max.at(q); }
};

struct SearchStep {
  int start = 0;
  int iteration = 0;
  ModelSize k;
  double icl = 0.0;
  // "start", "split:<group>", "merge:<group>"
  std::string move;
};

struct SearchTrace {
  // Accepted models in order, per start.
  std::vector<SearchStep> steps;
  // Best ICL reached by any fit at each visited K.
  std::map<ModelSize, double> visited;
};

struct SearchOutcome {
  FitResult best;
  SearchTrace trace;
  int best_start = 0;
};

std::vector<VariationalAssignment> split_candidates(const MultipartiteNetwork& net, const FitResult& current,
                                                    std::size_t q, const SearchConfig& config = {});
std::vector<VariationalAssignment> merge_candidates(const MultipartiteNetwork& net, const FitResult& current,
                                                    std::size_t q, double smoothing = 0.1);

// Stepwise split/merge exploration from each start; returns the highest-ICL
// model over all starts.
SearchOutcome search(const MultipartiteNetwork& net, const SearchConfig& config, const std::vector<Labels>& starts);

// Per-group starting clustering from independent single-matrix searches.
Labels independent_start(const MultipartiteNetwork& net, const SearchConfig& config);

// All-ones start plus the independent start.
SearchOutcome select_model(const MultipartiteNetwork& net, const SearchConfig& config);

Labels single_cluster_labels(const MultipartiteNetwork& net);

// Bipartition of points (rows) by 2-means with farthest-point seeding.
// Returns 0/1 per point; deterministic.
std::vector<int> two_means(const std::vector<std::vector<double>>& points);

}  // namespace mbm

#endif  // MBM_CORE_SEARCH_HPP
