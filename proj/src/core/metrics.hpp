#ifndef MBM_CORE_METRICS_HPP
#define MBM_CORE_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "core/network.hpp"
#include "core/vem.hpp"

namespace mbm {

// Hubert-Arabie adjusted Rand index. Returns 1 when the index is undefined
// (both partitions a single cluster, or both all singletons).
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

// perm[g][estimated block] = matched true block. `aligned` is false when the
// block counts differ; perm is then the identity over the estimated blocks.
struct Alignment {
  std::vector<std::vector<int>> perm;
  bool aligned = true;
};

// Permutation of estimated labels maximising agreement with `truth`, exact
// search with lexicographically smallest permutation among ties.
std::vector<int> best_assignment(const Grid<long>& agreement);

Alignment align_labels(const Labels& truth, const Labels& estimate, const ModelSize& true_k, const ModelSize& est_k);
Alignment invert(const Alignment& a);

MbmParameters apply_alignment(const MbmParameters& params, const Alignment& a, const std::vector<InteractionSpec>& pairs);
Labels apply_alignment(const Labels& labels, const Alignment& a);

// Per-replicate comparison of a fit with its generating truth.
struct ReplicateRecovery {
  ModelSize true_k, est_k;
  std::vector<double> ari;  // per group
  bool aligned = false;
  // est - true per alpha entry (matrix, k, l), only when aligned
  std::vector<double> alpha_error;
};

ReplicateRecovery compare_with_truth(const std::vector<InteractionSpec>& pairs, const MbmParameters& truth_params,
                                     const Labels& truth_z, const MbmParameters& est_params, const Labels& est_z);

struct ParameterRecovery {
  std::size_t matrix = 0;
  int row = 0, col = 0;
  double truth = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  std::size_t replicates = 0;
};

// Aggregated bias / RMSE over replicates with matching K.
struct RecoveryReport {
  std::vector<ReplicateRecovery> replicates;
  std::vector<ParameterRecovery> parameters;
  std::size_t exact_k = 0;
};

RecoveryReport summarize_recovery(const std::vector<InteractionSpec>& pairs, const MbmParameters& truth_params,
                                  std::vector<ReplicateRecovery> replicates);

}  // namespace mbm

#endif  // MBM_CORE_METRICS_HPP
