#ifndef MBM_CORE_VEM_HPP
#define MBM_CORE_VEM_HPP

#include <compare>
#include <string>
#include <vector>

#include "core/emissions.hpp"
#include "core/grid.hpp"
#include "core/network.hpp"

namespace mbm {

// Block counts (K_1, ..., K_Q).
class ModelSize {
 public:
  ModelSize() = default;
  explicit ModelSize(std::vector<int> blocks);

  std::size_t size() const { return blocks_.size(); }
  int operator[](std::size_t q) const { return blocks_[q]; }
  const std::vector<int>& blocks() const { return blocks_; }
  ModelSize with(std::size_t q, int k) const;
  // "3,2"
  std::string to_string() const;

  auto operator<=>(const ModelSize&) const = default;

 private:
  std::vector<int> blocks_;
};

ModelSize parse_model_size(const std::string& s);

struct MbmParameters {
  // pi[q][k]
  std::vector<std::vector<double>> pi;
  // alpha[m](k, k') for matrix m; both halves are stored (and equal) for
  // non-oriented intra-group relations.
  std::vector<Grid<BlockPairParameter>> alpha;

  ModelSize model_size() const;
};

// Mean-field membership probabilities: tau[q](i, k).
struct VariationalAssignment {
  std::vector<Grid<double>> tau;

  ModelSize model_size() const;
};

using Labels = std::vector<std::vector<int>>;

struct IclReport {
  double complete_log_likelihood = 0.0;
  double clustering_penalty = 0.0;
  double edge_penalty = 0.0;
  double penalty = 0.0;
  double icl = 0.0;
};

struct FitOptions {
  double tol = 1e-6;
  int max_iter = 200;
  double inner_tol = 1e-4;
  int max_inner = 50;
};

struct FitResult {
  ModelSize k;
  MbmParameters params;
  VariationalAssignment tau;
  double elbo = 0.0;
  std::vector<double> elbo_trace;
  Labels map_clustering;  // 0-based blocks
  IclReport icl;
  bool converged = false;
  int n_iterations = 0;
};

// Evidence lower bound I_theta(R_tau): entropy + expected complete
// log-likelihood under the mean-field distribution.
double elbo(const MultipartiteNetwork& net, const MbmParameters& params, const VariationalAssignment& tau);

// Gauss-Seidel fixed-point iteration of the VE equations.
VariationalAssignment ve_step(const MultipartiteNetwork& net, const MbmParameters& params,
                              const VariationalAssignment& tau_in, double inner_tol = 1e-4, int max_inner = 50);

// Closed-form maximisation of the ELBO in theta for fixed tau.
MbmParameters m_step(const MultipartiteNetwork& net, const VariationalAssignment& tau);

// Alternates M and VE steps from `init` until the relative ELBO change drops
// below options.tol.
FitResult fit(const MultipartiteNetwork& net, const VariationalAssignment& init, const FitOptions& options = {});

// Per-row argmax of tau, ties to the lowest block index.
Labels map_clustering(const VariationalAssignment& tau);

// Smoothed one-hot initialisation from hard labels.
VariationalAssignment init_from_clustering(const MultipartiteNetwork& net, const ModelSize& k, const Labels& labels,
                                           double smoothing = 0.1);

void check_shapes(const MultipartiteNetwork& net, const MbmParameters& params);
void check_shapes(const MultipartiteNetwork& net, const VariationalAssignment& tau);

}  // namespace mbm

#endif  // MBM_CORE_VEM_HPP
