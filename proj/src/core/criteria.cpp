#include "core/criteria.hpp"

#include <cmath>
#include <limits>

namespace mbm {

namespace {

void check_labels(const MultipartiteNetwork& net, const MbmParameters& params, const Labels& z) {
  if (z.size() != net.num_groups()) throw ValidationError("labels have the wrong number of groups");
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    if (z[q].size() != net.group(q).size()) throw ValidationError("label vector has the wrong length");
    for (int k : z[q]) {
      if (k < 0 || k >= static_cast<int>(params.pi[q].size())) {
        throw std::out_of_range("label out of range for group '" + net.group(q).name + "'");
      }
    }
  }
}

}  // namespace

double complete_log_likelihood(const MultipartiteNetwork& net, const MbmParameters& params, const Labels& z) {
  check_shapes(net, params);
  check_labels(net, params, z);
  double total = 0.0;
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    for (int k : z[q]) {
      const double p = params.pi[q][static_cast<std::size_t>(k)];
      total += p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
  }
  for (std::size_t m = 0; m < net.num_matrices(); ++m) {
    const auto& mat = net.matrix(m);
    const auto& s = mat.spec();
    const auto& zs = z[s.source];
    const auto& zt = z[s.target];
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      const std::size_t j0 = s.symmetric() ? i : 0;
      for (std::size_t j = j0; j < mat.cols(); ++j) {
        if (!mat.observed(i, j)) continue;
        total += log_density(s.family, mat.value(i, j), params.alpha[m](zs[i], zt[j]));
      }
    }
  }
  return total;
}

Penalty penalty_terms(const MultipartiteNetwork& net, const ModelSize& k) {
  if (k.size() != net.num_groups()) throw ValidationError("K has the wrong number of groups");
  Penalty p;
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    p.clustering += (k[q] - 1) * std::log(static_cast<double>(net.group(q).size()));
  }
  double params = 0.0;
  for (const auto& mat : net.matrices()) {
    const auto& s = mat.spec();
    params += parameter_dimension(s.family) *
              static_cast<double>(block_pair_index_set(s, k[s.source], k[s.target]).size());
  }
  const std::size_t dyads = net.total_dyads();
  p.edges = dyads > 0 ? params * std::log(static_cast<double>(dyads)) : 0.0;
  p.clustering *= 0.5;
  p.edges *= 0.5;
  return p;
}

double penalty(const MultipartiteNetwork& net, const ModelSize& k) { return penalty_terms(net, k).total(); }

IclReport icl(const MultipartiteNetwork& net, const MbmParameters& params, const Labels& z) {
  IclReport r;
  r.complete_log_likelihood = complete_log_likelihood(net, params, z);
  const Penalty p = penalty_terms(net, params.model_size());
  r.clustering_penalty = p.clustering;
  r.edge_penalty = p.edges;
  r.penalty = p.total();
  r.icl = r.complete_log_likelihood - r.penalty;
  return r;
}

}  // namespace mbm
