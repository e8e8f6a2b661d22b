#ifndef MBM_CORE_CRITERIA_HPP
#define MBM_CORE_CRITERIA_HPP

#include "core/network.hpp"
#include "core/vem.hpp"

namespace mbm {

// log l_c(X, Z; theta) for hard labels Z.
double complete_log_likelihood(const MultipartiteNetwork& net, const MbmParameters& params, const Labels& z);

// Asymptotic penalty of the ICL:
//   1/2 [ sum_q (K_q - 1) log n_q + (sum_E d |A|) log(sum_E |S|) ]
// The two parts are returned separately.
struct Penalty {
  double clustering = 0.0;
  double edges = 0.0;
  double total() const { return clustering + edges; }
};
Penalty penalty_terms(const MultipartiteNetwork& net, const ModelSize& k);
double penalty(const MultipartiteNetwork& net, const ModelSize& k);

IclReport icl(const MultipartiteNetwork& net, const MbmParameters& params, const Labels& z);

}  // namespace mbm

#endif  // MBM_CORE_CRITERIA_HPP
