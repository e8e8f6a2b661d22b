#ifndef MBM_CORE_ORACLE_HPP
#define MBM_CORE_ORACLE_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "core/grid.hpp"
#include "core/network.hpp"
#include "core/vem.hpp"

namespace mbm {

// Exact computations by enumerating every membership configuration; only
// usable on tiny instances.
struct EnumerationBudget {
  double max_configurations = 1e6;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double configuration_count(const MultipartiteNetwork& net, const ModelSize& k);

// log sum_Z l_c(X, Z; theta)
double exact_log_likelihood(const MultipartiteNetwork& net, const MbmParameters& params,
                            const EnumerationBudget& budget = {});

// P(Z^q_i = k | X; theta) per group.
std::vector<Grid<double>> exact_posterior_marginals(const MultipartiteNetwork& net, const MbmParameters& params,
                                                    const EnumerationBudget& budget = {});

}  // namespace mbm

#endif  // MBM_CORE_ORACLE_HPP
