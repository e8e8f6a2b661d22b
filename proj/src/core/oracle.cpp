#include "core/oracle.hpp"

#include <cmath>
#include <limits>

#include "core/criteria.hpp"

namespace mbm {

double configuration_count(const MultipartiteNetwork& net, const ModelSize& k) {
  double count = 1.0;
  for (std::size_t q = 0; q < net.num_groups(); ++q) count *= std::pow(static_cast<double>(k[q]), net.group(q).size());
  return count;
}

namespace {

// Visits every configuration in lexicographic order (last node of the last
// group varies fastest) and hands its complete log-likelihood to `visit`.
template <typename Visit>
void enumerate(const MultipartiteNetwork& net, const MbmParameters& params, const EnumerationBudget& budget,
               Visit&& visit) {
  check_shapes(net, params);
  const ModelSize k = params.model_size();
  if (configuration_count(net, k) > budget.max_configurations) {
    throw BudgetExceeded("configuration space exceeds the enumeration budget");
  }
  Labels z(net.num_groups());
  for (std::size_t q = 0; q < net.num_groups(); ++q) z[q].assign(net.group(q).size(), 0);
  while (true) {
    visit(z, complete_log_likelihood(net, params, z));
    // odometer increment
    bool carry = true;
    for (std::size_t q = net.num_groups(); carry && q-- > 0;) {
      for (std::size_t i = z[q].size(); carry && i-- > 0;) {
        if (++z[q][i] < k[q]) {
          carry = false;
        } else {
          z[q][i] = 0;
        }
      }
    }
    if (carry) break;
  }
}

struct LogSumExp {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;

  void add(double v) {
    if (v == -std::numeric_limits<double>::infinity()) return;
    if (v > max) {
      sum = sum * std::exp(max - v) + 1.0;
      max = v;
    } else {
      sum += std::exp(v - max);
    }
  }
  double value() const { return sum > 0.0 ? max + std::log(sum) : -std::numeric_limits<double>::infinity(); }
};

}  // namespace

double exact_log_likelihood(const MultipartiteNetwork& net, const MbmParameters& params,
                            const EnumerationBudget& budget) {
  LogSumExp acc;
  enumerate(net, params, budget, [&](const Labels&, double v) { acc.add(v); });
  return acc.value();
}

std::vector<Grid<double>> exact_posterior_marginals(const MultipartiteNetwork& net, const MbmParameters& params,
                                                    const EnumerationBudget& budget) {
  const double log_z = exact_log_likelihood(net, params, budget);
  std::vector<Grid<double>> marg;
  for (std::size_t q = 0; q < net.num_groups(); ++q) marg.emplace_back(net.group(q).size(), params.pi[q].size(), 0.0);
  enumerate(net, params, budget, [&](const Labels& z, double v) {
    const double w = std::exp(v - log_z);
    for (std::size_t q = 0; q < z.size(); ++q)
      for (std::size_t i = 0; i < z[q].size(); ++i) marg[q](i, z[q][i]) += w;
  });
  return marg;
}

}  // namespace mbm
