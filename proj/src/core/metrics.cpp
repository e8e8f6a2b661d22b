#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mbm {

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: length mismatch");
  if (a.empty()) throw std::invalid_argument("adjusted_rand_index: empty input");
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, n] : cells) index += choose2(n);
  for (const auto& [key, n] : rows) sa += choose2(n);
  for (const auto& [key, n] : cols) sb += choose2(n);
  const double total = choose2(static_cast<double>(a.size()));
  if (total == 0.0) return 1.0;
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

std::vector<int> best_assignment(const Grid<long>& agreement) {
  // agreement(est, true); square.
  const std::size_t k = agreement.rows();
  std::vector<long> row_max(k, 0);
  for (std::size_t e = 0; e < k; ++e)
    for (std::size_t t = 0; t < k; ++t) row_max[e] = std::max(row_max[e], agreement(e, t));
  std::vector<long> suffix(k + 1, 0);
  for (std::size_t e = k; e-- > 0;) suffix[e] = suffix[e + 1] + row_max[e];

  std::vector<int> current(k), best(k);
  std::iota(best.begin(), best.end(), 0);
  long best_score = -1;
  std::vector<char> used(k, 0);
  // Depth-first in lexicographic order; only strict improvements replace the
  // incumbent, so the first optimum found is the lexicographically smallest.
  auto dfs = [&](auto&& self, std::size_t e, long score) -> void {
    if (e == k) {
      if (score > best_score) {
        best_score = score;
        best = current;
      }
      return;
    }
    if (score + suffix[e] <= best_score) return;
    for (std::size_t t = 0; t < k; ++t) {
      if (used[t]) continue;
      used[t] = 1;
      current[e] = static_cast<int>(t);
      self(self, e + 1, score + agreement(e, t));
      used[t] = 0;
    }
  };
  dfs(dfs, 0, 0);
  return best;
}

Alignment align_labels(const Labels& truth, const Labels& estimate, const ModelSize& true_k, const ModelSize& est_k) {
  if (truth.size() != estimate.size() || true_k.size() != est_k.size() || truth.size() != true_k.size()) {
    throw std::invalid_argument("align_labels: group count mismatch");
  }
  Alignment out;
  for (std::size_t q = 0; q < truth.size(); ++q) {
    if (truth[q].size() != estimate[q].size()) throw std::invalid_argument("align_labels: label length mismatch");
    std::vector<int> id(static_cast<std::size_t>(est_k[q]));
    std::iota(id.begin(), id.end(), 0);
    if (true_k[q] != est_k[q]) {
      out.aligned = false;
      out.perm.push_back(std::move(id));
      continue;
    }
    const auto k = static_cast<std::size_t>(true_k[q]);
    Grid<long> agree(k, k, 0);
    for (std::size_t i = 0; i < truth[q].size(); ++i) agree(estimate[q][i], truth[q][i]) += 1;
    out.perm.push_back(best_assignment(agree));
  }
  return out;
}

Alignment invert(const Alignment& a) {
  Alignment inv;
  inv.aligned = a.aligned;
  for (const auto& p : a.perm) {
    std::vector<int> r(p.size());
    for (std::size_t e = 0; e < p.size(); ++e) r[static_cast<std::size_t>(p[e])] = static_cast<int>(e);
    inv.perm.push_back(std::move(r));
  }
  return inv;
}

MbmParameters apply_alignment(const MbmParameters& params, const Alignment& a, const std::vector<InteractionSpec>& pairs) {
  MbmParameters out = params;
  for (std::size_t q = 0; q < params.pi.size(); ++q)
    for (std::size_t k = 0; k < params.pi[q].size(); ++k) out.pi[q][a.perm[q][k]] = params.pi[q][k];
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const auto& ps = a.perm[pairs[m].source];
    const auto& pt = a.perm[pairs[m].target];
    for (std::size_t k = 0; k < params.alpha[m].rows(); ++k)
      for (std::size_t l = 0; l < params.alpha[m].cols(); ++l) out.alpha[m](ps[k], pt[l]) = params.alpha[m](k, l);
  }
  return out;
}

Labels apply_alignment(const Labels& labels, const Alignment& a) {
  Labels out = labels;
  for (std::size_t q = 0; q < labels.size(); ++q)
    for (auto& z : out[q]) z = a.perm[q][z];
  return out;
}

ReplicateRecovery compare_with_truth(const std::vector<InteractionSpec>& pairs, const MbmParameters& truth_params,
                                     const Labels& truth_z, const MbmParameters& est_params, const Labels& est_z) {
  ReplicateRecovery r;
  r.true_k = truth_params.model_size();
  r.est_k = est_params.model_size();
  for (std::size_t q = 0; q < truth_z.size(); ++q) r.ari.push_back(adjusted_rand_index(truth_z[q], est_z[q]));
  const Alignment al = align_labels(truth_z, est_z, r.true_k, r.est_k);
  r.aligned = al.aligned;
  if (al.aligned) {
    const MbmParameters aligned = apply_alignment(est_params, al, pairs);
    for (std::size_t m = 0; m < pairs.size(); ++m) {
      const auto& t = truth_params.alpha[m];
      for (std::size_t k = 0; k < t.rows(); ++k)
        for (std::size_t l = 0; l < t.cols(); ++l) r.alpha_error.push_back(aligned.alpha[m](k, l).alpha - t(k, l).alpha);
    }
  }
  return r;
}

RecoveryReport summarize_recovery(const std::vector<InteractionSpec>& pairs, const MbmParameters& truth_params,
                                  std::vector<ReplicateRecovery> replicates) {
  RecoveryReport rep;
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const auto& t = truth_params.alpha[m];
    for (std::size_t k = 0; k < t.rows(); ++k)
      for (std::size_t l = 0; l < t.cols(); ++l)
        rep.parameters.push_back({m, static_cast<int>(k), static_cast<int>(l), t(k, l).alpha, 0.0, 0.0, 0});
  }
  for (const auto& r : replicates) {
    if (!r.aligned) continue;
    ++rep.exact_k;
    for (std::size_t p = 0; p < rep.parameters.size(); ++p) {
      rep.parameters[p].bias += r.alpha_error[p];
      rep.parameters[p].rmse += r.alpha_error[p] * r.alpha_error[p];
      ++rep.parameters[p].replicates;
    }
  }
  for (auto& p : rep.parameters) {
    if (p.replicates == 0) continue;
    const double n = static_cast<double>(p.replicates);
    p.bias /= n;
    p.rmse = std::sqrt(p.rmse / n);
  }
  rep.replicates = std::move(replicates);
  return rep;
}

}  // namespace mbm
