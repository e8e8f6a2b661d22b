#include "core/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "core/rng.hpp"

namespace mbm {

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Relabels each group's blocks to 0..K-1 in increasing order of the
// original label values and returns the resulting model size.
ModelSize compact(Labels& labels) {
  std::vector<int> k;
  for (auto& zq : labels) {
    std::vector<int> values(zq.begin(), zq.end());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (auto& z : zq) z = static_cast<int>(std::lower_bound(values.begin(), values.end(), z) - values.begin());
    k.push_back(std::max<int>(1, static_cast<int>(values.size())));
  }
  return ModelSize(std::move(k));
}

// Expected-connectivity profile of each node of group q: for every matrix
// touching q and every block of the opposite end, the tau-weighted mean of
// the node's observed values towards that block.
std::vector<std::vector<double>> connectivity_profiles(const MultipartiteNetwork& net, const VariationalAssignment& tau,
                                                       std::size_t q) {
  const std::size_t n = net.group(q).size();
  std::vector<std::vector<double>> prof(n);
  auto add_side = [&](const ObservationMatrix& mat, bool by_row, const Grid<double>& other) {
    const std::size_t k = other.cols();
    const std::size_t partners = by_row ? mat.cols() : mat.rows();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> num(k, 0.0), den(k, 0.0);
      for (std::size_t j = 0; j < partners; ++j) {
        if (mat.spec().intra() && i == j) continue;
        const bool obs = by_row ? mat.observed(i, j) : mat.observed(j, i);
        if (!obs) continue;
        const double x = by_row ? mat.value(i, j) : mat.value(j, i);
        for (std::size_t l = 0; l < k; ++l) {
          num[l] += x * other(j, l);
          den[l] += other(j, l);
        }
      }
      for (std::size_t l = 0; l < k; ++l) prof[i].push_back(den[l] > 0.0 ? num[l] / den[l] : 0.0);
    }
  };
  for (std::size_t m : net.matrices_of(q)) {
    const auto& mat = net.matrix(m);
    const auto& s = mat.spec();
    if (s.source == q) add_side(mat, true, tau.tau[s.target]);
    if (s.target == q && !s.symmetric()) add_side(mat, false, tau.tau[s.source]);
  }
  return prof;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) d += (a[f] - b[f]) * (a[f] - b[f]);
  return d;
}

struct Proposal {
  std::size_t group = 0;
  bool split = false;
  ModelSize k;
  Labels labels;
};

std::vector<Proposal> split_proposals(const MultipartiteNetwork& net, const FitResult& current, std::size_t q,
                                      const SearchConfig& config, std::uint64_t stream) {
  const int kq = current.k[q];
  if (kq >= config.bound(q)) {
    throw std::invalid_argument("split requested for group '" + net.group(q).name + "' already at its bound");
  }
  const ModelSize k = current.k.with(q, kq + 1);
  const auto profiles = connectivity_profiles(net, current.tau, q);
  const auto& z = current.map_clustering[q];

  std::vector<Proposal> out;
  for (int c = 0; c < kq; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (z[i] == c) members.push_back(i);
    Labels labels = current.map_clustering;
    if (members.size() == 1) {
      labels[q][members[0]] = kq;
    } else if (members.size() > 1) {
      std::vector<std::vector<double>> pts;
      for (std::size_t i : members) pts.push_back(profiles[i]);
      const auto side = two_means(pts);
      for (std::size_t r = 0; r < members.size(); ++r)
        if (side[r] == 1) labels[q][members[r]] = kq;
    }
    out.push_back({q, true, k, std::move(labels)});
  }

  const int extra = config.n_split_restarts > kq ? config.n_split_restarts - kq : 0;
  if (extra > 0) {
    Rng rng(config.seed ^ (stream * 0x9E3779B97F4A7C15ull));
    for (int r = 0; r < extra; ++r) {
      const int c = static_cast<int>(rng.below(static_cast<std::size_t>(kq)));
      Labels labels = current.map_clustering;
      for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i] == c && rng.bernoulli(0.5)) labels[q][i] = kq;
      out.push_back({q, true, k, std::move(labels)});
    }
  }
  return out;
}

std::vector<Proposal> merge_proposals(const MultipartiteNetwork& net, const FitResult& current, std::size_t q) {
  const int kq = current.k[q];
  if (kq <= 1) throw std::invalid_argument("merge requested for group '" + net.group(q).name + "' with one block");
  const ModelSize k = current.k.with(q, kq - 1);
  std::vector<Proposal> out;
  for (int a = 0; a < kq; ++a) {
    for (int b = a + 1; b < kq; ++b) {
      Labels labels = current.map_clustering;
      for (auto& v : labels[q]) {
        if (v == b) {
          v = a;
        } else if (v > b) {
          --v;
        }
      }
      out.push_back({q, false, k, std::move(labels)});
    }
  }
  return out;
}

// Fits keyed by their (K, initial hard labels); shared by all starts so a
// repeated proposal is never refitted.
class FitCache {
 public:
  FitCache(const MultipartiteNetwork& net, const SearchConfig& config) : net_(net), config_(config) {}

  // Evaluates every proposal (in parallel for the uncached ones) and returns
  // pointers to the fits, aligned with `proposals`.
  std::vector<const FitResult*> evaluate(const std::vector<Proposal>& proposals) {
    std::vector<std::size_t> todo;
    std::vector<FitResult> fresh(proposals.size());
    for (std::size_t p = 0; p < proposals.size(); ++p) {
      if (!fits_.count({proposals[p].k, proposals[p].labels})) {
        bool dup = false;
        for (std::size_t t : todo) {
          if (proposals[t].k == proposals[p].k && proposals[t].labels == proposals[p].labels) dup = true;
        }
        if (!dup) todo.push_back(p);
      }
    }
    parallel_for(todo.size(), config_.workers, [&](std::size_t t) {
      const auto& prop = proposals[todo[t]];
      fresh[todo[t]] = fit(net_, init_from_clustering(net_, prop.k, prop.labels, config_.smoothing), config_.fit);
    });
    for (std::size_t t : todo) {
      const auto& prop = proposals[t];
      auto [it, inserted] = fits_.emplace(std::make_pair(prop.k, prop.labels), std::move(fresh[t]));
      note(it->second);
    }
    std::vector<const FitResult*> out;
    for (const auto& prop : proposals) out.push_back(&fits_.at({prop.k, prop.labels}));
    return out;
  }

  const FitResult* best_for(const ModelSize& k) const {
    auto it = best_.find(k);
    return it == best_.end() ? nullptr : it->second;
  }

  std::map<ModelSize, double> visited() const {
    std::map<ModelSize, double> v;
    for (const auto& [k, f] : best_) v[k] = f->icl.icl;
    return v;
  }

 private:
  void note(const FitResult& f) {
    auto& slot = best_[f.k];
    if (!slot || f.icl.icl > slot->icl.icl) slot = &f;
  }

  const MultipartiteNetwork& net_;
  const SearchConfig& config_;
  std::map<std::pair<ModelSize, Labels>, FitResult> fits_;
  std::map<ModelSize, const FitResult*> best_;
};

MultipartiteNetwork single_matrix_network(const MultipartiteNetwork& net, std::size_t m, std::vector<std::size_t>& groups) {
  const auto& mat = net.matrix(m);
  InteractionSpec s = mat.spec();
  groups = {s.source};
  if (!s.intra()) groups.push_back(s.target);
  std::vector<FunctionalGroup> g;
  for (std::size_t q : groups) g.push_back(net.group(q));
  s.source = 0;
  s.target = s.intra() ? 0 : 1;
  std::vector<ObservationMatrix> mats;
  mats.emplace_back(s, mat.values(), mat.mask());
  return MultipartiteNetwork(std::move(g), std::move(mats));
}

}  // namespace

std::vector<int> two_means(const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  std::vector<int> side(n, 0);
  if (n < 2) return side;
  const std::size_t dim = points[0].size();
  std::vector<double> centroid(dim, 0.0);
  for (const auto& p : points)
    for (std::size_t f = 0; f < dim; ++f) centroid[f] += p[f] / static_cast<double>(n);
  auto farthest = [&](const std::vector<double>& from) {
    std::size_t best = 0;
    double bd = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sq_dist(points[i], from);
      if (d > bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  };
  const std::size_t a = farthest(centroid);
  const std::size_t b = farthest(points[a]);
  if (sq_dist(points[a], points[b]) == 0.0) {
    // indistinguishable profiles: split by index
    for (std::size_t i = n / 2; i < n; ++i) side[i] = 1;
    return side;
  }
  std::vector<double> ca = points[a], cb = points[b];
  for (std::size_t i = 0; i < n; ++i) side[i] = sq_dist(points[i], cb) < sq_dist(points[i], ca) ? 1 : 0;
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> sa(dim, 0.0), sb(dim, 0.0);
    std::size_t na = 0, nb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& acc = side[i] ? sb : sa;
      (side[i] ? nb : na)++;
      for (std::size_t f = 0; f < dim; ++f) acc[f] += points[i][f];
    }
    if (na == 0 || nb == 0) break;
    for (std::size_t f = 0; f < dim; ++f) {
      ca[f] = sa[f] / static_cast<double>(na);
      cb[f] = sb[f] / static_cast<double>(nb);
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int s = sq_dist(points[i], cb) < sq_dist(points[i], ca) ? 1 : 0;
      if (s != side[i]) {
        side[i] = s;
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (std::count(side.begin(), side.end(), 1) == 0) side[b] = 1;
  if (std::count(side.begin(), side.end(), 0) == 0) side[a] = 0;
  return side;
}

std::vector<VariationalAssignment> split_candidates(const MultipartiteNetwork& net, const FitResult& current,
                                                    std::size_t q, const SearchConfig& config) {
  std::vector<VariationalAssignment> out;
  for (const auto& p : split_proposals(net, current, q, config, q))
    out.push_back(init_from_clustering(net, p.k, p.labels, config.smoothing));
  return out;
}

std::vector<VariationalAssignment> merge_candidates(const MultipartiteNetwork& net, const FitResult& current,
                                                    std::size_t q, double smoothing) {
  std::vector<VariationalAssignment> out;
  for (const auto& p : merge_proposals(net, current, q))
    out.push_back(init_from_clustering(net, p.k, p.labels, smoothing));
  return out;
}

Labels single_cluster_labels(const MultipartiteNetwork& net) {
  Labels z;
  for (const auto& g : net.groups()) z.emplace_back(g.size(), 0);
  return z;
}

SearchOutcome search(const MultipartiteNetwork& net, const SearchConfig& config, const std::vector<Labels>& starts) {
  if (starts.empty()) throw std::invalid_argument("search needs at least one start");
  if (!config.k_max.empty() && config.k_max.size() != net.num_groups()) {
    throw ValidationError("k_max has the wrong number of groups");
  }
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    if (config.bound(q) < 1) throw ValidationError("k_max entries must be >= 1");
  }

  FitCache cache(net, config);
  SearchOutcome outcome;
  bool have_best = false;

  for (std::size_t s = 0; s < starts.size(); ++s) {
    Labels labels = starts[s];
    if (labels.size() != net.num_groups()) throw ValidationError("start clustering has the wrong number of groups");
    ModelSize k = compact(labels);
    for (std::size_t q = 0; q < net.num_groups(); ++q) {
      if (k[q] > config.bound(q)) {
        // Too many start clusters: fold the surplus into the last allowed block.
        for (auto& v : labels[q]) v = std::min(v, config.bound(q) - 1);
        k = k.with(q, config.bound(q));
      }
    }
    const FitResult* current = cache.evaluate({Proposal{0, false, k, labels}}).front();
    outcome.trace.steps.push_back({static_cast<int>(s), 0, current->k, current->icl.icl, "start"});

    for (int iter = 1; iter <= config.max_outer; ++iter) {
      std::vector<Proposal> proposals;
      std::vector<std::pair<std::size_t, std::size_t>> ranges;  // per (group, move) slice of proposals
      std::vector<std::string> moves;
      for (std::size_t q = 0; q < net.num_groups(); ++q) {
        if (current->k[q] < config.bound(q)) {
          const std::uint64_t stream = (static_cast<std::uint64_t>(s) << 40) ^ (static_cast<std::uint64_t>(iter) << 16) ^ q;
          auto props = split_proposals(net, *current, q, config, stream);
          ranges.emplace_back(proposals.size(), proposals.size() + props.size());
          moves.push_back("split:" + net.group(q).name);
          for (auto& p : props) proposals.push_back(std::move(p));
        }
        if (current->k[q] > 1) {
          auto props = merge_proposals(net, *current, q);
          ranges.emplace_back(proposals.size(), proposals.size() + props.size());
          moves.push_back("merge:" + net.group(q).name);
          for (auto& p : props) proposals.push_back(std::move(p));
        }
      }
      if (proposals.empty()) break;
      const auto fits = cache.evaluate(proposals);

      const FitResult* chosen = nullptr;
      std::string chosen_move;
      double threshold = current->icl.icl;
      for (std::size_t r = 0; r < ranges.size(); ++r) {
        const FitResult* best = nullptr;
        for (std::size_t p = ranges[r].first; p < ranges[r].second; ++p) {
          if (!best || fits[p]->icl.icl > best->icl.icl) best = fits[p];
        }
        if (const FitResult* known = cache.best_for(best->k); known && known->icl.icl > best->icl.icl) best = known;
        if (best->icl.icl > threshold) {
          threshold = best->icl.icl;
          chosen = best;
          chosen_move = moves[r];
        }
      }
      if (!chosen) break;
      current = chosen;
      outcome.trace.steps.push_back({static_cast<int>(s), iter, current->k, current->icl.icl, chosen_move});
    }

    if (!have_best || current->icl.icl > outcome.best.icl.icl) {
      outcome.best = *current;
      outcome.best_start = static_cast<int>(s);
      have_best = true;
    }
  }
  outcome.trace.visited = cache.visited();
  return outcome;
}

Labels independent_start(const MultipartiteNetwork& net, const SearchConfig& config) {
  Labels labels = single_cluster_labels(net);
  std::vector<int> chosen_k(net.num_groups(), 0);
  for (std::size_t m = 0; m < net.num_matrices(); ++m) {
    std::vector<std::size_t> groups;
    const MultipartiteNetwork sub = single_matrix_network(net, m, groups);
    SearchConfig sub_config = config;
    sub_config.k_max.clear();
    for (std::size_t q : groups) sub_config.k_max.push_back(config.bound(q));
    const SearchOutcome res = search(sub, sub_config, {single_cluster_labels(sub)});
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::size_t q = groups[g];
      if (res.best.k[g] > chosen_k[q]) {
        chosen_k[q] = res.best.k[g];
        labels[q] = res.best.map_clustering[g];
      }
    }
  }
  return labels;
}

SearchOutcome select_model(const MultipartiteNetwork& net, const SearchConfig& config) {
  std::vector<Labels> starts{single_cluster_labels(net)};
  Labels indep = independent_start(net, config);
  compact(indep);
  if (indep != starts.front()) starts.push_back(std::move(indep));
  return search(net, config, starts);
}

}  // namespace mbm
