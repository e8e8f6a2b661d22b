#include "support/instances.hpp"

#include <algorithm>
#include <cmath>

namespace mbm::testing {

MultipartiteNetwork make_network(const std::vector<std::pair<std::string, std::size_t>>& groups,
                                 const std::vector<MatrixInput>& matrices) {
  std::vector<FunctionalGroup> gs;
  for (const auto& [name, n] : groups) {
    FunctionalGroup g{name, {}};
    for (std::size_t i = 0; i < n; ++i) g.node_labels.push_back(name + "_" + std::to_string(i));
    gs.push_back(std::move(g));
  }
  std::vector<ObservationMatrix> ms;
  for (const auto& m : matrices) {
    const std::size_t r = gs.at(m.spec.source).size(), c = gs.at(m.spec.target).size();
    Grid<double> v(r, c, 0.0);
    for (std::size_t i = 0; i < m.values.size(); ++i)
      for (std::size_t j = 0; j < m.values[i].size(); ++j) v(i, j) = m.values[i][j];
    Grid<std::uint8_t> mask = default_mask(m.spec, r, c);
    if (!m.mask.empty()) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) mask(i, j) = m.mask[i][j] ? 1 : 0;
    }
    ms.emplace_back(m.spec, std::move(v), std::move(mask));
  }
  return MultipartiteNetwork(std::move(gs), std::move(ms));
}

namespace {

double draw(Rng& rng, Family f, const BlockPairParameter& p) {
  switch (f) {
    case Family::Bernoulli: return rng.bernoulli(p.alpha) ? 1.0 : 0.0;
    case Family::Poisson: return static_cast<double>(rng.poisson(p.alpha));
    case Family::Gaussian: return rng.normal(p.alpha, std::sqrt(p.variance));
  }
  return 0.0;
}

std::vector<double> random_simplex(Rng& rng, int k) {
  std::vector<double> w(k);
  double s = 0.0;
  for (auto& x : w) {
    x = 0.2 + rng.uniform();
    s += x;
  }
  for (auto& x : w) x /= s;
  return w;
}

}  // namespace

MbmParameters random_parameters(Rng& rng, const MultipartiteNetwork& net, const ModelSize& k) {
  MbmParameters p;
  for (std::size_t q = 0; q < net.num_groups(); ++q) p.pi.push_back(random_simplex(rng, k[q]));
  for (const auto& m : net.matrices()) {
    const auto& s = m.spec();
    Grid<BlockPairParameter> a(k[s.source], k[s.target]);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (std::size_t c = 0; c < a.cols(); ++c) {
        if (s.symmetric() && c < r) {
          a(r, c) = a(c, r);
          continue;
        }
        BlockPairParameter b;
        switch (s.family) {
          case Family::Bernoulli: b.alpha = 0.05 + 0.9 * rng.uniform(); break;
          case Family::Poisson: b.alpha = 0.2 + 4.8 * rng.uniform(); break;
          case Family::Gaussian:
            b.alpha = rng.normal(0.0, 2.0);
            b.variance = 0.3 + 1.7 * rng.uniform();
            break;
        }
        a(r, c) = b;
      }
    }
    p.alpha.push_back(std::move(a));
  }
  return p;
}

VariationalAssignment random_tau(Rng& rng, const MultipartiteNetwork& net, const ModelSize& k) {
  VariationalAssignment t;
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    Grid<double> g(net.group(q).size(), k[q]);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double s = 0.0;
      for (std::size_t l = 0; l < g.cols(); ++l) s += g(i, l) = 0.01 + rng.uniform();
      for (std::size_t l = 0; l < g.cols(); ++l) g(i, l) /= s;
    }
    t.tau.push_back(std::move(g));
  }
  return t;
}

Labels random_labels(Rng& rng, const MultipartiteNetwork& net, const ModelSize& k) {
  Labels z(net.num_groups());
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    z[q].resize(net.group(q).size());
    for (auto& v : z[q]) v = static_cast<int>(rng.below(k[q]));
  }
  return z;
}

Instance random_instance(Rng& rng, const std::vector<std::size_t>& sizes, const std::vector<InteractionSpec>& pairs,
                         const ModelSize& k, bool with_missing) {
  std::vector<std::pair<std::string, std::size_t>> groups;
  for (std::size_t q = 0; q < sizes.size(); ++q) groups.emplace_back("g" + std::to_string(q), sizes[q]);
  // Parameters are drawn against an empty-valued network of the right shape.
  std::vector<MatrixInput> blank;
  for (const auto& s : pairs) blank.push_back({s, {}, {}});
  const MultipartiteNetwork shape = make_network(groups, blank);
  MbmParameters params = random_parameters(rng, shape, k);

  Labels z(sizes.size());
  for (std::size_t q = 0; q < sizes.size(); ++q) {
    for (std::size_t i = 0; i < sizes[q]; ++i) z[q].push_back(static_cast<int>(rng.categorical(params.pi[q])));
  }

  std::vector<MatrixInput> inputs;
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const auto& s = pairs[m];
    const std::size_t r = sizes[s.source], c = sizes[s.target];
    MatrixInput in{s, std::vector<std::vector<double>>(r, std::vector<double>(c, 0.0)),
                   std::vector<std::vector<int>>(r, std::vector<int>(c, 1))};
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        if (s.intra() && i == j && !s.self_loops) {
          in.mask[i][j] = 0;
          continue;
        }
        if (s.symmetric() && j < i) continue;
        const bool observed = !with_missing || rng.uniform() >= 0.1;
        const double x = observed ? draw(rng, s.family, params.alpha[m](z[s.source][i], z[s.target][j])) : 0.0;
        in.values[i][j] = x;
        in.mask[i][j] = observed;
        if (s.symmetric()) {
          in.values[j][i] = x;
          in.mask[j][i] = observed;
        }
      }
    }
    inputs.push_back(std::move(in));
  }
  return {make_network(groups, inputs), k, std::move(params), std::move(z)};
}

Instance random_instance(Rng& rng, const RandomShape& shape) {
  const std::size_t q_count = 1 + rng.below(shape.max_groups);
  std::vector<std::size_t> sizes;
  std::vector<int> k;
  for (std::size_t q = 0; q < q_count; ++q) {
    sizes.push_back(shape.min_nodes + rng.below(shape.max_nodes - shape.min_nodes + 1));
    k.push_back(1 + static_cast<int>(rng.below(shape.max_blocks)));
  }
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t a = 0; a < q_count; ++a)
    for (std::size_t b = 0; b < q_count; ++b)
      if (a != b || shape.allow_intra) candidates.emplace_back(a, b);
  if (candidates.empty()) candidates.emplace_back(0, 0);
  // Shuffle and keep a random prefix, at least one pair.
  for (std::size_t i = candidates.size(); i > 1; --i) std::swap(candidates[i - 1], candidates[rng.below(i)]);
  const std::size_t n_pairs = 1 + rng.below(std::min<std::size_t>(shape.max_pairs, candidates.size()));
  candidates.resize(n_pairs);
  std::sort(candidates.begin(), candidates.end());

  std::vector<InteractionSpec> pairs;
  for (const auto& [a, b] : candidates) {
    InteractionSpec s;
    s.source = a;
    s.target = b;
    s.family = shape.families[rng.below(shape.families.size())];
    if (a == b) {
      s.orientation = rng.bernoulli(0.5) ? Orientation::Oriented : Orientation::NonOriented;
      s.self_loops = rng.bernoulli(0.3);
    }
    pairs.push_back(s);
  }
  // An intra-group matrix on a one-node group without self-loops has no
  // dyads at all, which is legal but useless; give it a self-loop.
  for (auto& s : pairs)
    if (s.intra() && sizes[s.source] == 1) s.self_loops = true;
  return random_instance(rng, sizes, pairs, ModelSize(k), shape.allow_missing);
}

bool same_network(const MultipartiteNetwork& a, const MultipartiteNetwork& b) {
  if (a.num_groups() != b.num_groups() || a.num_matrices() != b.num_matrices()) return false;
  for (std::size_t q = 0; q < a.num_groups(); ++q) {
    if (a.group(q).name != b.group(q).name || a.group(q).node_labels != b.group(q).node_labels) return false;
  }
  for (std::size_t m = 0; m < a.num_matrices(); ++m) {
    const auto& x = a.matrix(m);
    const auto& y = b.matrix(m);
    const auto& sx = x.spec();
    const auto& sy = y.spec();
    if (sx.source != sy.source || sx.target != sy.target || sx.family != sy.family ||
        sx.orientation != sy.orientation || sx.self_loops != sy.self_loops) {
      return false;
    }
    if (!(x.values() == y.values()) || !(x.mask() == y.mask())) return false;
  }
  return true;
}

}  // namespace mbm::testing
