#include "core/simulator.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "core/network_io.hpp"
#include "core/rng.hpp"
#include "json.hpp"

namespace mbm {

using nlohmann::json;

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  // u landed in the rounding gap: last category with positive weight
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return k;
  }
  return 0;
}

double Rng::normal(double mean, double sd) {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double rate) {
  if (rate <= 0.0) return 0;
  std::uint64_t total = 0;
  // Sum of independent Poisson(chunk) draws; inversion is exact for small
  // rates and exp(-chunk) never underflows.
  while (rate > 0.0) {
    const double chunk = std::min(rate, 30.0);
    rate -= chunk;
    const double u = uniform();
    double p = std::exp(-chunk), cdf = p;
    std::uint64_t x = 0;
    while (u >= cdf && x < 10000) {
      ++x;
      p *= chunk / static_cast<double>(x);
      cdf += p;
    }
    total += x;
  }
  return total;
}

void GeneratorSpec::validate() const {
  if (groups.empty()) throw ValidationError("generator spec has no groups");
  if (params.pi.size() != groups.size()) throw ValidationError("generator spec: pi does not match groups");
  if (params.alpha.size() != pairs.size()) throw ValidationError("generator spec: alpha does not match pairs");
  for (std::size_t q = 0; q < groups.size(); ++q) {
    if (groups[q].size == 0) throw ValidationError("generator spec: group '" + groups[q].name + "' has size 0");
    double s = 0.0;
    for (double p : params.pi[q]) {
      if (p < 0.0) throw ValidationError("generator spec: negative mixture weight");
      s += p;
    }
    if (params.pi[q].empty() || std::abs(s - 1.0) > 1e-6) {
      throw ValidationError("generator spec: pi for group '" + groups[q].name + "' does not sum to 1");
    }
  }
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const auto& s = pairs[m];
    if (s.source >= groups.size() || s.target >= groups.size()) throw ValidationError("generator spec: bad pair");
    if (s.orientation == Orientation::NonOriented && !s.intra()) {
      throw ValidationError("generator spec: non-oriented relation between different groups");
    }
    const auto& a = params.alpha[m];
    if (a.rows() != params.pi[s.source].size() || a.cols() != params.pi[s.target].size()) {
      throw ValidationError("generator spec: alpha grid shape does not match K");
    }
    for (std::size_t k = 0; k < a.rows(); ++k) {
      for (std::size_t l = 0; l < a.cols(); ++l) {
        const auto& p = a(k, l);
        if (s.family == Family::Bernoulli && (p.alpha < 0.0 || p.alpha > 1.0)) {
          throw ValidationError("generator spec: Bernoulli alpha outside [0,1]");
        }
        if (s.family == Family::Poisson && p.alpha < 0.0) throw ValidationError("generator spec: negative Poisson rate");
        if (s.family == Family::Gaussian && p.variance <= 0.0) {
          throw ValidationError("generator spec: Gaussian variance must be positive");
        }
        if (s.symmetric() && !(a(k, l) == a(l, k))) {
          throw ValidationError("generator spec: non-oriented alpha grid must be symmetric");
        }
      }
    }
  }
}

namespace {

std::vector<std::string> node_names(const std::string& prefix, std::size_t n) {
  const std::size_t width = std::to_string(n).size();
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) {
    std::string idx = std::to_string(i);
    out.push_back(prefix + "_" + std::string(width - idx.size(), '0') + idx);
  }
  return out;
}

double draw(Rng& rng, Family f, const BlockPairParameter& p) {
  switch (f) {
    case Family::Bernoulli: return rng.bernoulli(p.alpha) ? 1.0 : 0.0;
    case Family::Poisson: return static_cast<double>(rng.poisson(p.alpha));
    case Family::Gaussian: return rng.normal(p.alpha, std::sqrt(p.variance));
  }
  return 0.0;
}

Grid<BlockPairParameter> bernoulli_grid(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size(), c = rows.begin()->size();
  Grid<BlockPairParameter> g(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) g(i, j++) = BlockPairParameter{v, 1.0, false};
    ++i;
  }
  return g;
}

}  // namespace

SimulatedDataset sample(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<FunctionalGroup> groups;
  Labels z;
  for (std::size_t q = 0; q < spec.groups.size(); ++q) {
    groups.push_back({spec.groups[q].name, node_names(spec.groups[q].name, spec.groups[q].size)});
    std::vector<int> zq(spec.groups[q].size);
    for (auto& v : zq) v = static_cast<int>(rng.categorical(spec.params.pi[q]));
    z.push_back(std::move(zq));
  }
  std::vector<ObservationMatrix> matrices;
  for (std::size_t m = 0; m < spec.pairs.size(); ++m) {
    const auto& s = spec.pairs[m];
    const std::size_t n = spec.groups[s.source].size, p = spec.groups[s.target].size;
    Grid<double> values(n, p, 0.0);
    Grid<std::uint8_t> mask = default_mask(s, n, p);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j0 = s.symmetric() ? i : 0;
      for (std::size_t j = j0; j < p; ++j) {
        if (!mask(i, j)) continue;
        const double x = draw(rng, s.family, spec.params.alpha[m](z[s.source][i], z[s.target][j]));
        values(i, j) = x;
        if (s.symmetric()) values(j, i) = x;
      }
    }
    matrices.emplace_back(s, std::move(values), std::move(mask));
  }
  return {MultipartiteNetwork(std::move(groups), std::move(matrices)), std::move(z)};
}

GeneratorSpec scenario1() {
  GeneratorSpec spec;
  spec.groups = {{"plants", 141}, {"pollinators", 173}, {"ants", 46}, {"birds", 30}};
  InteractionSpec base;
  base.family = Family::Bernoulli;
  base.source = 0;
  for (std::size_t t : {1, 2, 3}) {
    base.target = t;
    spec.pairs.push_back(base);
  }
  spec.params.pi = {{0.3651, 0.1270, 0.1190, 0.1460, 0.0842, 0.0794, 0.0794}, {0.1, 0.9}, {0.1, 0.9}, {1.0}};
  // the rounded plant proportions add up to 1.0001
  double total = 0.0;
  for (double p : spec.params.pi[0]) total += p;
  for (double& p : spec.params.pi[0]) p /= total;
  spec.params.alpha.push_back(bernoulli_grid({{0.0957, 0.0075},
                                              {0.0100, 0.0},
                                              {0.0, 0.0003},
                                              {0.1652, 0.0343},
                                              {0.2018, 0.1380},
                                              {0.0, 0.0},
                                              {0.0, 0.0}}));
  spec.params.alpha.push_back(bernoulli_grid({{0.0, 0.0006},
                                              {0.5431, 0.0589},
                                              {0.0, 0.0},
                                              {0.6620, 0.1542},
                                              {0.0, 0.0},
                                              {0.0, 0.0},
                                              {0.8492, 0.3565}}));
  spec.params.alpha.push_back(
      bernoulli_grid({{0.0013}, {0.0}, {0.0753}, {0.0}, {0.0163}, {0.5108}, {0.0}}));
  return spec;
}

GeneratorSpec scenario2() {
  GeneratorSpec spec;
  spec.groups = {{"farmers", 30}, {"crops", 37}};
  InteractionSpec exchange;
  exchange.source = 0;
  exchange.target = 0;
  exchange.family = Family::Bernoulli;
  exchange.orientation = Orientation::Oriented;
  exchange.self_loops = false;
  InteractionSpec grows;
  grows.source = 0;
  grows.target = 1;
  grows.family = Family::Bernoulli;
  spec.pairs = {exchange, grows};
  spec.params.pi = {{0.31, 0.42, 0.27}, {0.65, 0.35}};
  spec.params.alpha.push_back(bernoulli_grid({{0.025, 0.123, 0.053}, {0.159, 0.3, 0.07}, {0.374, 0.585, 0.357}}));
  spec.params.alpha.push_back(bernoulli_grid({{0.186, 0.653}, {0.559, 0.905}, {0.390, 0.696}}));
  return spec;
}

GeneratorSpec scenario(int which) {
  if (which == 1) return scenario1();
  if (which == 2) return scenario2();
  throw ValidationError("unknown scenario " + std::to_string(which) + " (expected 1 or 2)");
}

std::string spec_to_json(const GeneratorSpec& spec) {
  json j;
  j["schema"] = "mbm-spec/1";
  j["seed"] = spec.seed;
  j["groups"] = json::array();
  for (std::size_t q = 0; q < spec.groups.size(); ++q) {
    j["groups"].push_back({{"name", spec.groups[q].name}, {"size", spec.groups[q].size}, {"pi", spec.params.pi[q]}});
  }
  j["pairs"] = json::array();
  for (std::size_t m = 0; m < spec.pairs.size(); ++m) {
    const auto& s = spec.pairs[m];
    const auto& a = spec.params.alpha[m];
    json alpha = json::array(), variance = json::array();
    for (std::size_t k = 0; k < a.rows(); ++k) {
      json ra = json::array(), rv = json::array();
      for (std::size_t l = 0; l < a.cols(); ++l) {
        ra.push_back(a(k, l).alpha);
        rv.push_back(a(k, l).variance);
      }
      alpha.push_back(ra);
      variance.push_back(rv);
    }
    json p = {{"source", spec.groups[s.source].name},
              {"target", spec.groups[s.target].name},
              {"family", family_name(s.family)},
              {"orientation", orientation_name(s.orientation)},
              {"self_loops", s.self_loops},
              {"alpha", alpha}};
    if (s.family == Family::Gaussian) p["variance"] = variance;
    j["pairs"].push_back(p);
  }
  return j.dump(2);
}

GeneratorSpec spec_from_json(const std::string& text) {
  GeneratorSpec spec;
  try {
    const json j = json::parse(text);
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& g : j.at("groups")) {
      spec.groups.push_back({g.at("name").get<std::string>(), g.at("size").get<std::size_t>()});
      spec.params.pi.push_back(g.at("pi").get<std::vector<double>>());
    }
    auto index_of = [&](const std::string& name) {
      for (std::size_t q = 0; q < spec.groups.size(); ++q)
        if (spec.groups[q].name == name) return q;
      throw ValidationError("generator spec references unknown group '" + name + "'");
    };
    for (const auto& p : j.at("pairs")) {
      InteractionSpec s;
      s.source = index_of(p.at("source").get<std::string>());
      s.target = index_of(p.at("target").get<std::string>());
      s.family = parse_family(p.value("family", std::string("bernoulli")));
      s.orientation = parse_orientation(p.value("orientation", std::string("oriented")));
      s.self_loops = p.value("self_loops", false);
      const auto alpha = p.at("alpha").get<std::vector<std::vector<double>>>();
      std::vector<std::vector<double>> variance;
      if (p.contains("variance")) variance = p["variance"].get<std::vector<std::vector<double>>>();
      if (alpha.empty()) throw ValidationError("generator spec: empty alpha grid");
      Grid<BlockPairParameter> g(alpha.size(), alpha[0].size());
      for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (alpha[k].size() != g.cols()) throw ValidationError("generator spec: ragged alpha grid");
        for (std::size_t l = 0; l < g.cols(); ++l) {
          g(k, l).alpha = alpha[k][l];
          if (!variance.empty()) g(k, l).variance = variance.at(k).at(l);
        }
      }
      spec.pairs.push_back(s);
      spec.params.alpha.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed generator spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

GeneratorSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open generator spec '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return spec_from_json(ss.str());
}

void write_dataset(const GeneratorSpec& spec, const SimulatedDataset& data, const std::filesystem::path& dir) {
  write_network(data.network, dir);
  write_labels(data.network, data.truth, dir / "labels.csv");
  std::ofstream out(dir / "truth.json");
  if (!out) throw IoError("cannot write '" + (dir / "truth.json").string() + "'");
  out << spec_to_json(spec) << '\n';
}

}  // namespace mbm
