#include "core/network.hpp"

#include <algorithm>
#include <set>

namespace mbm {

const char* orientation_name(Orientation o) {
  return o == Orientation::Oriented ? "oriented" : "non-oriented";
}

Orientation parse_orientation(const std::string& s) {
  if (s == "oriented") return Orientation::Oriented;
  if (s == "non-oriented" || s == "nonoriented" || s == "undirected") return Orientation::NonOriented;
  throw ValidationError("unknown orientation '" + s + "'");
}

Grid<std::uint8_t> default_mask(const InteractionSpec& spec, std::size_t rows, std::size_t cols) {
  Grid<std::uint8_t> mask(rows, cols, 1);
  if (spec.intra() && !spec.self_loops) {
    for (std::size_t i = 0; i < std::min(rows, cols); ++i) mask(i, i) = 0;
  }
  return mask;
}

ObservationMatrix::ObservationMatrix(InteractionSpec spec, Grid<double> values, Grid<std::uint8_t> mask)
    : spec_(spec), values_(std::move(values)), mask_(std::move(mask)) {
  const std::size_t n = values_.rows(), m = values_.cols();
  if (mask_.rows() != n || mask_.cols() != m) throw ValidationError("mask shape does not match values");
  if (spec_.orientation == Orientation::NonOriented && !spec_.intra()) {
    throw ValidationError("non-oriented relations are only defined within one functional group");
  }
  if (spec_.intra() && n != m) throw ValidationError("intra-group matrix must be square");

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!mask_(i, j)) {
        values_(i, j) = 0.0;
        continue;
      }
      if (!in_support(spec_.family, values_(i, j))) {
        throw ValidationError("value " + std::to_string(values_(i, j)) + " violates the " +
                              family_name(spec_.family) + " family");
      }
    }
  }
  if (spec_.intra()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!spec_.self_loops && mask_(i, i)) throw ValidationError("self-loop dyad present but self_loops is false");
    }
  }
  if (spec_.symmetric()) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (mask_(i, j) != mask_(j, i)) throw ValidationError("non-oriented mask is not symmetric");
        if (mask_(i, j) && values_(i, j) != values_(j, i)) {
          throw ValidationError("non-oriented matrix is not symmetric");
        }
      }
    }
  }

  row_nz_.resize(n);
  row_missing_.resize(n);
  col_nz_.resize(m);
  col_missing_.resize(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (spec_.intra() && i == j) continue;
      if (!mask_(i, j)) {
        row_missing_[i].push_back(static_cast<std::uint32_t>(j));
        col_missing_[j].push_back(static_cast<std::uint32_t>(i));
      } else if (values_(i, j) != 0.0) {
        row_nz_[i].push_back({static_cast<std::uint32_t>(j), values_(i, j)});
        col_nz_[j].push_back({static_cast<std::uint32_t>(i), values_(i, j)});
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = spec_.symmetric() ? i : 0;
    for (std::size_t j = j0; j < m; ++j) {
      if (!mask_(i, j)) continue;
      const double x = values_(i, j);
      ++dyad_count_;
      total_ += x;
      total_sq_ += x * x;
      base_total_ += base_measure(spec_.family, x);
    }
  }
}

MultipartiteNetwork::MultipartiteNetwork(std::vector<FunctionalGroup> groups, std::vector<ObservationMatrix> matrices)
    : groups_(std::move(groups)), matrices_(std::move(matrices)) {
  if (groups_.empty()) throw ValidationError("network has no functional groups");
  std::set<std::string> names;
  for (const auto& g : groups_) {
    if (g.size() == 0) throw ValidationError("functional group '" + g.name + "' is empty");
    if (!names.insert(g.name).second) throw ValidationError("duplicate functional group '" + g.name + "'");
    std::set<std::string> labels(g.node_labels.begin(), g.node_labels.end());
    if (labels.size() != g.size()) throw ValidationError("duplicate node label in group '" + g.name + "'");
  }
  touching_.resize(groups_.size());
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t m = 0; m < matrices_.size(); ++m) {
    const auto& s = matrices_[m].spec();
    if (s.source >= groups_.size() || s.target >= groups_.size()) {
      throw ValidationError("matrix references an unknown functional group");
    }
    if (!seen.insert({s.source, s.target}).second) {
      throw ValidationError("pair (" + groups_[s.source].name + "," + groups_[s.target].name +
                            ") appears more than once");
    }
    if (matrices_[m].rows() != groups_[s.source].size() || matrices_[m].cols() != groups_[s.target].size()) {
      throw ValidationError("matrix dimensions do not match group sizes for pair (" + groups_[s.source].name + "," +
                            groups_[s.target].name + ")");
    }
    touching_[s.source].push_back(m);
    if (s.target != s.source) touching_[s.target].push_back(m);
  }
}

long MultipartiteNetwork::find_pair(std::size_t q, std::size_t qp) const {
  for (std::size_t m = 0; m < matrices_.size(); ++m) {
    if (matrices_[m].spec().source == q && matrices_[m].spec().target == qp) return static_cast<long>(m);
  }
  return -1;
}

std::size_t MultipartiteNetwork::group_index(const std::string& name) const {
  for (std::size_t q = 0; q < groups_.size(); ++q) {
    if (groups_[q].name == name) return q;
  }
  throw ValidationError("unknown functional group '" + name + "'");
}

std::vector<std::size_t> MultipartiteNetwork::group_sizes() const {
  std::vector<std::size_t> n;
  for (const auto& g : groups_) n.push_back(g.size());
  return n;
}

std::size_t MultipartiteNetwork::total_dyads() const {
  std::size_t total = 0;
  for (const auto& m : matrices_) total += m.dyad_count();
  return total;
}

std::size_t dyad_count(const MultipartiteNetwork& net, std::pair<std::size_t, std::size_t> pair) {
  const long m = net.find_pair(pair.first, pair.second);
  if (m < 0) throw std::out_of_range("pair is not in the list of observed relations");
  return net.matrix(static_cast<std::size_t>(m)).dyad_count();
}

std::vector<std::pair<int, int>> block_pair_index_set(const InteractionSpec& spec, int k_source, int k_target) {
  std::vector<std::pair<int, int>> out;
  if (spec.symmetric()) {
    for (int k = 0; k < k_source; ++k)
      for (int l = k; l < k_source; ++l) out.emplace_back(k, l);
  } else {
    for (int k = 0; k < k_source; ++k)
      for (int l = 0; l < k_target; ++l) out.emplace_back(k, l);
  }
  return out;
}

}  // namespace mbm
