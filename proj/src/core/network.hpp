#ifndef MBM_CORE_NETWORK_HPP
#define MBM_CORE_NETWORK_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core/emissions.hpp"
#include "core/grid.hpp"

namespace mbm {

enum class Orientation { Oriented, NonOriented };

const char* orientation_name(Orientation o);
Orientation parse_orientation(const std::string& s);

struct FunctionalGroup {
  std::string name;
  std::vector<std::string> node_labels;

  std::size_t size() const { return node_labels.size(); }
};

struct InteractionSpec {
  std::size_t source = 0;
  std::size_t target = 0;
  Family family = Family::Bernoulli;
  Orientation orientation = Orientation::Oriented;
  bool self_loops = false;

  bool intra() const { return source == target; }
  // Non-oriented intra-group relation: symmetric values, tied parameters.
  bool symmetric() const { return intra() && orientation == Orientation::NonOriented; }
};

// One observed interaction matrix X^{qq'} together with its dyad set S^{qq'}.
// Values are stored densely; sparse per-row/per-column indices over the
// nonzero observed entries and the excluded dyads are built once at
// construction and drive the inference kernels.
class ObservationMatrix {
 public:
  struct Entry {
    std::uint32_t index;
    double value;
  };

  ObservationMatrix(InteractionSpec spec, Grid<double> values, Grid<std::uint8_t> mask);

  const InteractionSpec& spec() const { return spec_; }
  std::size_t rows() const { return values_.rows(); }
  std::size_t cols() const { return values_.cols(); }
  double value(std::size_t i, std::size_t j) const { return values_(i, j); }
  bool observed(std::size_t i, std::size_t j) const { return mask_(i, j) != 0; }
  const Grid<double>& values() const { return values_; }
  const Grid<std::uint8_t>& mask() const { return mask_; }

  // Observed nonzero entries of row i / column j, diagonal excluded for
  // intra-group matrices.
  std::span<const Entry> row_nonzeros(std::size_t i) const { return row_nz_[i]; }
  std::span<const Entry> col_nonzeros(std::size_t j) const { return col_nz_[j]; }
  // Unobserved dyads of row i / column j, diagonal excluded for intra-group.
  std::span<const std::uint32_t> row_missing(std::size_t i) const { return row_missing_[i]; }
  std::span<const std::uint32_t> col_missing(std::size_t j) const { return col_missing_[j]; }

  bool diagonal_observed(std::size_t i) const { return spec_.intra() && mask_(i, i) != 0; }

  // |S^{qq'}|: unordered dyads for non-oriented relations.
  std::size_t dyad_count() const { return dyad_count_; }
  // Sum of x over S, and of x^2 (unordered for symmetric relations).
  double total_value() const { return total_; }
  double total_square() const { return total_sq_; }
  // Sum over S of the parameter-free part of the log-density (-log x! for
  // Poisson, 0 otherwise).
  double base_measure_total() const { return base_total_; }

 private:
  InteractionSpec spec_;
  Grid<double> values_;
  Grid<std::uint8_t> mask_;
  std::vector<std::vector<Entry>> row_nz_, col_nz_;
  std::vector<std::vector<std::uint32_t>> row_missing_, col_missing_;
  std::size_t dyad_count_ = 0;
  double total_ = 0.0, total_sq_ = 0.0, base_total_ = 0.0;
};

// Immutable collection of functional groups and interaction matrices.
class MultipartiteNetwork {
 public:
  MultipartiteNetwork(std::vector<FunctionalGroup> groups, std::vector<ObservationMatrix> matrices);

  std::size_t num_groups() const { return groups_.size(); }
  std::size_t num_matrices() const { return matrices_.size(); }
  const FunctionalGroup& group(std::size_t q) const { return groups_[q]; }
  const std::vector<FunctionalGroup>& groups() const { return groups_; }
  const ObservationMatrix& matrix(std::size_t m) const { return matrices_[m]; }
  const std::vector<ObservationMatrix>& matrices() const { return matrices_; }

  // Index of the matrix for (q,q'), or -1.
  long find_pair(std::size_t q, std::size_t qp) const;
  // Matrices in which group q takes part (as source, target or both).
  const std::vector<std::size_t>& matrices_of(std::size_t q) const { return touching_[q]; }
  std::size_t group_index(const std::string& name) const;

  std::vector<std::size_t> group_sizes() const;
  std::size_t total_dyads() const;

 private:
  std::vector<FunctionalGroup> groups_;
  std::vector<ObservationMatrix> matrices_;
  std::vector<std::vector<std::size_t>> touching_;
};

// Builds the default dyad mask for a relation between groups of the given
// sizes: everything observed except the diagonal of intra-group relations
// without self-loops.
Grid<std::uint8_t> default_mask(const InteractionSpec& spec, std::size_t rows, std::size_t cols);

// |S^{qq'}| for the pair (q,q'); throws std::out_of_range if not in E.
std::size_t dyad_count(const MultipartiteNetwork& net, std::pair<std::size_t, std::size_t> pair);

// A^{qq'} as 0-based block pairs.
std::vector<std::pair<int, int>> block_pair_index_set(const InteractionSpec& spec, int k_source, int k_target);

}  // namespace mbm

#endif  // MBM_CORE_NETWORK_HPP
