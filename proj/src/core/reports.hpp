#ifndef MBM_CORE_REPORTS_HPP
#define MBM_CORE_REPORTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/metrics.hpp"
#include "core/network.hpp"
#include "core/search.hpp"
#include "core/vem.hpp"

namespace mbm {

// Fit output directory: fit.json (everything, used for chaining) plus
// pi.csv, alpha.csv, tau.csv, labels.csv, elbo_trace.csv and icl.json.
void write_fit(const MultipartiteNetwork& net, const FitResult& fit, const std::filesystem::path& dir);
// Adds search_trace.csv and visited.csv next to the selected fit.
void write_search(const MultipartiteNetwork& net, const SearchOutcome& outcome, const std::filesystem::path& dir);

// The parts of a fit directory needed downstream.
struct StoredFit {
  std::vector<FunctionalGroup> groups;
  std::vector<InteractionSpec> pairs;
  MbmParameters params;
  Labels labels;
  IclReport icl;
};

StoredFit read_fit(const std::filesystem::path& dir);

// Compares each fit directory with the dataset directory it was fitted on
// (truth.json + labels.csv) and writes recovery.csv, recovery_replicates.csv
// and recovery.json to out_dir.
RecoveryReport evaluate_fits(const std::vector<std::filesystem::path>& fit_dirs,
                             const std::vector<std::filesystem::path>& truth_dirs, const std::filesystem::path& out_dir);

enum class ExportFormat { Dot, Json };
ExportFormat parse_export_format(const std::string& s);

// Block-level summary graph: one node per (group, block) sized n_q * pi_k,
// one edge per connection parameter strictly above `threshold`.
std::string export_graph(const StoredFit& fit, ExportFormat format, double threshold);

// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string digest_hex(const std::string& bytes);

// manifest.json describing the command that produced out_dir, with a digest
// of every other file in the directory.
void write_manifest(const std::filesystem::path& out_dir, const std::string& command, const std::string& arguments_json);

}  // namespace mbm

#endif  // MBM_CORE_REPORTS_HPP
