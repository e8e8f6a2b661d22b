#ifndef MBM_CORE_NETWORK_IO_HPP
#define MBM_CORE_NETWORK_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "core/network.hpp"

namespace mbm {

// Reads a dataset config (JSON) and the CSV edge lists it references.
// Relative edge/NA file paths are resolved against data_dir.
MultipartiteNetwork load_network(const std::filesystem::path& config_path, const std::filesystem::path& data_dir);

// Writes config.json plus one edge list (and NA list when needed) per pair.
// Node order is pinned explicitly so reloading reproduces the same network.
void write_network(const MultipartiteNetwork& net, const std::filesystem::path& dir,
                   const std::string& config_name = "config.json");

// Per-group hard labels, 0-based internally.
using Labels = std::vector<std::vector<int>>;

// `group,node,block` CSV with 1-based blocks.
void write_labels(const MultipartiteNetwork& net, const Labels& labels, const std::filesystem::path& path);
Labels read_labels(const MultipartiteNetwork& net, const std::filesystem::path& path);

// Shortest round-trip decimal representation.
std::string format_double(double x);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace mbm

#endif  // MBM_CORE_NETWORK_IO_HPP
