#ifndef MBM_CORE_SIMULATOR_HPP
#define MBM_CORE_SIMULATOR_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "core/network.hpp"
#include "core/vem.hpp"

namespace mbm {

struct GeneratorGroup {
  std::string name;
  std::size_t size = 0;
};

// Everything needed to draw a multipartite network from the block model.
struct GeneratorSpec {
  std::vector<GeneratorGroup> groups;
  std::vector<InteractionSpec> pairs;
  MbmParameters params;  // alpha indexed like `pairs`
  std::uint64_t seed = 0;

  ModelSize model_size() const { return params.model_size(); }
  void validate() const;
};

struct SimulatedDataset {
  MultipartiteNetwork network;
  Labels truth;
};

SimulatedDataset sample(const GeneratorSpec& spec);

// Ecological-style preset: 4 groups, 3 bipartite Bernoulli relations.
GeneratorSpec scenario1();
// Seed-exchange-style preset: one oriented farmer network plus a farmer/crop
// incidence matrix.
GeneratorSpec scenario2();
GeneratorSpec scenario(int which);

// JSON (schema "mbm-spec/1").
std::string spec_to_json(const GeneratorSpec& spec);
GeneratorSpec spec_from_json(const std::string& text);
GeneratorSpec load_spec(const std::filesystem::path& path);

// Dataset directory: config.json + edge CSVs + labels.csv + truth.json.
void write_dataset(const GeneratorSpec& spec, const SimulatedDataset& data, const std::filesystem::path& dir);

}  // namespace mbm

#endif  // MBM_CORE_SIMULATOR_HPP
