#ifndef MBM_TESTS_COMMON_HPP
#define MBM_TESTS_COMMON_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace mbm::testing {

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / "mbm_unit_tests" / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mbm::testing

#endif  // MBM_TESTS_COMMON_HPP
