#ifndef MBM_CORE_RNG_HPP
#define MBM_CORE_RNG_HPP

#include <cstdint>
#include <random>
#include <span>

namespace mbm {

// Portable random stream: std::mt19937_64 is fully specified by the
// standard, and the variate transforms below are written out explicitly
// because the std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t categorical(std::span<const double> weights);
  double normal(double mean, double sd);
  std::uint64_t poisson(double rate);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mbm

#endif  // MBM_CORE_RNG_HPP
