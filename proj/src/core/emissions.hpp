#ifndef MBM_CORE_EMISSIONS_HPP
#define MBM_CORE_EMISSIONS_HPP

#include <stdexcept>
#include <string>

namespace mbm {

// Raised for malformed input data: bad config, out-of-domain values,
// inconsistent shapes.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable files.
class IoError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Syntactically broken input (JSON, CSV, numbers).
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class Family { Bernoulli, Poisson, Gaussian };

const char* family_name(Family f);
Family parse_family(const std::string& s);

// Number of free parameters per block pair (mean, plus variance for Gaussian).
int parameter_dimension(Family f);

inline constexpr double kAlphaFloor = 1e-8;
inline constexpr double kVarianceFloor = 1e-6;
inline constexpr double kMassFloor = 1e-10;

// Connection parameter of one block pair. `alpha` holds the raw estimate
// (which may be exactly 0 or 1 for Bernoulli); log-densities see the clamped
// value from effective_alpha().
struct BlockPairParameter {
  double alpha = 0.5;
  double variance = 1.0;
  bool degenerate = false;

  bool operator==(const BlockPairParameter&) const = default;
};

double effective_alpha(Family f, double alpha);

bool in_support(Family f, double x);

// log f(x; alpha). Throws ValidationError when x is outside the support.
double log_density(Family f, double x, const BlockPairParameter& p);

// Every family's log-density splits as
//   f(x; p) = c0(p) + c1(p) x + c2(p) x^2 + base(x)
// which lets the VE-step accumulate moment sums instead of re-evaluating
// f per dyad and block pair.
struct DensityCoefficients {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

DensityCoefficients density_coefficients(Family f, const BlockPairParameter& p);
double base_measure(Family f, double x);

// Weighted maximum-likelihood update of one block pair from the sums
// sum(w x), sum(w x^2) and sum(w). Below kMassFloor the estimate is undefined
// and `fallback` is returned with degenerate = true.
BlockPairParameter mstep_parameter(double weighted_sum, double weighted_sq_sum, double weight_mass, Family f,
                                   const BlockPairParameter& fallback = {});

}  // namespace mbm

#endif  // MBM_CORE_EMISSIONS_HPP
