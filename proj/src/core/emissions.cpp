#include "core/emissions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mbm {

const char* family_name(Family f) {
  switch (f) {
    case Family::Bernoulli: return "bernoulli";
    case Family::Poisson: return "poisson";
    case Family::Gaussian: return "gaussian";
  }
  return "unknown";
}

Family parse_family(const std::string& s) {
  if (s == "bernoulli") return Family::Bernoulli;
  if (s == "poisson") return Family::Poisson;
  if (s == "gaussian") return Family::Gaussian;
  throw ValidationError("unknown emission family '" + s + "'");
}

int parameter_dimension(Family f) { return f == Family::Gaussian ? 2 : 1; }

double effective_alpha(Family f, double alpha) {
  switch (f) {
    case Family::Bernoulli: return std::clamp(alpha, kAlphaFloor, 1.0 - kAlphaFloor);
    case Family::Poisson: return std::max(alpha, kAlphaFloor);
    case Family::Gaussian: return alpha;
  }
  return alpha;
}

bool in_support(Family f, double x) {
  if (!std::isfinite(x)) return false;
  switch (f) {
    case Family::Bernoulli: return x == 0.0 || x == 1.0;
    case Family::Poisson: return x >= 0.0 && x == std::floor(x);
    case Family::Gaussian: return true;
  }
  return false;
}

double base_measure(Family f, double x) { return f == Family::Poisson ? -std::lgamma(x + 1.0) : 0.0; }

DensityCoefficients density_coefficients(Family f, const BlockPairParameter& p) {
  const double a = effective_alpha(f, p.alpha);
  switch (f) {
    case Family::Bernoulli: {
      const double log1m = std::log1p(-a);
      return {log1m, std::log(a) - log1m, 0.0};
    }
    case Family::Poisson: return {-a, std::log(a), 0.0};
    case Family::Gaussian: {
      const double v = std::max(p.variance, kVarianceFloor);
      return {-0.5 * std::log(2.0 * std::numbers::pi * v) - a * a / (2.0 * v), a / v, -1.0 / (2.0 * v)};
    }
  }
  return {};
}

double log_density(Family f, double x, const BlockPairParameter& p) {
  if (!in_support(f, x)) {
    throw ValidationError(std::string("value ") + std::to_string(x) + " outside the support of the " +
                          family_name(f) + " family");
  }
  const double a = effective_alpha(f, p.alpha);
  switch (f) {
    case Family::Bernoulli: return x == 1.0 ? std::log(a) : std::log1p(-a);
    case Family::Poisson: return -a + x * std::log(a) - std::lgamma(x + 1.0);
    case Family::Gaussian: {
      const double v = std::max(p.variance, kVarianceFloor);
      const double d = x - a;
      return -0.5 * std::log(2.0 * std::numbers::pi * v) - d * d / (2.0 * v);
    }
  }
  return 0.0;
}

BlockPairParameter mstep_parameter(double weighted_sum, double weighted_sq_sum, double weight_mass, Family f,
                                   const BlockPairParameter& fallback) {
  if (weight_mass < 0.0) throw std::invalid_argument("mstep_parameter: negative weight mass");
  if (weight_mass < kMassFloor) {
    BlockPairParameter out = fallback;
    out.degenerate = true;
    return out;
  }
  BlockPairParameter out;
  out.alpha = weighted_sum / weight_mass;
  if (f == Family::Bernoulli) out.alpha = std::clamp(out.alpha, 0.0, 1.0);
  if (f == Family::Poisson) out.alpha = std::max(out.alpha, 0.0);
  if (f == Family::Gaussian) {
    out.variance = std::max(weighted_sq_sum / weight_mass - out.alpha * out.alpha, kVarianceFloor);
  } else {
    out.variance = 1.0;
  }
  return out;
}

}  // namespace mbm
