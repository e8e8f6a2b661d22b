#include "core/vem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "core/criteria.hpp"

namespace mbm {

ModelSize::ModelSize(std::vector<int> blocks) : blocks_(std::move(blocks)) {
  for (int k : blocks_) {
    if (k < 1) throw std::invalid_argument("block counts must be >= 1");
  }
}

ModelSize ModelSize::with(std::size_t q, int k) const {
  auto b = blocks_;
  b.at(q) = k;
  return ModelSize(std::move(b));
}

std::string ModelSize::to_string() const {
  std::string s;
  for (std::size_t q = 0; q < blocks_.size(); ++q) {
    if (q) s += ',';
    s += std::to_string(blocks_[q]);
  }
  return s;
}

ModelSize parse_model_size(const std::string& s) {
  std::vector<int> k;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      k.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("invalid block-count list '" + s + "'");
    }
  }
  if (k.empty()) throw ValidationError("empty block-count list");
  for (int v : k) {
    if (v < 1) throw ValidationError("block counts must be >= 1 in '" + s + "'");
  }
  return ModelSize(std::move(k));
}

ModelSize MbmParameters::model_size() const {
  std::vector<int> k;
  for (const auto& p : pi) k.push_back(static_cast<int>(p.size()));
  return ModelSize(std::move(k));
}

ModelSize VariationalAssignment::model_size() const {
  std::vector<int> k;
  for (const auto& t : tau) k.push_back(static_cast<int>(t.cols()));
  return ModelSize(std::move(k));
}

void check_shapes(const MultipartiteNetwork& net, const VariationalAssignment& tau) {
  if (tau.tau.size() != net.num_groups()) throw ValidationError("tau has the wrong number of groups");
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    if (tau.tau[q].rows() != net.group(q).size() || tau.tau[q].cols() < 1) {
      throw ValidationError("tau shape mismatch for group '" + net.group(q).name + "'");
    }
  }
}

void check_shapes(const MultipartiteNetwork& net, const MbmParameters& params) {
  if (params.pi.size() != net.num_groups()) throw ValidationError("pi has the wrong number of groups");
  if (params.alpha.size() != net.num_matrices()) throw ValidationError("alpha has the wrong number of matrices");
  for (std::size_t m = 0; m < net.num_matrices(); ++m) {
    const auto& s = net.matrix(m).spec();
    if (params.alpha[m].rows() != params.pi[s.source].size() || params.alpha[m].cols() != params.pi[s.target].size()) {
      throw ValidationError("alpha shape mismatch for matrix " + std::to_string(m));
    }
  }
}

namespace {

// Sums over one node's dyads in a matrix, per block of the opposite end:
//   m0[l] = sum_j s_ij tau_jl,  m1[l] = sum_j s_ij x_ij tau_jl,  m2 likewise
// with x^2. Diagonal dyads are excluded (handled separately).
struct Moments {
  std::vector<double> m0, m1, m2;

  void reset(std::size_t k) {
    m0.assign(k, 0.0);
    m1.assign(k, 0.0);
    m2.assign(k, 0.0);
  }
};

// colsum[l] = sum_j tau_jl over all nodes of the opposite group; the
// excluded dyads and (intra-group) the node itself are subtracted.
void accumulate_moments(const ObservationMatrix& mat, std::size_t i, bool by_row, const Grid<double>& tau_other,
                        const std::vector<double>& colsum, bool need_sq, Moments& out) {
  const std::size_t k = tau_other.cols();
  out.reset(k);
  for (std::size_t l = 0; l < k; ++l) out.m0[l] = colsum[l];
  if (mat.spec().intra()) {
    for (std::size_t l = 0; l < k; ++l) out.m0[l] -= tau_other(i, l);
  }
  for (std::uint32_t j : by_row ? mat.row_missing(i) : mat.col_missing(i)) {
    for (std::size_t l = 0; l < k; ++l) out.m0[l] -= tau_other(j, l);
  }
  for (const auto& e : by_row ? mat.row_nonzeros(i) : mat.col_nonzeros(i)) {
    const auto t = tau_other.row(e.index);
    for (std::size_t l = 0; l < k; ++l) out.m1[l] += e.value * t[l];
    if (need_sq) {
      const double x2 = e.value * e.value;
      for (std::size_t l = 0; l < k; ++l) out.m2[l] += x2 * t[l];
    }
  }
}

std::vector<double> column_sums(const Grid<double>& tau) {
  std::vector<double> s(tau.cols(), 0.0);
  for (std::size_t i = 0; i < tau.rows(); ++i)
    for (std::size_t l = 0; l < tau.cols(); ++l) s[l] += tau(i, l);
  return s;
}

std::vector<Grid<DensityCoefficients>> coefficient_grids(const MultipartiteNetwork& net, const MbmParameters& params) {
  std::vector<Grid<DensityCoefficients>> out;
  out.reserve(net.num_matrices());
  for (std::size_t m = 0; m < net.num_matrices(); ++m) {
    const auto& a = params.alpha[m];
    Grid<DensityCoefficients> c(a.rows(), a.cols());
    for (std::size_t k = 0; k < a.rows(); ++k)
      for (std::size_t l = 0; l < a.cols(); ++l) c(k, l) = density_coefficients(net.matrix(m).spec().family, a(k, l));
    out.push_back(std::move(c));
  }
  return out;
}

inline double contract(const DensityCoefficients& c, const Moments& mo, std::size_t l) {
  return c.c0 * mo.m0[l] + c.c1 * mo.m1[l] + c.c2 * mo.m2[l];
}

inline double diagonal_term(const DensityCoefficients& c, double x) { return c.c0 + c.c1 * x + c.c2 * x * x; }

double safe_log(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

}  // namespace

double elbo(const MultipartiteNetwork& net, const MbmParameters& params, const VariationalAssignment& tau) {
  check_shapes(net, tau);
  check_shapes(net, params);
  if (params.model_size() != tau.model_size()) throw ValidationError("parameters and tau disagree on K");

  double total = 0.0;
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    const auto& t = tau.tau[q];
    for (std::size_t i = 0; i < t.rows(); ++i) {
      for (std::size_t k = 0; k < t.cols(); ++k) {
        const double p = t(i, k);
        if (p <= 0.0) continue;
        total += -p * std::log(p) + p * safe_log(params.pi[q][k]);
      }
    }
  }

  const auto coef = coefficient_grids(net, params);
  std::vector<std::vector<double>> colsums;
  for (const auto& t : tau.tau) colsums.push_back(column_sums(t));

  Moments mo;
  for (std::size_t m = 0; m < net.num_matrices(); ++m) {
    const auto& mat = net.matrix(m);
    const auto& s = mat.spec();
    const auto& ts = tau.tau[s.source];
    const auto& tt = tau.tau[s.target];
    const bool sq = s.family == Family::Gaussian;
    double part = 0.0;
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      accumulate_moments(mat, i, true, tt, colsums[s.target], sq, mo);
      for (std::size_t k = 0; k < ts.cols(); ++k) {
        const double p = ts(i, k);
        if (p == 0.0) continue;
        double acc = 0.0;
        for (std::size_t l = 0; l < tt.cols(); ++l) acc += contract(coef[m](k, l), mo, l);
        part += p * acc;
      }
    }
    if (s.symmetric()) part *= 0.5;
    if (s.intra()) {
      for (std::size_t i = 0; i < mat.rows(); ++i) {
        if (!mat.diagonal_observed(i)) continue;
        for (std::size_t k = 0; k < ts.cols(); ++k) part += ts(i, k) * diagonal_term(coef[m](k, k), mat.value(i, i));
      }
    }
    total += part + mat.base_measure_total();
  }
  return total;
}

VariationalAssignment ve_step(const MultipartiteNetwork& net, const MbmParameters& params,
                              const VariationalAssignment& tau_in, double inner_tol, int max_inner) {
  check_shapes(net, tau_in);
  check_shapes(net, params);
  VariationalAssignment tau = tau_in;
  const auto coef = coefficient_grids(net, params);

  std::vector<std::vector<double>> log_pi(net.num_groups());
  for (std::size_t q = 0; q < net.num_groups(); ++q)
    for (double p : params.pi[q]) log_pi[q].push_back(safe_log(p));

  Moments mo;
  std::vector<double> score, fresh;
  for (int sweep = 0; sweep < std::max(max_inner, 1); ++sweep) {
    double max_change = 0.0;
    for (std::size_t q = 0; q < net.num_groups(); ++q) {
      auto& tq = tau.tau[q];
      const std::size_t kq = tq.cols();
      if (kq == 1) {
        for (std::size_t i = 0; i < tq.rows(); ++i) {
          max_change = std::max(max_change, std::abs(tq(i, 0) - 1.0));
          tq(i, 0) = 1.0;
        }
        continue;
      }
      std::vector<std::vector<double>> colsums;
      for (const auto& t : tau.tau) colsums.push_back(column_sums(t));
      auto& own = colsums[q];

      for (std::size_t i = 0; i < tq.rows(); ++i) {
        score = log_pi[q];
        for (std::size_t m : net.matrices_of(q)) {
          const auto& mat = net.matrix(m);
          const auto& s = mat.spec();
          const bool sq = s.family == Family::Gaussian;
          const auto& c = coef[m];
          if (s.source == q) {
            const auto& tt = tau.tau[s.target];
            accumulate_moments(mat, i, true, tt, colsums[s.target], sq, mo);
            for (std::size_t k = 0; k < kq; ++k)
              for (std::size_t l = 0; l < tt.cols(); ++l) score[k] += contract(c(k, l), mo, l);
          }
          if (s.target == q && !s.symmetric()) {
            const auto& ts = tau.tau[s.source];
            accumulate_moments(mat, i, false, ts, colsums[s.source], sq, mo);
            for (std::size_t k = 0; k < kq; ++k)
              for (std::size_t l = 0; l < ts.cols(); ++l) score[k] += contract(c(l, k), mo, l);
          }
          if (s.intra() && mat.diagonal_observed(i)) {
            for (std::size_t k = 0; k < kq; ++k) score[k] += diagonal_term(c(k, k), mat.value(i, i));
          }
        }
        const double top = *std::max_element(score.begin(), score.end());
        fresh.assign(kq, 0.0);
        double norm = 0.0;
        for (std::size_t k = 0; k < kq; ++k) {
          fresh[k] = std::exp(score[k] - top);
          norm += fresh[k];
        }
        for (std::size_t k = 0; k < kq; ++k) {
          const double v = fresh[k] / norm;
          max_change = std::max(max_change, std::abs(v - tq(i, k)));
          own[k] += v - tq(i, k);
          tq(i, k) = v;
        }
      }
    }
    if (max_change < inner_tol) break;
  }
  return tau;
}

MbmParameters m_step(const MultipartiteNetwork& net, const VariationalAssignment& tau) {
  check_shapes(net, tau);
  MbmParameters params;
  for (const auto& t : tau.tau) {
    std::vector<double> pi = column_sums(t);
    for (double& p : pi) p /= static_cast<double>(t.rows());
    params.pi.push_back(std::move(pi));
  }

  std::vector<std::vector<double>> colsums;
  for (const auto& t : tau.tau) colsums.push_back(column_sums(t));

  Moments mo;
  for (std::size_t m = 0; m < net.num_matrices(); ++m) {
    const auto& mat = net.matrix(m);
    const auto& s = mat.spec();
    const auto& ts = tau.tau[s.source];
    const auto& tt = tau.tau[s.target];
    const std::size_t ks = ts.cols(), kt = tt.cols();
    const bool sq = s.family == Family::Gaussian;
    Grid<double> s0(ks, kt, 0.0), s1(ks, kt, 0.0), s2(ks, kt, 0.0);
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      accumulate_moments(mat, i, true, tt, colsums[s.target], sq, mo);
      for (std::size_t k = 0; k < ks; ++k) {
        const double p = ts(i, k);
        if (p == 0.0) continue;
        for (std::size_t l = 0; l < kt; ++l) {
          s0(k, l) += p * mo.m0[l];
          s1(k, l) += p * mo.m1[l];
          s2(k, l) += p * mo.m2[l];
        }
      }
    }
    if (s.symmetric()) {
      for (std::size_t k = 0; k < ks; ++k) {
        s0(k, k) *= 0.5;
        s1(k, k) *= 0.5;
        s2(k, k) *= 0.5;
      }
    }
    if (s.intra()) {
      for (std::size_t i = 0; i < mat.rows(); ++i) {
        if (!mat.diagonal_observed(i)) continue;
        const double x = mat.value(i, i);
        for (std::size_t k = 0; k < ks; ++k) {
          s0(k, k) += ts(i, k);
          s1(k, k) += ts(i, k) * x;
          s2(k, k) += ts(i, k) * x * x;
        }
      }
    }

    BlockPairParameter fallback;
    if (mat.dyad_count() > 0) {
      const double mean = mat.total_value() / static_cast<double>(mat.dyad_count());
      fallback.alpha = mean;
      fallback.variance =
          std::max(mat.total_square() / static_cast<double>(mat.dyad_count()) - mean * mean, kVarianceFloor);
    }
    Grid<BlockPairParameter> alpha(ks, kt);
    for (std::size_t k = 0; k < ks; ++k) {
      for (std::size_t l = 0; l < kt; ++l) {
        if (s.symmetric() && l < k) continue;
        alpha(k, l) = mstep_parameter(s1(k, l), s2(k, l), std::max(s0(k, l), 0.0), s.family, fallback);
        if (s.symmetric()) alpha(l, k) = alpha(k, l);
      }
    }
    params.alpha.push_back(std::move(alpha));
  }
  return params;
}

Labels map_clustering(const VariationalAssignment& tau) {
  Labels z;
  for (const auto& t : tau.tau) {
    std::vector<int> zq(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const auto row = t.row(i);
      zq[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    z.push_back(std::move(zq));
  }
  return z;
}

VariationalAssignment init_from_clustering(const MultipartiteNetwork& net, const ModelSize& k, const Labels& labels,
                                           double smoothing) {
  if (k.size() != net.num_groups() || labels.size() != net.num_groups()) {
    throw ValidationError("labels/K do not match the number of groups");
  }
  VariationalAssignment tau;
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    const int kq = k[q];
    if (labels[q].size() != net.group(q).size()) throw ValidationError("label vector has the wrong length");
    Grid<double> t(net.group(q).size(), static_cast<std::size_t>(kq), 0.0);
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const int z = labels[q][i];
      if (z < 0 || z >= kq) throw std::out_of_range("label out of range for group '" + net.group(q).name + "'");
      if (kq == 1) {
        t(i, 0) = 1.0;
        continue;
      }
      for (int l = 0; l < kq; ++l) t(i, l) = smoothing / (kq - 1);
      t(i, z) = 1.0 - smoothing;
    }
    tau.tau.push_back(std::move(t));
  }
  return tau;
}

FitResult fit(const MultipartiteNetwork& net, const VariationalAssignment& init, const FitOptions& options) {
  check_shapes(net, init);
  if (options.max_iter < 1) throw std::invalid_argument("fit: max_iter must be >= 1");
  FitResult res;
  res.k = init.model_size();
  res.tau = init;
  double prev = 0.0;
  for (int it = 1; it <= options.max_iter; ++it) {
    res.params = m_step(net, res.tau);
    res.tau = ve_step(net, res.params, res.tau, options.inner_tol, options.max_inner);
    const double e = elbo(net, res.params, res.tau);
    res.elbo_trace.push_back(e);
    res.n_iterations = it;
    if (it > 1 && std::abs(e - prev) / (std::abs(e) + 1.0) < options.tol) {
      res.converged = true;
      break;
    }
    prev = e;
  }
  res.elbo = res.elbo_trace.back();
  res.map_clustering = map_clustering(res.tau);
  res.icl = icl(net, res.params, res.map_clustering);
  return res;
}

}  // namespace mbm
