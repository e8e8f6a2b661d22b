#include "mbm/mbm.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "core/network_io.hpp"
#include "core/oracle.hpp"
#include "core/reports.hpp"
#include "core/rng.hpp"
#include "core/search.hpp"
#include "core/simulator.hpp"
#include "json.hpp"

struct mbm_network {
  mbm::MultipartiteNetwork net;
};

struct mbm_spec {
  mbm::GeneratorSpec spec;
};

struct mbm_fit {
  std::shared_ptr<const mbm::MultipartiteNetwork> net;
  mbm::FitResult result;
  std::optional<mbm::SearchOutcome> search;
};

namespace {

thread_local std::string last_error;

mbm_status fail(mbm_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
mbm_status guarded(F&& f) {
  try {
    f();
    return MBM_OK;
  } catch (const mbm::IoError& e) {
    return fail(MBM_ERR_IO, e.what());
  } catch (const mbm::ParseError& e) {
    return fail(MBM_ERR_PARSE, e.what());
  } catch (const mbm::ValidationError& e) {
    return fail(MBM_ERR_VALIDATION, e.what());
  } catch (const mbm::BudgetExceeded& e) {
    return fail(MBM_ERR_BUDGET, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MBM_ERR_PARSE, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MBM_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(MBM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(MBM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(MBM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MBM_ERR_INTERNAL, "unknown error");
  }
}

#define MBM_REQUIRE(cond, what) \
  if (!(cond)) return fail(MBM_ERR_INVALID_ARGUMENT, what)

mbm::FitOptions to_options(const mbm_fit_options* o) {
  mbm::FitOptions f;
  if (o) {
    f.tol = o->tol;
    f.max_iter = o->max_iter;
    f.inner_tol = o->inner_tol;
    f.max_inner = o->max_inner;
  }
  if (!(f.tol > 0.0) || !(f.inner_tol > 0.0) || f.max_iter < 1 || f.max_inner < 1) {
    throw std::invalid_argument("fit options: tolerances must be positive and iteration limits at least 1");
  }
  return f;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

extern "C" {

const char* mbm_version(void) { return MBM_VERSION_STRING; }

const char* mbm_last_error(void) { return last_error.c_str(); }

const char* mbm_status_name(mbm_status status) {
  switch (status) {
    case MBM_OK: return "ok";
    case MBM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MBM_ERR_IO: return "io";
    case MBM_ERR_PARSE: return "parse";
    case MBM_ERR_VALIDATION: return "validation";
    case MBM_ERR_BUDGET: return "budget";
    case MBM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

mbm_status mbm_network_load(const char* config_path, const char* data_dir, mbm_network** out) {
  MBM_REQUIRE(config_path && out, "mbm_network_load: null argument");
  *out = nullptr;
  return guarded([&] {
    const std::filesystem::path cfg(config_path);
    const std::filesystem::path dir = data_dir ? std::filesystem::path(data_dir) : cfg.parent_path();
    *out = new mbm_network{mbm::load_network(cfg, dir)};
  });
}

void mbm_network_free(mbm_network* net) { delete net; }

size_t mbm_network_num_groups(const mbm_network* net) { return net ? net->net.num_groups() : 0; }

size_t mbm_network_num_matrices(const mbm_network* net) { return net ? net->net.num_matrices() : 0; }

size_t mbm_network_group_size(const mbm_network* net, size_t q) {
  return net && q < net->net.num_groups() ? net->net.group(q).size() : 0;
}

const char* mbm_network_group_name(const mbm_network* net, size_t q) {
  return net && q < net->net.num_groups() ? net->net.group(q).name.c_str() : nullptr;
}

mbm_status mbm_network_write(const mbm_network* net, const char* dir) {
  MBM_REQUIRE(net && dir, "mbm_network_write: null argument");
  return guarded([&] { mbm::write_network(net->net, dir); });
}

mbm_status mbm_spec_scenario(int which, mbm_spec** out) {
  MBM_REQUIRE(out, "mbm_spec_scenario: null argument");
  *out = nullptr;
  return guarded([&] { *out = new mbm_spec{mbm::scenario(which)}; });
}

mbm_status mbm_spec_load(const char* path, mbm_spec** out) {
  MBM_REQUIRE(path && out, "mbm_spec_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new mbm_spec{mbm::load_spec(path)}; });
}

void mbm_spec_free(mbm_spec* spec) { delete spec; }

mbm_status mbm_simulate(const mbm_spec* spec, uint64_t seed, const char* out_dir) {
  MBM_REQUIRE(spec && out_dir, "mbm_simulate: null argument");
  return guarded([&] {
    mbm::GeneratorSpec s = spec->spec;
    s.seed = seed;
    const auto data = mbm::sample(s);
    mbm::write_dataset(s, data, out_dir);
  });
}

void mbm_fit_options_default(mbm_fit_options* options) {
  if (!options) return;
  const mbm::FitOptions d;
  options->tol = d.tol;
  options->max_iter = d.max_iter;
  options->inner_tol = d.inner_tol;
  options->max_inner = d.max_inner;
}

mbm_status mbm_fit_run(const mbm_network* net, const int* k, size_t n_k, mbm_init_kind init, const char* labels_path,
                       uint64_t seed, const mbm_fit_options* options, mbm_fit** out) {
  MBM_REQUIRE(net && k && out, "mbm_fit_run: null argument");
  *out = nullptr;
  MBM_REQUIRE(n_k == net->net.num_groups(), "mbm_fit_run: K must have one entry per functional group");
  MBM_REQUIRE(init != MBM_INIT_LABELS || labels_path, "mbm_fit_run: labels init needs a labels file");
  return guarded([&] {
    const mbm::ModelSize size(std::vector<int>(k, k + n_k));
    const mbm::FitOptions opts = to_options(options);
    mbm::Labels labels;
    switch (init) {
      case MBM_INIT_ONES:
        labels = mbm::single_cluster_labels(net->net);
        break;
      case MBM_INIT_LABELS:
        labels = mbm::read_labels(net->net, labels_path);
        break;
      case MBM_INIT_RANDOM: {
        mbm::Rng rng(seed);
        labels.resize(n_k);
        for (std::size_t q = 0; q < n_k; ++q) {
          labels[q].resize(net->net.group(q).size());
          for (auto& v : labels[q]) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(size[q])));
        }
        break;
      }
      default:
        throw std::invalid_argument("mbm_fit_run: unknown init kind");
    }
    const auto tau = mbm::init_from_clustering(net->net, size, labels);
    auto fit = std::make_unique<mbm_fit>();
    fit->net = std::make_shared<const mbm::MultipartiteNetwork>(net->net);
    fit->result = mbm::fit(net->net, tau, opts);
    *out = fit.release();
  });
}

void mbm_search_options_default(mbm_search_options* options) {
  if (!options) return;
  options->k_max = nullptr;
  options->n_k_max = 0;
  options->seed = 0;
  options->workers = 0;
  options->n_split_restarts = 0;
  mbm_fit_options_default(&options->fit);
}

mbm_status mbm_search_run(const mbm_network* net, const mbm_search_options* options, mbm_fit** out) {
  MBM_REQUIRE(net && options && out, "mbm_search_run: null argument");
  *out = nullptr;
  MBM_REQUIRE(!options->k_max || options->n_k_max == net->net.num_groups(),
              "mbm_search_run: k_max must have one entry per functional group");
  return guarded([&] {
    mbm::SearchConfig cfg;
    if (options->k_max) {
      cfg.k_max.assign(options->k_max, options->k_max + options->n_k_max);
      for (int v : cfg.k_max)
        if (v < 1) throw std::invalid_argument("mbm_search_run: k_max entries must be at least 1");
    }
    cfg.seed = options->seed;
    cfg.workers = options->workers;
    cfg.n_split_restarts = options->n_split_restarts;
    cfg.fit = to_options(&options->fit);
    auto fit = std::make_unique<mbm_fit>();
    fit->net = std::make_shared<const mbm::MultipartiteNetwork>(net->net);
    fit->search = mbm::select_model(net->net, cfg);
    fit->result = fit->search->best;
    *out = fit.release();
  });
}

void mbm_fit_free(mbm_fit* fit) { delete fit; }

size_t mbm_fit_num_groups(const mbm_fit* fit) { return fit ? fit->result.k.blocks().size() : 0; }

int mbm_fit_k(const mbm_fit* fit, size_t q) {
  return fit && q < fit->result.k.blocks().size() ? fit->result.k[q] : -1;
}

double mbm_fit_icl(const mbm_fit* fit) { return fit ? fit->result.icl.icl : kNaN; }

double mbm_fit_elbo(const mbm_fit* fit) { return fit ? fit->result.elbo : kNaN; }

int mbm_fit_converged(const mbm_fit* fit) { return fit && fit->result.converged ? 1 : 0; }

int mbm_fit_iterations(const mbm_fit* fit) { return fit ? fit->result.n_iterations : -1; }

double mbm_fit_pi(const mbm_fit* fit, size_t q, size_t k) {
  if (!fit || q >= fit->result.params.pi.size() || k >= fit->result.params.pi[q].size()) return kNaN;
  return fit->result.params.pi[q][k];
}

double mbm_fit_alpha(const mbm_fit* fit, size_t matrix, size_t k, size_t l) {
  if (!fit || matrix >= fit->result.params.alpha.size()) return kNaN;
  const auto& g = fit->result.params.alpha[matrix];
  if (k >= g.rows() || l >= g.cols()) return kNaN;
  return g(k, l).alpha;
}

int mbm_fit_label(const mbm_fit* fit, size_t q, size_t i) {
  if (!fit || q >= fit->result.map_clustering.size() || i >= fit->result.map_clustering[q].size()) return -1;
  return fit->result.map_clustering[q][i] + 1;
}

size_t mbm_fit_search_steps(const mbm_fit* fit) { return fit && fit->search ? fit->search->trace.steps.size() : 0; }

mbm_status mbm_fit_write(const mbm_fit* fit, const char* dir) {
  MBM_REQUIRE(fit && dir, "mbm_fit_write: null argument");
  return guarded([&] {
    if (fit->search) {
      mbm::write_search(*fit->net, *fit->search, dir);
    } else {
      mbm::write_fit(*fit->net, fit->result, dir);
    }
  });
}

mbm_status mbm_evaluate(const char* const* fit_dirs, const char* const* truth_dirs, size_t count, const char* out_dir) {
  MBM_REQUIRE(fit_dirs && truth_dirs && out_dir && count > 0, "mbm_evaluate: null or empty argument");
  return guarded([&] {
    std::vector<std::filesystem::path> fits, truths;
    for (size_t i = 0; i < count; ++i) {
      if (!fit_dirs[i] || !truth_dirs[i]) throw std::invalid_argument("mbm_evaluate: null directory");
      fits.emplace_back(fit_dirs[i]);
      truths.emplace_back(truth_dirs[i]);
    }
    mbm::evaluate_fits(fits, truths, out_dir);
  });
}

mbm_status mbm_export(const char* fit_dir, const char* format, double threshold, const char* out_path) {
  MBM_REQUIRE(fit_dir && format && out_path, "mbm_export: null argument");
  MBM_REQUIRE(std::isfinite(threshold), "mbm_export: threshold must be finite");
  return guarded([&] {
    const auto fmt = mbm::parse_export_format(format);
    const auto text = mbm::export_graph(mbm::read_fit(fit_dir), fmt, threshold);
    const std::filesystem::path p(out_path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw mbm::IoError("cannot write '" + p.string() + "'");
    out << text;
  });
}

mbm_status mbm_manifest_write(const char* out_dir, const char* command, const char* arguments_json) {
  MBM_REQUIRE(out_dir && command, "mbm_manifest_write: null argument");
  return guarded([&] { mbm::write_manifest(out_dir, command, arguments_json ? arguments_json : ""); });
}

}  // extern "C"
