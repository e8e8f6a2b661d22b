#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mbm/mbm.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError {
  std::string status;
  std::string message;
  int code;
};

void check(mbm_status s) {
  if (s != MBM_OK) throw CliError{mbm_status_name(s), mbm_last_error(), 1};
}

// RAII wrappers over the opaque handles.
template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};
using Network = Handle<mbm_network, mbm_network_free>;
using Spec = Handle<mbm_spec, mbm_spec_free>;
using Fit = Handle<mbm_fit, mbm_fit_free>;

fs::path output_root() {
  const char* env = std::getenv("MBM_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("mbm-output");
}

std::vector<int> parse_ints(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw CliError{"usage", std::string(what) + ": expected comma-separated integers, got '" + s + "'", 2};
    }
  }
  if (out.empty()) throw CliError{"usage", std::string(what) + ": empty list", 2};
  return out;
}

struct DataOptions {
  std::string data_dir;
  std::string config;

  void add(CLI::App* cmd) {
    cmd->add_option("--data", data_dir, "Dataset directory holding config.json and edge files");
    cmd->add_option("--config", config, "Network config file (edge files resolved next to it)");
  }

  void load(Network& net) const {
    if (data_dir.empty() == config.empty()) throw CliError{"usage", "give exactly one of --data or --config", 2};
    const fs::path cfg = config.empty() ? fs::path(data_dir) / "config.json" : fs::path(config);
    check(mbm_network_load(cfg.string().c_str(), nullptr, &net.p));
  }

  json describe() const { return config.empty() ? json{{"data", data_dir}} : json{{"config", config}}; }
};

struct FitFlags {
  mbm_fit_options o{};

  void add(CLI::App* cmd) {
    mbm_fit_options_default(&o);
    cmd->add_option("--tol", o.tol, "Relative ELBO change for convergence")->capture_default_str();
    cmd->add_option("--max-iter", o.max_iter, "Maximum VEM iterations")->capture_default_str();
    cmd->add_option("--inner-tol", o.inner_tol, "VE fixed-point tolerance")->capture_default_str();
    cmd->add_option("--max-inner", o.max_inner, "Maximum VE fixed-point sweeps")->capture_default_str();
  }

  json describe() const {
    return {{"tol", o.tol}, {"max_iter", o.max_iter}, {"inner_tol", o.inner_tol}, {"max_inner", o.max_inner}};
  }
};

void print_fit(const Fit& fit) {
  std::ostringstream k;
  for (std::size_t q = 0; q < mbm_fit_num_groups(fit.p); ++q) k << (q ? "," : "") << mbm_fit_k(fit.p, q);
  std::printf("K=(%s) ICL=%.6f ELBO=%.6f iterations=%d converged=%s\n", k.str().c_str(), mbm_fit_icl(fit.p),
              mbm_fit_elbo(fit.p), mbm_fit_iterations(fit.p), mbm_fit_converged(fit.p) ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multipartite block model: simulate, fit, search, evaluate, export"};
  app.set_version_flag("--version", std::string(mbm_version()));
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw datasets from a scenario or generator spec");
  int scenario = 0;
  std::string spec_path, sim_out;
  int replicates = 1;
  uint64_t sim_seed = 0;
  auto* sc_opt = sim->add_option("--scenario", scenario, "Built-in scenario (1 or 2)");
  auto* spec_opt = sim->add_option("--spec", spec_path, "Generator spec JSON")->check(CLI::ExistingFile);
  sc_opt->excludes(spec_opt);
  sim->add_option("--replicates", replicates, "Number of datasets")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Base seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Output directory");

  // fit
  auto* fitc = app.add_subcommand("fit", "Fit the model at fixed block counts");
  DataOptions fit_data;
  fit_data.add(fitc);
  std::string k_str, init = "ones", fit_out;
  uint64_t fit_seed = 0;
  FitFlags fit_flags;
  fitc->add_option("--k", k_str, "Blocks per group, e.g. 3,2")->required();
  fitc->add_option("--init", init, "ones, random, or a labels CSV (group,node,block)")->capture_default_str();
  fitc->add_option("--seed", fit_seed, "Seed for random initialisation")->capture_default_str();
  fit_flags.add(fitc);
  fitc->add_option("--out", fit_out, "Output directory");

  // search
  auto* srch = app.add_subcommand("search", "Select block counts by ICL with split/merge moves");
  DataOptions search_data;
  search_data.add(srch);
  std::string k_max_str = "10", search_out;
  uint64_t search_seed = 0;
  int workers = 0, split_restarts = 0;
  FitFlags search_flags;
  srch->add_option("--k-max", k_max_str, "Upper bound per group, or one value for all")->capture_default_str();
  srch->add_option("--seed", search_seed, "Seed for random split proposals")->capture_default_str();
  srch->add_option("--workers", workers, "Concurrent candidate fits (0 = available parallelism)")->capture_default_str();
  srch->add_option("--split-restarts", split_restarts, "Split proposals per group (0 = one per cluster)")
      ->capture_default_str();
  search_flags.add(srch);
  srch->add_option("--out", search_out, "Output directory");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Compare fits with the truth they were simulated from");
  std::vector<std::string> eval_fits, eval_truths;
  std::string eval_out;
  eval->add_option("--fit", eval_fits, "Fit directory (repeatable)")->required();
  eval->add_option("--truth", eval_truths, "Dataset directory with truth.json and labels.csv (repeatable)")
      ->required();
  eval->add_option("--out", eval_out, "Output directory");

  // export
  auto* exp = app.add_subcommand("export", "Block-level summary graph of a fit");
  std::string exp_fit, exp_format = "dot", exp_out;
  double threshold = 0.01;
  exp->add_option("--fit", exp_fit, "Fit directory")->required();
  exp->add_option("--format", exp_format, "dot or json")->capture_default_str();
  exp->add_option("--threshold", threshold, "Plot connection parameters strictly above this")->capture_default_str();
  exp->add_option("--out", exp_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"status", "usage"}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  }

  auto out_dir = [](const std::string& given, const char* command) {
    return given.empty() ? (output_root() / command).string() : given;
  };

  try {
    if (*sim) {
      if (scenario == 0 && spec_path.empty()) throw CliError{"usage", "give --scenario or --spec", 2};
      Spec spec;
      check(scenario ? mbm_spec_scenario(scenario, &spec.p) : mbm_spec_load(spec_path.c_str(), &spec.p));
      const fs::path root = out_dir(sim_out, "simulate");
      json base = {{"seed", sim_seed}, {"replicates", replicates}};
      if (scenario) base["scenario"] = scenario;
      else base["spec"] = spec_path;
      for (int r = 0; r < replicates; ++r) {
        const fs::path dir = replicates == 1 ? root : root / ("rep_" + std::to_string(1000 + r + 1).substr(1));
        const uint64_t seed = sim_seed + static_cast<uint64_t>(r);
        check(mbm_simulate(spec.p, seed, dir.string().c_str()));
        if (replicates > 1) {
          json args = base;
          args["replicate"] = r + 1;
          args["replicate_seed"] = seed;
          check(mbm_manifest_write(dir.string().c_str(), "simulate", args.dump().c_str()));
        }
      }
      check(mbm_manifest_write(root.string().c_str(), "simulate", base.dump().c_str()));
      std::printf("wrote %d dataset(s) to %s\n", replicates, root.string().c_str());
    } else if (*fitc) {
      Network net;
      fit_data.load(net);
      const auto k = parse_ints(k_str, "--k");
      mbm_init_kind kind = MBM_INIT_LABELS;
      if (init == "ones") kind = MBM_INIT_ONES;
      else if (init == "random") kind = MBM_INIT_RANDOM;
      Fit fit;
      check(mbm_fit_run(net.p, k.data(), k.size(), kind, kind == MBM_INIT_LABELS ? init.c_str() : nullptr, fit_seed,
                        &fit_flags.o, &fit.p));
      const std::string dir = out_dir(fit_out, "fit");
      check(mbm_fit_write(fit.p, dir.c_str()));
      json args = fit_data.describe();
      args["k"] = k;
      args["init"] = init;
      args["seed"] = fit_seed;
      args["tolerances"] = fit_flags.describe();
      check(mbm_manifest_write(dir.c_str(), "fit", args.dump().c_str()));
      print_fit(fit);
    } else if (*srch) {
      Network net;
      search_data.load(net);
      auto k_max = parse_ints(k_max_str, "--k-max");
      if (k_max.size() == 1) k_max.assign(mbm_network_num_groups(net.p), k_max[0]);
      mbm_search_options opts;
      mbm_search_options_default(&opts);
      opts.k_max = k_max.data();
      opts.n_k_max = k_max.size();
      opts.seed = search_seed;
      opts.workers = workers;
      opts.n_split_restarts = split_restarts;
      opts.fit = search_flags.o;
      Fit fit;
      check(mbm_search_run(net.p, &opts, &fit.p));
      const std::string dir = out_dir(search_out, "search");
      check(mbm_fit_write(fit.p, dir.c_str()));
      json args = search_data.describe();
      args["k_max"] = k_max;
      args["seed"] = search_seed;
      args["workers"] = workers;
      args["split_restarts"] = split_restarts;
      args["tolerances"] = search_flags.describe();
      check(mbm_manifest_write(dir.c_str(), "search", args.dump().c_str()));
      print_fit(fit);
    } else if (*eval) {
      if (eval_fits.size() != eval_truths.size()) {
        throw CliError{"usage", "--fit and --truth must be given the same number of times", 2};
      }
      std::vector<const char*> f, t;
      for (const auto& s : eval_fits) f.push_back(s.c_str());
      for (const auto& s : eval_truths) t.push_back(s.c_str());
      const std::string dir = out_dir(eval_out, "evaluate");
      check(mbm_evaluate(f.data(), t.data(), f.size(), dir.c_str()));
      const json args = {{"fit", eval_fits}, {"truth", eval_truths}};
      check(mbm_manifest_write(dir.c_str(), "evaluate", args.dump().c_str()));
      std::printf("wrote recovery report to %s\n", dir.c_str());
    } else if (*exp) {
      if (exp_format != "dot" && exp_format != "json") {
        throw CliError{"validation", "unknown export format '" + exp_format + "' (expected dot or json)", 1};
      }
      const fs::path dir = out_dir(exp_out, "export");
      const fs::path file = dir / ("mesoscopic." + exp_format);
      check(mbm_export(exp_fit.c_str(), exp_format.c_str(), threshold, file.string().c_str()));
      const json args = {{"fit", exp_fit}, {"format", exp_format}, {"threshold", threshold}};
      check(mbm_manifest_write(dir.string().c_str(), "export", args.dump().c_str()));
      std::printf("wrote %s\n", file.string().c_str());
    }
  } catch (const CliError& e) {
    std::cerr << json{{"error", {{"status", e.status}, {"message", e.message}}}}.dump() << '\n';
    return e.code;
  }
  return 0;
}
