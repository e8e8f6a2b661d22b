#include "core/reports.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "core/network_io.hpp"
#include "core/simulator.hpp"
#include "json.hpp"

#ifndef MBM_VERSION_STRING
#define MBM_VERSION_STRING "0.0.0"
#endif

namespace mbm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json icl_json(const IclReport& r) {
  return {{"complete_log_likelihood", r.complete_log_likelihood},
          {"clustering_penalty", r.clustering_penalty},
          {"edge_penalty", r.edge_penalty},
          {"penalty", r.penalty},
          {"icl", r.icl}};
}

json fit_json(const MultipartiteNetwork& net, const FitResult& fit) {
  json j;
  j["schema"] = "mbm-fit/1";
  j["k"] = fit.k.blocks();
  j["groups"] = json::array();
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    std::vector<int> z;
    for (int v : fit.map_clustering[q]) z.push_back(v + 1);
    j["groups"].push_back({{"name", net.group(q).name},
                           {"nodes", net.group(q).node_labels},
                           {"pi", fit.params.pi[q]},
                           {"labels", z}});
  }
  j["pairs"] = json::array();
  for (std::size_t m = 0; m < net.num_matrices(); ++m) {
    const auto& s = net.matrix(m).spec();
    const auto& a = fit.params.alpha[m];
    json alpha = json::array(), var = json::array(), deg = json::array();
    for (std::size_t k = 0; k < a.rows(); ++k) {
      json ra = json::array(), rv = json::array(), rd = json::array();
      for (std::size_t l = 0; l < a.cols(); ++l) {
        ra.push_back(a(k, l).alpha);
        rv.push_back(a(k, l).variance);
        rd.push_back(a(k, l).degenerate);
      }
      alpha.push_back(ra);
      var.push_back(rv);
      deg.push_back(rd);
    }
    j["pairs"].push_back({{"source", net.group(s.source).name},
                          {"target", net.group(s.target).name},
                          {"family", family_name(s.family)},
                          {"orientation", orientation_name(s.orientation)},
                          {"self_loops", s.self_loops},
                          {"alpha", alpha},
                          {"variance", var},
                          {"degenerate", deg}});
  }
  j["elbo"] = fit.elbo;
  j["elbo_trace"] = fit.elbo_trace;
  j["icl"] = icl_json(fit.icl);
  j["converged"] = fit.converged;
  j["n_iterations"] = fit.n_iterations;
  return j;
}

}  // namespace

void write_fit(const MultipartiteNetwork& net, const FitResult& fit, const fs::path& dir) {
  fs::create_directories(dir);
  open_out(dir / "fit.json") << fit_json(net, fit).dump(2) << '\n';
  open_out(dir / "icl.json") << icl_json(fit.icl).dump(2) << '\n';

  auto pi = open_out(dir / "pi.csv");
  pi << "group,block,pi\n";
  for (std::size_t q = 0; q < net.num_groups(); ++q)
    for (std::size_t k = 0; k < fit.params.pi[q].size(); ++k)
      pi << net.group(q).name << ',' << k + 1 << ',' << format_double(fit.params.pi[q][k]) << '\n';

  auto alpha = open_out(dir / "alpha.csv");
  alpha << "source,target,row_block,col_block,alpha,variance,degenerate\n";
  for (std::size_t m = 0; m < net.num_matrices(); ++m) {
    const auto& s = net.matrix(m).spec();
    const auto& a = fit.params.alpha[m];
    for (std::size_t k = 0; k < a.rows(); ++k)
      for (std::size_t l = 0; l < a.cols(); ++l)
        alpha << net.group(s.source).name << ',' << net.group(s.target).name << ',' << k + 1 << ',' << l + 1 << ','
              << format_double(a(k, l).alpha) << ',' << format_double(a(k, l).variance) << ','
              << (a(k, l).degenerate ? 1 : 0) << '\n';
  }

  auto tau = open_out(dir / "tau.csv");
  tau << "group,node,block,tau\n";
  for (std::size_t q = 0; q < net.num_groups(); ++q)
    for (std::size_t i = 0; i < net.group(q).size(); ++i)
      for (std::size_t k = 0; k < fit.tau.tau[q].cols(); ++k)
        tau << net.group(q).name << ',' << net.group(q).node_labels[i] << ',' << k + 1 << ','
            << format_double(fit.tau.tau[q](i, k)) << '\n';

  write_labels(net, fit.map_clustering, dir / "labels.csv");

  auto trace = open_out(dir / "elbo_trace.csv");
  trace << "iteration,elbo\n";
  for (std::size_t t = 0; t < fit.elbo_trace.size(); ++t) trace << t + 1 << ',' << format_double(fit.elbo_trace[t]) << '\n';
}

void write_search(const MultipartiteNetwork& net, const SearchOutcome& outcome, const fs::path& dir) {
  write_fit(net, outcome.best, dir);
  auto trace = open_out(dir / "search_trace.csv");
  trace << "start,iteration,k,icl,move\n";
  for (const auto& s : outcome.trace.steps)
    trace << s.start << ',' << s.iteration << ",\"" << s.k.to_string() << "\"," << format_double(s.icl) << ','
          << s.move << '\n';
  auto visited = open_out(dir / "visited.csv");
  visited << "k,icl\n";
  for (const auto& [k, v] : outcome.trace.visited) visited << '"' << k.to_string() << "\"," << format_double(v) << '\n';
}

StoredFit read_fit(const fs::path& dir) {
  StoredFit out;
  try {
    const json j = json::parse(read_file(dir / "fit.json"));
    for (const auto& g : j.at("groups")) {
      out.groups.push_back({g.at("name").get<std::string>(), g.at("nodes").get<std::vector<std::string>>()});
      out.params.pi.push_back(g.at("pi").get<std::vector<double>>());
      std::vector<int> z = g.at("labels").get<std::vector<int>>();
      for (auto& v : z) v -= 1;
      out.labels.push_back(std::move(z));
    }
    auto index_of = [&](const std::string& name) {
      for (std::size_t q = 0; q < out.groups.size(); ++q)
        if (out.groups[q].name == name) return q;
      throw ValidationError("fit.json references unknown group '" + name + "'");
    };
    for (const auto& p : j.at("pairs")) {
      InteractionSpec s;
      s.source = index_of(p.at("source").get<std::string>());
      s.target = index_of(p.at("target").get<std::string>());
      s.family = parse_family(p.at("family").get<std::string>());
      s.orientation = parse_orientation(p.at("orientation").get<std::string>());
      s.self_loops = p.value("self_loops", false);
      const auto a = p.at("alpha").get<std::vector<std::vector<double>>>();
      const auto v = p.at("variance").get<std::vector<std::vector<double>>>();
      Grid<BlockPairParameter> g(a.size(), a.empty() ? 0 : a[0].size());
      for (std::size_t k = 0; k < g.rows(); ++k)
        for (std::size_t l = 0; l < g.cols(); ++l) g(k, l) = {a[k][l], v[k][l], false};
      out.pairs.push_back(s);
      out.params.alpha.push_back(std::move(g));
    }
    const auto& r = j.at("icl");
    out.icl = {r.at("complete_log_likelihood").get<double>(), r.at("clustering_penalty").get<double>(),
               r.at("edge_penalty").get<double>(), r.at("penalty").get<double>(), r.at("icl").get<double>()};
  } catch (const json::exception& e) {
    throw ParseError("malformed fit report in '" + dir.string() + "': " + e.what());
  }
  return out;
}

namespace {

Labels read_truth_labels(const StoredFit& fit, const fs::path& path) {
  const std::string text = read_file(path);
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  std::vector<std::map<std::string, std::size_t>> index(fit.groups.size());
  Labels z(fit.groups.size());
  for (std::size_t q = 0; q < fit.groups.size(); ++q) {
    z[q].assign(fit.groups[q].size(), -1);
    for (std::size_t i = 0; i < fit.groups[q].size(); ++i) index[q][fit.groups[q].node_labels[i]] = i;
  }
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 3) throw ValidationError(path.string() + ": malformed row");
    std::size_t q = fit.groups.size();
    for (std::size_t g = 0; g < fit.groups.size(); ++g)
      if (fit.groups[g].name == f[0]) q = g;
    if (q == fit.groups.size()) throw ValidationError(path.string() + ": unknown group '" + f[0] + "'");
    auto it = index[q].find(f[1]);
    if (it == index[q].end()) throw ValidationError(path.string() + ": unknown node '" + f[1] + "'");
    z[q][it->second] = std::stoi(f[2]) - 1;
  }
  for (const auto& zq : z)
    for (int v : zq)
      if (v < 0) throw ValidationError(path.string() + ": truth labels do not cover every node");
  return z;
}

}  // namespace

RecoveryReport evaluate_fits(const std::vector<fs::path>& fit_dirs, const std::vector<fs::path>& truth_dirs,
                             const fs::path& out_dir) {
  if (fit_dirs.empty() || fit_dirs.size() != truth_dirs.size()) {
    throw ValidationError("evaluate needs the same positive number of fit and truth directories");
  }
  std::vector<ReplicateRecovery> reps;
  GeneratorSpec first_truth;
  std::vector<InteractionSpec> pairs;
  for (std::size_t r = 0; r < fit_dirs.size(); ++r) {
    const StoredFit fit = read_fit(fit_dirs[r]);
    const GeneratorSpec truth = load_spec(truth_dirs[r] / "truth.json");
    if (truth.groups.size() != fit.groups.size() || truth.pairs.size() != fit.pairs.size()) {
      throw ValidationError("fit '" + fit_dirs[r].string() + "' and truth '" + truth_dirs[r].string() +
                            "' have different group structure");
    }
    for (std::size_t q = 0; q < fit.groups.size(); ++q) {
      if (truth.groups[q].name != fit.groups[q].name || truth.groups[q].size != fit.groups[q].size()) {
        throw ValidationError("group '" + fit.groups[q].name + "' differs between fit and truth");
      }
    }
    for (std::size_t m = 0; m < fit.pairs.size(); ++m) {
      if (truth.pairs[m].source != fit.pairs[m].source || truth.pairs[m].target != fit.pairs[m].target) {
        throw ValidationError("relation list differs between fit and truth");
      }
    }
    if (r == 0) {
      first_truth = truth;
      pairs = truth.pairs;
    } else if (!(truth.params.model_size() == first_truth.params.model_size())) {
      throw ValidationError("truth directories were generated with different block counts");
    }
    const Labels z = read_truth_labels(fit, truth_dirs[r] / "labels.csv");
    reps.push_back(compare_with_truth(pairs, truth.params, z, fit.params, fit.labels));
  }
  RecoveryReport rep = summarize_recovery(pairs, first_truth.params, std::move(reps));

  fs::create_directories(out_dir);
  const auto& groups = first_truth.groups;
  auto params = open_out(out_dir / "recovery.csv");
  params << "source,target,row_block,col_block,truth,bias,rmse,replicates\n";
  for (const auto& p : rep.parameters) {
    params << groups[pairs[p.matrix].source].name << ',' << groups[pairs[p.matrix].target].name << ',' << p.row + 1
           << ',' << p.col + 1 << ',' << format_double(p.truth) << ',' << format_double(p.bias) << ','
           << format_double(p.rmse) << ',' << p.replicates << '\n';
  }
  auto reps_csv = open_out(out_dir / "recovery_replicates.csv");
  reps_csv << "replicate,fit_dir,true_k,estimated_k,exact";
  for (const auto& g : groups) reps_csv << ",ari_" << g.name;
  reps_csv << '\n';
  json summary;
  summary["schema"] = "mbm-recovery/1";
  summary["replicates"] = json::array();
  for (std::size_t r = 0; r < rep.replicates.size(); ++r) {
    const auto& x = rep.replicates[r];
    reps_csv << r + 1 << ',' << fit_dirs[r].string() << ",\"" << x.true_k.to_string() << "\",\""
             << x.est_k.to_string() << "\"," << (x.aligned ? 1 : 0);
    for (double a : x.ari) reps_csv << ',' << format_double(a);
    reps_csv << '\n';
    summary["replicates"].push_back({{"fit_dir", fit_dirs[r].string()},
                                     {"true_k", x.true_k.blocks()},
                                     {"estimated_k", x.est_k.blocks()},
                                     {"exact", x.aligned},
                                     {"ari", x.ari}});
  }
  summary["exact_k"] = rep.exact_k;
  double max_bias = 0.0, max_rmse = 0.0;
  for (const auto& p : rep.parameters) {
    max_bias = std::max(max_bias, std::abs(p.bias));
    max_rmse = std::max(max_rmse, p.rmse);
  }
  summary["max_abs_bias"] = max_bias;
  summary["max_rmse"] = max_rmse;
  open_out(out_dir / "recovery.json") << summary.dump(2) << '\n';
  return rep;
}

ExportFormat parse_export_format(const std::string& s) {
  if (s == "dot") return ExportFormat::Dot;
  if (s == "json") return ExportFormat::Json;
  throw ValidationError("unknown export format '" + s + "' (expected dot or json)");
}

std::string export_graph(const StoredFit& fit, ExportFormat format, double threshold) {
  struct Node {
    std::string id, group;
    int block;
    double size;
  };
  struct Edge {
    std::string from, to;
    double alpha;
    bool directed;
  };
  std::vector<Node> nodes;
  for (std::size_t q = 0; q < fit.groups.size(); ++q)
    for (std::size_t k = 0; k < fit.params.pi[q].size(); ++k)
      nodes.push_back({fit.groups[q].name + "_" + std::to_string(k + 1), fit.groups[q].name, static_cast<int>(k + 1),
                       static_cast<double>(fit.groups[q].size()) * fit.params.pi[q][k]});
  std::vector<Edge> edges;
  for (std::size_t m = 0; m < fit.pairs.size(); ++m) {
    const auto& s = fit.pairs[m];
    const auto& a = fit.params.alpha[m];
    for (std::size_t k = 0; k < a.rows(); ++k) {
      for (std::size_t l = s.symmetric() ? k : 0; l < a.cols(); ++l) {
        if (!(a(k, l).alpha > threshold)) continue;
        edges.push_back({fit.groups[s.source].name + "_" + std::to_string(k + 1),
                         fit.groups[s.target].name + "_" + std::to_string(l + 1), a(k, l).alpha, !s.symmetric()});
      }
    }
  }
  std::ostringstream out;
  if (format == ExportFormat::Json) {
    json j;
    j["schema"] = "mbm-export/1";
    j["threshold"] = threshold;
    j["nodes"] = json::array();
    for (const auto& n : nodes)
      j["nodes"].push_back({{"id", n.id}, {"group", n.group}, {"block", n.block}, {"size", n.size}});
    j["edges"] = json::array();
    for (const auto& e : edges)
      j["edges"].push_back(
          {{"source", e.from}, {"target", e.to}, {"alpha", e.alpha}, {"width", e.alpha}, {"directed", e.directed}});
    out << j.dump(2) << '\n';
  } else {
    out << "digraph mbm {\n";
    for (const auto& n : nodes)
      out << "  \"" << n.id << "\" [label=\"" << n.group << " " << n.block << "\", group=\"" << n.group
          << "\", size=" << format_double(n.size) << "];\n";
    for (const auto& e : edges) {
      out << "  \"" << e.from << "\" -> \"" << e.to << "\" [width=" << format_double(e.alpha)
          << ", penwidth=" << format_double(1.0 + 9.0 * std::min(e.alpha, 1.0));
      if (!e.directed) out << ", dir=none";
      out << "];\n";
    }
    out << "}\n";
  }
  return out.str();
}

std::string digest_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const std::string& arguments_json) {
  fs::create_directories(out_dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(out_dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  json outputs = json::array();
  std::string combined;
  for (const auto& f : files) {
    const std::string rel = fs::relative(f, out_dir).generic_string();
    const std::string d = digest_hex(read_file(f));
    outputs.push_back({{"file", rel}, {"digest", d}});
    combined += rel + ":" + d + "\n";
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json args = arguments_json.empty() ? json::object() : json::parse(arguments_json);
  json manifest = {{"schema", "mbm-manifest/1"},
                   {"command", command},
                   {"arguments", args},
                   {"library_version", MBM_VERSION_STRING},
                   {"timestamp", stamp},
                   {"outputs", outputs},
                   {"output_digest", digest_hex(combined)}};
  open_out(out_dir / "manifest.json") << manifest.dump(2) << '\n';
}

}  // namespace mbm
