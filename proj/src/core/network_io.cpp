#include "core/network_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mbm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s[0] == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ParseError(where + ": cannot parse number '" + s + "'");
  return v;
}

struct CsvRecord {
  std::size_t line;
  std::vector<std::string> fields;
};

// Reads a CSV with a header; returns rows and the header columns.
std::vector<CsvRecord> read_csv(const fs::path& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<CsvRecord> rows;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      header = fields;
      have_header = true;
      continue;
    }
    rows.push_back({lineno, std::move(fields)});
  }
  return rows;
}

std::string pair_file_stem(const MultipartiteNetwork& net, const InteractionSpec& s) {
  return net.group(s.source).name + "__" + net.group(s.target).name;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

MultipartiteNetwork load_network(const fs::path& config_path, const fs::path& data_dir) {
  std::ifstream in(config_path);
  if (!in) throw IoError("cannot open config '" + config_path.string() + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed config '" + config_path.string() + "': " + e.what());
  }
  if (!cfg.is_object() || !cfg.contains("groups") || !cfg.contains("pairs") || !cfg["groups"].is_array() ||
      !cfg["pairs"].is_array()) {
    throw ParseError("malformed config: expected object with 'groups' and 'pairs' arrays");
  }

  struct PairCfg {
    InteractionSpec spec;
    fs::path edge_file;
    std::optional<fs::path> na_file;
    std::vector<CsvRecord> edges, na;
    bool has_value_column = false;
  };

  std::vector<std::string> group_names;
  std::vector<std::optional<std::vector<std::string>>> pinned;
  std::vector<std::optional<std::size_t>> declared_size;
  try {
    for (const auto& g : cfg["groups"]) {
      group_names.push_back(g.at("name").get<std::string>());
      if (g.contains("nodes")) {
        pinned.emplace_back(g["nodes"].get<std::vector<std::string>>());
      } else {
        pinned.emplace_back(std::nullopt);
      }
      declared_size.push_back(g.contains("size") ? std::optional<std::size_t>(g["size"].get<std::size_t>())
                                                 : std::nullopt);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed config group entry: ") + e.what());
  }
  auto group_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(group_names.begin(), group_names.end(), name);
    if (it == group_names.end()) throw ValidationError("config references unknown group '" + name + "'");
    return static_cast<std::size_t>(it - group_names.begin());
  };

  std::vector<PairCfg> pairs;
  try {
    for (const auto& p : cfg["pairs"]) {
      PairCfg pc;
      pc.spec.source = group_of(p.at("source").get<std::string>());
      pc.spec.target = group_of(p.at("target").get<std::string>());
      pc.spec.family = parse_family(p.value("family", std::string("bernoulli")));
      pc.spec.orientation = parse_orientation(p.value("orientation", std::string("oriented")));
      pc.spec.self_loops = p.value("self_loops", false);
      if (!pc.spec.intra() && pc.spec.orientation == Orientation::NonOriented) {
        throw ValidationError("non-oriented orientation is only legal within a functional group");
      }
      pc.edge_file = p.at("edge_file").get<std::string>();
      if (p.contains("na_file") && !p["na_file"].is_null()) pc.na_file = fs::path(p["na_file"].get<std::string>());
      pairs.push_back(std::move(pc));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed config pair entry: ") + e.what());
  }

  auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : data_dir / p; };

  std::vector<std::set<std::string>> seen_labels(group_names.size());
  for (auto& pc : pairs) {
    std::vector<std::string> header;
    pc.edges = read_csv(resolve(pc.edge_file), header);
    if (!header.empty() && !(header.size() >= 2 && header[0] == "source" && header[1] == "target")) {
      throw ParseError(pc.edge_file.string() + ": expected header 'source,target[,value]'");
    }
    pc.has_value_column = header.size() >= 3 && header[2] == "value";
    for (const auto& r : pc.edges) {
      if (r.fields.size() < 2) throw ParseError(pc.edge_file.string() + ":" + std::to_string(r.line) + ": too few fields");
      seen_labels[pc.spec.source].insert(r.fields[0]);
      seen_labels[pc.spec.target].insert(r.fields[1]);
    }
    if (pc.na_file) {
      std::vector<std::string> na_header;
      pc.na = read_csv(resolve(*pc.na_file), na_header);
      for (const auto& r : pc.na) {
        if (r.fields.size() < 2) throw ParseError(pc.na_file->string() + ": too few fields");
        seen_labels[pc.spec.source].insert(r.fields[0]);
        seen_labels[pc.spec.target].insert(r.fields[1]);
      }
    }
  }

  std::vector<FunctionalGroup> groups;
  std::vector<std::map<std::string, std::size_t>> index(group_names.size());
  for (std::size_t q = 0; q < group_names.size(); ++q) {
    FunctionalGroup g;
    g.name = group_names[q];
    if (pinned[q]) {
      g.node_labels = *pinned[q];
    } else {
      g.node_labels.assign(seen_labels[q].begin(), seen_labels[q].end());  // std::set: lexicographic
    }
    if (declared_size[q] && *declared_size[q] != g.size()) {
      throw ValidationError("group '" + g.name + "' declares size " + std::to_string(*declared_size[q]) + " but has " +
                            std::to_string(g.size()) + " nodes");
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!index[q].emplace(g.node_labels[i], i).second) {
        throw ValidationError("duplicate node label '" + g.node_labels[i] + "' in group '" + g.name + "'");
      }
    }
    groups.push_back(std::move(g));
  }

  std::vector<ObservationMatrix> matrices;
  for (const auto& pc : pairs) {
    const auto& s = pc.spec;
    const std::size_t n = groups[s.source].size(), m = groups[s.target].size();
    Grid<double> values(n, m, 0.0);
    Grid<std::uint8_t> mask = default_mask(s, n, m);
    Grid<std::uint8_t> filled(n, m, 0);
    auto lookup = [&](std::size_t q, const std::string& label, const std::string& where) {
      auto it = index[q].find(label);
      if (it == index[q].end()) throw ValidationError(where + ": unknown node '" + label + "' in group '" + groups[q].name + "'");
      return it->second;
    };
    for (const auto& r : pc.edges) {
      const std::string where = pc.edge_file.string() + ":" + std::to_string(r.line);
      std::size_t i = lookup(s.source, r.fields[0], where);
      std::size_t j = lookup(s.target, r.fields[1], where);
      double x = 1.0;
      if (pc.has_value_column && r.fields.size() >= 3 && !r.fields[2].empty()) x = parse_number(r.fields[2], where);
      if (!in_support(s.family, x)) {
        throw ValidationError(where + ": value " + format_double(x) + " violates the " + family_name(s.family) +
                              " family");
      }
      if (s.intra() && i == j && !s.self_loops) throw ValidationError(where + ": self-loop on a relation without self-loops");
      if (s.symmetric() && j < i) std::swap(i, j);
      if (filled(i, j)) throw ValidationError(where + ": duplicate edge record");
      filled(i, j) = 1;
      values(i, j) = x;
      if (s.symmetric()) values(j, i) = x;
    }
    for (const auto& r : pc.na) {
      const std::string where = pc.na_file->string() + ":" + std::to_string(r.line);
      std::size_t i = lookup(s.source, r.fields[0], where);
      std::size_t j = lookup(s.target, r.fields[1], where);
      if (filled(i, j) || (s.symmetric() && filled(j, i))) throw ValidationError(where + ": dyad is both observed and NA");
      mask(i, j) = 0;
      if (s.symmetric()) mask(j, i) = 0;
    }
    matrices.emplace_back(s, std::move(values), std::move(mask));
  }
  return MultipartiteNetwork(std::move(groups), std::move(matrices));
}

void write_network(const MultipartiteNetwork& net, const fs::path& dir, const std::string& config_name) {
  fs::create_directories(dir);
  json cfg;
  cfg["schema"] = "mbm-network/1";
  cfg["groups"] = json::array();
  for (const auto& g : net.groups()) cfg["groups"].push_back({{"name", g.name}, {"nodes", g.node_labels}});
  cfg["pairs"] = json::array();
  for (const auto& mat : net.matrices()) {
    const auto& s = mat.spec();
    const std::string stem = pair_file_stem(net, s);
    json p = {{"source", net.group(s.source).name},
              {"target", net.group(s.target).name},
              {"family", family_name(s.family)},
              {"orientation", orientation_name(s.orientation)},
              {"self_loops", s.self_loops},
              {"edge_file", stem + ".csv"}};

    const auto& src = net.group(s.source).node_labels;
    const auto& tgt = net.group(s.target).node_labels;
    std::ofstream edges(dir / (stem + ".csv"));
    if (!edges) throw IoError("cannot write '" + (dir / (stem + ".csv")).string() + "'");
    edges << "source,target,value\n";
    const Grid<std::uint8_t> def = default_mask(s, mat.rows(), mat.cols());
    std::vector<std::pair<std::size_t, std::size_t>> na;
    for (std::size_t i = 0; i < mat.rows(); ++i) {
      const std::size_t j0 = s.symmetric() ? i : 0;
      for (std::size_t j = j0; j < mat.cols(); ++j) {
        if (mat.observed(i, j) && mat.value(i, j) != 0.0) {
          edges << csv_escape(src[i]) << ',' << csv_escape(tgt[j]) << ',' << format_double(mat.value(i, j)) << '\n';
        } else if (!mat.observed(i, j) && def(i, j)) {
          na.emplace_back(i, j);
        }
      }
    }
    if (!na.empty()) {
      p["na_file"] = stem + ".na.csv";
      std::ofstream nf(dir / (stem + ".na.csv"));
      nf << "source,target\n";
      for (auto [i, j] : na) nf << csv_escape(src[i]) << ',' << csv_escape(tgt[j]) << '\n';
    }
    cfg["pairs"].push_back(p);
  }
  std::ofstream out(dir / config_name);
  if (!out) throw IoError("cannot write '" + (dir / config_name).string() + "'");
  out << cfg.dump(2) << '\n';
}

void write_labels(const MultipartiteNetwork& net, const Labels& labels, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "group,node,block\n";
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    for (std::size_t i = 0; i < net.group(q).size(); ++i) {
      out << csv_escape(net.group(q).name) << ',' << csv_escape(net.group(q).node_labels[i]) << ','
          << labels[q][i] + 1 << '\n';
    }
  }
}

Labels read_labels(const MultipartiteNetwork& net, const fs::path& path) {
  std::vector<std::string> header;
  auto rows = read_csv(path, header);
  if (header.size() < 3 || header[0] != "group" || header[1] != "node" || header[2] != "block") {
    throw ParseError(path.string() + ": expected header 'group,node,block'");
  }
  Labels labels(net.num_groups());
  std::vector<std::map<std::string, std::size_t>> index(net.num_groups());
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    labels[q].assign(net.group(q).size(), -1);
    for (std::size_t i = 0; i < net.group(q).size(); ++i) index[q][net.group(q).node_labels[i]] = i;
  }
  for (const auto& r : rows) {
    const std::string where = path.string() + ":" + std::to_string(r.line);
    if (r.fields.size() < 3) throw ParseError(where + ": too few fields");
    const std::size_t q = net.group_index(r.fields[0]);
    auto it = index[q].find(r.fields[1]);
    if (it == index[q].end()) throw ValidationError(where + ": unknown node '" + r.fields[1] + "'");
    const double b = parse_number(r.fields[2], where);
    if (b < 1 || b != std::floor(b)) throw ValidationError(where + ": block must be a positive integer");
    labels[q][it->second] = static_cast<int>(b) - 1;
  }
  for (std::size_t q = 0; q < net.num_groups(); ++q) {
    for (std::size_t i = 0; i < labels[q].size(); ++i) {
      if (labels[q][i] < 0) {
        throw ValidationError(path.string() + ": missing label for node '" + net.group(q).node_labels[i] + "'");
      }
    }
  }
  return labels;
}

}  // namespace mbm
