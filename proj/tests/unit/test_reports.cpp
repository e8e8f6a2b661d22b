#include "core/reports.hpp"

#include <cmath>

#include "core/network_io.hpp"
#include "core/simulator.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/instances.hpp"
#include "unit/common.hpp"

using namespace mbm;
using namespace mbm::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Fitted {
  GeneratorSpec spec;
  SimulatedDataset data;
  FitResult fit;
};

Fitted fitted_scenario2(std::uint64_t seed) {
  auto spec = scenario2();
  spec.seed = seed;
  auto data = sample(spec);
  auto f = fit(data.network, init_from_clustering(data.network, spec.model_size(), data.truth));
  return {spec, std::move(data), std::move(f)};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

StoredFit toy_fit(double weak) {
  StoredFit f;
  f.groups = {{"a", {"a1", "a2", "a3", "a4"}}, {"b", {"b1", "b2"}}};
  InteractionSpec s;
  s.source = 0;
  s.target = 1;
  f.pairs = {s};
  f.params.pi = {{0.75, 0.25}, {1.0}};
  Grid<BlockPairParameter> g(2, 1);
  g(0, 0).alpha = 0.8;
  g(1, 0).alpha = weak;
  f.params.alpha.push_back(g);
  f.labels = {{0, 0, 0, 1}, {0, 0}};
  return f;
}

}  // namespace

TEST_SUITE("reports") {
  TEST_CASE("fit directory contents") {
    const auto f = fitted_scenario2(3);
    const auto dir = scratch_dir("reports_fit");
    write_fit(f.data.network, f.fit, dir);
    for (const char* name : {"fit.json", "icl.json", "pi.csv", "alpha.csv", "tau.csv", "labels.csv", "elbo_trace.csv"})
      CHECK(fs::exists(dir / name));
    CHECK(count_lines(read_text(dir / "pi.csv")) == 1 + 5);
    CHECK(count_lines(read_text(dir / "alpha.csv")) == 1 + 9 + 6);
    CHECK(count_lines(read_text(dir / "tau.csv")) == 1 + 30 * 3 + 37 * 2);
    CHECK(count_lines(read_text(dir / "elbo_trace.csv")) == 1 + f.fit.elbo_trace.size());
    const json j = json::parse(read_text(dir / "fit.json"));
    CHECK(j.at("schema") == "mbm-fit/1");
    CHECK(j.at("k") == std::vector<int>{3, 2});
    CHECK(j.at("n_iterations") == f.fit.n_iterations);
    CHECK(read_labels(f.data.network, dir / "labels.csv") == f.fit.map_clustering);
  }

  TEST_CASE("stored fit round trip") {
    const auto f = fitted_scenario2(4);
    const auto dir = scratch_dir("reports_roundtrip");
    write_fit(f.data.network, f.fit, dir);
    const auto back = read_fit(dir);
    CHECK(back.labels == f.fit.map_clustering);
    CHECK(back.params.pi.size() == 2);
    for (std::size_t q = 0; q < 2; ++q)
      for (std::size_t k = 0; k < back.params.pi[q].size(); ++k)
        CHECK(back.params.pi[q][k] == doctest::Approx(f.fit.params.pi[q][k]).epsilon(1e-15));
    for (std::size_t m = 0; m < 2; ++m) {
      const auto& a = f.fit.params.alpha[m];
      for (std::size_t k = 0; k < a.rows(); ++k)
        for (std::size_t l = 0; l < a.cols(); ++l)
          CHECK(back.params.alpha[m](k, l).alpha == doctest::Approx(a(k, l).alpha).epsilon(1e-15));
    }
    CHECK(back.icl.icl == doctest::Approx(f.fit.icl.icl).epsilon(1e-15));
    CHECK(back.pairs[0].intra());
    CHECK_FALSE(back.pairs[0].self_loops);

    write_text(dir / "fit.json", "{\"groups\": 3");
    CHECK_THROWS_AS(read_fit(dir), ParseError);
    CHECK_THROWS_AS(read_fit(dir / "missing"), IoError);
  }

  TEST_CASE("search directory adds the trace tables") {
    auto spec = scenario2();
    spec.seed = 5;
    const auto data = sample(spec);
    SearchConfig cfg;
    const auto out = select_model(data.network, cfg);
    const auto dir = scratch_dir("reports_search");
    write_search(data.network, out, dir);
    CHECK(count_lines(read_text(dir / "search_trace.csv")) == 1 + out.trace.steps.size());
    CHECK(count_lines(read_text(dir / "visited.csv")) == 1 + out.trace.visited.size());
    CHECK(read_text(dir / "search_trace.csv").rfind("start,iteration,k,icl,move\n", 0) == 0);
  }

  TEST_CASE("evaluating a fit against its own truth") {
    const auto root = scratch_dir("reports_evaluate");
    std::vector<fs::path> fits, truths;
    for (int r = 0; r < 3; ++r) {
      auto spec = scenario2();
      spec.seed = 60 + r;
      const auto data = sample(spec);
      const auto truth_dir = root / ("data" + std::to_string(r));
      fs::create_directories(truth_dir);
      write_dataset(spec, data, truth_dir);
      // a fit whose labels equal the truth, up to a relabelling
      auto f = fit(data.network, init_from_clustering(data.network, spec.model_size(), data.truth));
      f.map_clustering = data.truth;
      for (auto& v : f.map_clustering[0]) v = 2 - v;
      const auto fit_dir = root / ("fit" + std::to_string(r));
      write_fit(data.network, f, fit_dir);
      fits.push_back(fit_dir);
      truths.push_back(truth_dir);
    }
    const auto rep = evaluate_fits(fits, truths, root / "eval");
    CHECK(rep.exact_k == 3);
    for (const auto& r : rep.replicates) CHECK(r.ari == std::vector<double>{1.0, 1.0});
    CHECK(rep.parameters.size() == 9 + 6);
    const json j = json::parse(read_text(root / "eval" / "recovery.json"));
    CHECK(j.at("schema") == "mbm-recovery/1");
    CHECK(j.at("exact_k") == 3);
    CHECK(count_lines(read_text(root / "eval" / "recovery.csv")) == 1 + 15);
    CHECK(count_lines(read_text(root / "eval" / "recovery_replicates.csv")) == 1 + 3);
    CHECK_THROWS_AS(evaluate_fits(fits, {truths[0]}, root / "bad"), ValidationError);
  }

  TEST_CASE("export thresholds") {
    const auto dot = export_graph(toy_fit(0.0003), ExportFormat::Dot, 0.01);
    CHECK(dot.find("\"a_1\" -> \"b_1\"") != std::string::npos);
    CHECK(dot.find("\"a_2\" -> \"b_1\"") == std::string::npos);
    CHECK(dot.find("size=3") != std::string::npos);
    CHECK(dot.find("size=1") != std::string::npos);

    const json j = json::parse(export_graph(toy_fit(0.0003), ExportFormat::Json, 0.01));
    CHECK(j.at("nodes").size() == 3);
    REQUIRE(j.at("edges").size() == 1);
    CHECK(j["edges"][0]["alpha"] == 0.8);
    CHECK(j["edges"][0]["directed"] == true);

    const json none = json::parse(export_graph(toy_fit(0.5), ExportFormat::Json, 1.0));
    CHECK(none.at("nodes").size() == 3);
    CHECK(none.at("edges").empty());
    CHECK(export_graph(toy_fit(0.5), ExportFormat::Dot, 0.01) == export_graph(toy_fit(0.5), ExportFormat::Dot, 0.01));
    CHECK(parse_export_format("json") == ExportFormat::Json);
    CHECK_THROWS_AS(parse_export_format("svg"), ValidationError);
  }

  TEST_CASE("symmetric relations export each block pair once") {
    StoredFit f = toy_fit(0.5);
    f.pairs[0].target = 0;
    f.pairs[0].orientation = Orientation::NonOriented;
    Grid<BlockPairParameter> g(2, 2);
    g(0, 0).alpha = 0.2;
    g(0, 1).alpha = g(1, 0).alpha = 0.6;
    g(1, 1).alpha = 0.9;
    f.params.alpha[0] = g;
    const json j = json::parse(export_graph(f, ExportFormat::Json, 0.01));
    CHECK(j.at("edges").size() == 3);
    for (const auto& e : j["edges"]) CHECK(e["directed"] == false);
  }

  TEST_CASE("digests and manifests") {
    CHECK(digest_hex("") == "cbf29ce484222325");
    CHECK(digest_hex("a") == "af63dc4c8601ec8c");
    const auto dir = scratch_dir("reports_manifest");
    write_text(dir / "x.csv", "1,2\n");
    fs::create_directories(dir / "sub");
    write_text(dir / "sub" / "y.txt", "hello");
    write_text(dir / "sub" / "manifest.json", "{}");
    write_manifest(dir, "test", "{\"k\": 2}");
    const json m = json::parse(read_text(dir / "manifest.json"));
    CHECK(m.at("schema") == "mbm-manifest/1");
    CHECK(m.at("command") == "test");
    CHECK(m.at("arguments").at("k") == 2);
    REQUIRE(m.at("outputs").size() == 2);
    CHECK(m["outputs"][0]["file"] == "sub/y.txt");
    CHECK(m["outputs"][0]["digest"] == digest_hex("hello"));
    CHECK(m["outputs"][1]["file"] == "x.csv");
    const std::string first = m.at("output_digest");
    write_manifest(dir, "test", "");
    CHECK(json::parse(read_text(dir / "manifest.json")).at("output_digest") == first);
    write_text(dir / "x.csv", "1,3\n");
    write_manifest(dir, "test", "");
    CHECK(json::parse(read_text(dir / "manifest.json")).at("output_digest") != first);
  }
}
