#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "stableinfer/errors.hpp"
#include "stableinfer/experiment.hpp"
#include "stableinfer/hash.hpp"

using namespace stableinfer;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("stableinfer_exp_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("configs round-trip through their canonical text") {
  for (const char* text : {R"({"experiment": "figure2"})", R"({"experiment": "kl_table"})",
                           R"({"experiment": "data_sweep", "n_samples": 2000})",
                           R"({"experiment": "flom", "p": 0.25})"}) {
    const auto c = validate_config(text);
    const auto again = validate_config(c.to_text());
    CHECK(again == c);
    CHECK(again.to_text() == c.to_text());
    CHECK(again.hash() == c.hash());
  }
}

TEST_CASE("defaults are filled in") {
  const auto c = validate_config(R"({"experiment": "figure2"})");
  CHECK(c.kind == ExperimentKind::figure2);
  CHECK(c.params.at("J") == 10);
  CHECK(c.params.at("n_samples") == 20);
  CHECK(c.params.at("basis") == "haar");
  CHECK(c.params.at("families").size() == 2);
  const auto d = validate_config(R"({"experiment": "data_sweep"})");
  CHECK(d.params.at("direction") == nlohmann::json::array({1.0}));
  // The output directory does not enter the hash.
  auto e = c;
  e.set_output_dir("/elsewhere");
  CHECK(e.hash() == c.hash());
  e.set_seed(c.seed() + 1);
  CHECK(e.hash() != c.hash());
}

TEST_CASE("invalid configs are rejected with the field and line") {
  auto field_of = [](const std::string& text) {
    try {
      validate_config(text);
    } catch (const ConfigParse& e) {
      return std::make_pair(e.field(), e.line());
    }
    return std::make_pair(std::string("<accepted>"), std::size_t(0));
  };
  CHECK(field_of(R"({"experiment": "nope"})").first == "experiment");
  CHECK(field_of(R"({"experiment": "figure2", "bogus": 1})").first == "bogus");
  CHECK(field_of("{\"experiment\": \"figure2\",\n \"J\": -1}") == std::make_pair(std::string("J"), std::size_t(2)));
  CHECK(field_of("{\"experiment\": \"flom\",\n\"prior\": {\"alpha\": 1.0},\n\"p\": 1.0}").first == "p");
  CHECK(field_of(R"({"experiment": "flom", "p": 0.5, "q": 0.25})").first != "<accepted>");
  CHECK(field_of(R"({"experiment": "bayes_run", "y": [3.0], "r": 2.0})").first == "y");
  CHECK(field_of(R"({"experiment": "data_sweep", "y": [0.5], "r": 1.0, "epsilons": [0.6]})").first == "epsilons");
  CHECK(field_of(R"({"experiment": "bayes_run", "y": [0.0, 1.0]})").first == "y");
  CHECK(field_of("{\"experiment\": ").first == "");
  CHECK(field_of("[1, 2]").first == "");
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoFailure);
}

TEST_CASE("prior and likelihood builders") {
  const auto cauchy = prior_from_json(nlohmann::json::parse(R"({"law": "cauchy", "gamma": 2.0})"));
  CHECK(cauchy.alpha == 1.0);
  CHECK(cauchy.truncation == 1);
  CHECK(cauchy.coefficient_law(1).gamma() == 2.0);
  const auto normal = prior_from_json(nlohmann::json::parse(R"({"law": "normal", "sd": 2.0})"));
  CHECK(normal.alpha == 2.0);
  CHECK(normal.coefficient_law(1).gamma() == doctest::Approx(std::sqrt(2.0)));
  const auto seq = sequence_from_json(nlohmann::json::parse(R"({"kind": "power_law", "amplitude": 3.0, "exponent": 1.0})"));
  CHECK(seq.at(3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sequence_from_json(nlohmann::json::parse(R"({"kind": "spiral"})")), ConfigParse);
  const auto lin = likelihood_from_json(
      nlohmann::json::parse(R"({"forward": {"kind": "linear", "rows": 1, "cols": 2, "matrix": [1, 2]}, "noise_variance": [0.5]})"));
  CHECK(lin.forward.kind == ForwardMap::Kind::linear);
  CHECK(lin.sigma_plus() == 2.0);
}

TEST_CASE("runs are reproducible and their manifests match the files") {
  auto c = validate_config(R"({"experiment": "figure2", "J": 4, "n_samples": 3, "grid_size": 64})");
  const auto a = scratch("fig_a"), b = scratch("fig_b");
  c.set_output_dir(a.string());
  const auto ma = run(c);
  c.set_output_dir(b.string());
  const auto mb = run(c);
  CHECK(ma.config_hash == mb.config_hash);
  REQUIRE(ma.files.size() == mb.files.size());
  for (std::size_t i = 0; i < ma.files.size(); ++i) {
    CHECK(ma.files[i] == mb.files[i]);
    CHECK(file_hash(a / ma.files[i].first) == ma.files[i].second);
    CHECK(slurp(a / ma.files[i].first) == slurp(b / mb.files[i].first));
  }
  CHECK(std::filesystem::exists(a / "manifest.json"));
  CHECK(std::filesystem::exists(a / "figure2_cauchy.sfe1"));
  const auto csv = slurp(a / "figure2_cauchy.csv");
  CHECK(csv.rfind("# config_hash=" + hex64(c.hash()) + ",seed=1\n", 0) == 0);
  const auto man = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(man.at("config_hash") == hex64(c.hash()));
}

TEST_CASE("kl_table output") {
  auto c = validate_config(R"({"experiment": "kl_table"})");
  const auto dir = scratch("kl");
  c.set_output_dir(dir.string());
  run(c);
  const auto j = nlohmann::json::parse(slurp(dir / "kl_table.json"));
  REQUIRE(j.at("pairs").size() == 2);
  CHECK(j.at("pairs")[0].at("p") == "N(0,1)");
  CHECK(j.at("pairs")[0].at("kl").get<double>() == doctest::Approx(0.2592445).epsilon(1e-5));
  CHECK(j.at("pairs")[1].at("kl") == "infinite");
}
