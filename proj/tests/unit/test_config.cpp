#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "ecoap/config.hpp"
#include "ecoap/error.hpp"

using namespace ecoap;
using nlohmann::json;

namespace {

std::string config_error(const json& user) {
  try {
    parse_config(user);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

}  // namespace

TEST_CASE("defaults") {
  auto cfg = parse_config(json::object());
  CHECK(cfg.scenario.ap_count == 11);
  CHECK(cfg.scenario.area.x == 50.0);
  CHECK(cfg.propagation.exponent == 3.0);
  CHECK(cfg.propagation.corr_distance == 5.0);
  CHECK(cfg.sampling.samples_per_link == 20);
  CHECK(cfg.sampling.noise.meas_sigma == 2.0);
  CHECK(cfg.sampling.noise.outlier_prob == 0.05);
  CHECK(cfg.ingest.max_outlier_fraction == 0.2);
  CHECK(cfg.ingest.mean_domain == MeanDomain::Db);
  CHECK(cfg.clustering.mode_merge_factor == 0.5);
  CHECK(cfg.clustering.tol_factor == 1e-3);
  CHECK(cfg.clustering.max_iter == 500);
  CHECK(cfg.qos.airtime_cap == 1.0);
  CHECK(cfg.qos.rate_table.size() == 8);
  CHECK(cfg.sweep.trials == 100);
  CHECK(cfg.tree == default_config_tree());
}

TEST_CASE("outdoor profile") {
  auto cfg = parse_config(json{{"propagation", {{"profile", "outdoor"}}}});
  CHECK(cfg.propagation.exponent == 3.5);
  CHECK(cfg.propagation.corr_distance == 50.0);
  auto pinned = parse_config(json{{"propagation", {{"profile", "outdoor"}, {"corr_distance", 20.0}}}});
  CHECK(pinned.propagation.corr_distance == 20.0);
}

TEST_CASE("validation names the offending path") {
  CHECK(config_error(json{{"scenario", {{"bogus", 1}}}}).find("scenario.bogus") != std::string::npos);
  CHECK(config_error(json{{"nonsense", 1}}).find("nonsense") != std::string::npos);
  CHECK(config_error(json{{"scenario", {{"ap_count", "many"}}}}).find("scenario.ap_count") != std::string::npos);
  CHECK(config_error(json{{"sweep", {{"trials", 0}}}}).find("sweep.trials") != std::string::npos);
  CHECK(config_error(json{{"clustering", {{"threshold_rule", "median"}}}}).find("clustering.threshold_rule") !=
        std::string::npos);
  CHECK(config_error(json{{"sweep", {{"varying", "weather"}}}}).find("sweep.varying") != std::string::npos);
  CHECK(config_error(json{{"ingest", {{"max_outlier_fraction", 0.9}}}}).find("ingest.max_outlier_fraction") !=
        std::string::npos);
}

TEST_CASE("overrides and files") {
  std::vector<std::string> ov{"scenario.ap_count=6", "clustering.threshold_rule=mean", "sweep.values=[3,6,11]"};
  auto cfg = load_config(std::nullopt, ov);
  CHECK(cfg.scenario.ap_count == 6);
  CHECK(cfg.clustering.threshold_rule == ThresholdRule::Mean);
  CHECK(cfg.sweep.values == std::vector<double>{3, 6, 11});

  CHECK_THROWS_AS(load_config(std::filesystem::path("/nonexistent/ecoap.json")), Error);

  auto dir = std::filesystem::temp_directory_path() / "ecoap_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "c.json");
    f << R"({"scenario": {"n_clusters": 1}})";
  }
  auto from_file = load_config(dir / "c.json");
  CHECK(from_file.scenario.n_clusters == 1);
  {
    std::ofstream f(dir / "bad.json");
    f << "{ not json";
  }
  CHECK_THROWS_AS(load_config(dir / "bad.json"), Error);
  std::filesystem::remove_all(dir);

  std::vector<std::string> malformed{"no_equals_sign"};
  CHECK_THROWS_AS(load_config(std::nullopt, malformed), Error);
}

TEST_CASE("config hash") {
  auto a = parse_config(json::object());
  auto b = parse_config(json{{"scenario", {{"ap_count", 11}}}});
  CHECK(a.hash() == b.hash());
  auto c = parse_config(json{{"scenario", {{"ap_count", 10}}}});
  CHECK(a.hash() != c.hash());
  CHECK(a.hash_hex().size() == 16);
}

TEST_CASE("sweep parameter names") {
  for (const char* name : {"clutter_density", "cluster_density", "cluster_count", "ap_count", "cluster_radius"})
    CHECK(sweep_parameter_path(name).has_value());
  CHECK(*sweep_parameter_path("cluster_count") == "scenario.n_clusters");
  CHECK_FALSE(sweep_parameter_path("weather").has_value());
}
