#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "tw/twave.h"

namespace fs = std::filesystem;

namespace {

const char* kAc = R"(
name: capi_ac
mode: line
potential: {name: allen_cahn}
wells: {minus: [-1.0], plus: [1.0]}
grid: {L1: 20, n1: 2001}
)";

}  // namespace

TEST_CASE("config handles") {
  tw_config* cfg = nullptr;
  REQUIRE(tw_config_parse(kAc, &cfg) == TW_OK);
  CHECK(std::string(tw_config_name(cfg)) == "capi_ac");
  CHECK(std::string(tw_config_hash(cfg)).size() == 64);
  tw_config* again = nullptr;
  REQUIRE(tw_config_parse(tw_config_serialize(cfg), &again) == TW_OK);
  CHECK(std::string(tw_config_hash(again)) == tw_config_hash(cfg));
  tw_config_free(again);
  tw_config_free(cfg);

  tw_config* bad = nullptr;
  CHECK(tw_config_parse("name: x\nmode: line\n", &bad) == TW_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(std::string(tw_last_error()).find("potential") != std::string::npos);
  CHECK(tw_config_parse(nullptr, &bad) == TW_ERR_FAILURE);
}

TEST_CASE("heteroclinic stage through the C interface is deterministic") {
  const std::string out = "capi_runs";
  fs::remove_all(out);
  tw_config* cfg = nullptr;
  REQUIRE(tw_config_parse(kAc, &cfg) == TW_OK);
  tw_result* r = nullptr;
  REQUIRE(tw_run("heteroclinic", cfg, out.c_str(), 0, &r) == TW_OK);
  const std::string dir = tw_result_run_dir(r);
  const auto summary = nlohmann::json::parse(tw_result_summary_json(r));
  CHECK(summary["heteroclinic"]["energy"].get<double>() == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-4));
  tw_result_free(r);
  const std::string first = [&] {
    std::ifstream is(dir + "/families.json");
    return std::string(std::istreambuf_iterator<char>(is), {});
  }();
  REQUIRE(tw_run("heteroclinic", cfg, out.c_str(), 0, &r) == TW_OK);
  tw_result_free(r);
  std::ifstream is(dir + "/families.json");
  CHECK(std::string(std::istreambuf_iterator<char>(is), {}) == first);

  // Later stages need their inputs; unknown stages are config errors.
  CHECK(tw_run("verify", cfg, out.c_str(), 0, &r) == TW_ERR_IO);
  CHECK(std::string(tw_result_message(r)).find("constants") != std::string::npos);
  tw_result_free(r);
  CHECK(tw_run("dance", cfg, out.c_str(), 0, &r) == TW_ERR_CONFIG);
  tw_result_free(r);
  tw_config_free(cfg);
  fs::remove_all(out);
}
