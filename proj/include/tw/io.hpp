#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tw/analysis.hpp"
#include "tw/constants.hpp"
#include "tw/evolver.hpp"
#include "tw/heteroclinic.hpp"
#include "tw/tw_solver.hpp"

namespace tw {

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
// Pretty-printed with a fixed key order, so equal values give equal bytes.
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// One row per x1 node: x1, then the slice vector (line mode) or one row per
// (x1, x2) node: x1, x2, U1..Uk (plane mode). Values keep 17 digits.
void write_slice_profile_csv(const std::string& path, const SliceProblem& sp, const SliceProfile& P);
SliceProfile read_slice_profile_csv(const std::string& path, const SliceProblem& sp);
void write_series_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);

nlohmann::json to_json(const SpectralReport& r);
nlohmann::json to_json(const HeteroclinicResult& r);  // without the curve
nlohmann::json to_json(const ConstantsLedger& L);
ConstantsLedger ledger_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AssumptionReport& r);
nlohmann::json to_json(const ConstrainedMinimum& m);  // without the profile
nlohmann::json to_json(const SpeedSearchResult& r);   // without the profile
nlohmann::json to_json(const EvolutionResult& r);     // without the states
nlohmann::json to_json(const RateFit& r);
nlohmann::json to_json(const UniformConvergenceReport& r);
nlohmann::json to_json(const EquipartitionReport& r);
nlohmann::json to_json(const H1AuditReport& r);
// Plain-text provenance of every ledger estimate (method and protocol).
nlohmann::json ledger_provenance(const ConstantsLedger& L);

// Output directory of one configuration. Every file written through it is
// checksummed into manifest.json; stages append to the same manifest.
class RunDirectory {
 public:
  RunDirectory(const std::string& root, const std::string& config_hash);
  const std::string& path() const { return dir_; }
  std::string file(const std::string& name) const { return dir_ + "/" + name; }
  bool exists(const std::string& name) const;

  // Records name -> sha256 and the stage that produced it.
  void record(const std::string& name, const std::string& stage);
  void set_manifest_field(const std::string& key, const nlohmann::json& value);
  void save_manifest() const;
  // Throws ErrorKind::integrity when a listed file is missing or altered.
  void verify(const std::vector<std::string>& names) const;
  const nlohmann::json& manifest() const { return manifest_; }

 private:
  std::string dir_;
  nlohmann::json manifest_;
};

}  // namespace tw
