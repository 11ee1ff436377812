#include <doctest.h>

#include <filesystem>

#include "tw/errors.hpp"
#include "tw/io.hpp"
#include "tw/schema.hpp"

using namespace tw;
namespace fs = std::filesystem;

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("ledger JSON round trip and schema") {
  ConstantsLedger L;
  L.rho0_minus = 0.3;
  L.rho0_plus = 0.1;
  L.beta_minus = L.beta_plus = L.beta_bar_minus = L.beta_bar_plus = 2.0;
  L.mu_minus = 0.01;
  L.d0 = 0.8;
  L.e_r_minus = {{0.05, 1e-4}, {0.1, 3e-4}};
  L.nu_plus = {{0.05, 1e-6}};
  L.E_max = 1e-5;
  L.alpha_star = -0.04;
  L.r_hat_plus = std::numeric_limits<double>::infinity();
  L.notes = {"a", "b"};
  const nlohmann::json j = to_json(L);
  CHECK(validate_json(j, load_schema("ledger")).empty());
  const ConstantsLedger back = ledger_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.e_r_minus == L.e_r_minus);
  CHECK(back.nu_plus == L.nu_plus);
  CHECK(back.alpha_star == L.alpha_star);
  CHECK(std::isinf(back.r_hat_plus));
  CHECK(back.notes == L.notes);
  CHECK(back.protocol == L.protocol);
  CHECK(to_json(back).dump() == j.dump());

  nlohmann::json broken = j;
  broken.erase("d0");
  CHECK_FALSE(validate_json(broken, load_schema("ledger")).empty());
  CHECK_THROWS_AS(ledger_from_json(broken), Error);
}

TEST_CASE("slice profile CSV round trip for points") {
  const PotentialSpec w = make_unbalanced_bistable(0.25);
  SliceFamily fm, fp;
  fm.point = Vec::Ones(1);
  fp.point = Vec::Zero(1);
  const SliceProblem sp(w, fm, fp);
  const Grid1D g(3.0, 31);
  SliceProfile P{g, RMat(g.n, 1)};
  for (int i = 0; i < g.n; ++i) P.U(i, 0) = 1.0 / (1.0 + std::exp(g.node(i) * 0.7071));
  write_slice_profile_csv("io_profile.csv", sp, P);
  const SliceProfile Q = read_slice_profile_csv("io_profile.csv", sp);
  fs::remove("io_profile.csv");
  CHECK(Q.x1.n == g.n);
  CHECK(Q.x1.L == doctest::Approx(3.0));
  CHECK((Q.U - P.U).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("run directory manifest detects tampering") {
  const std::string root = "io_runs";
  fs::remove_all(root);
  {
    RunDirectory run(root, std::string(64, 'a'));
    write_text_file(run.file("x.txt"), "hello");
    run.record("x.txt", "stage1");
    run.save_manifest();
    CHECK_NOTHROW(run.verify({"x.txt"}));
  }
  RunDirectory again(root, std::string(64, 'a'));
  CHECK(again.manifest()["files"]["x.txt"]["stage"] == "stage1");
  write_text_file(again.file("x.txt"), "hellO");
  try {
    again.verify({"x.txt"});
    FAIL("tampering went unnoticed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::integrity);
  }
  CHECK_THROWS_AS(again.verify({"missing.txt"}), Error);
  CHECK_THROWS_AS(RunDirectory(root, std::string(16, 'a') + std::string(48, 'b')), Error);
  fs::remove_all(root);
}
