#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fdlab/exponents.hpp>
#include <fdlab/io.hpp>
#include <fdlab/linearized.hpp>
#include <fdlab/pde.hpp>
#include <fdlab/profile.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

using namespace fdlab;

namespace {

const char* kMinimal = R"({"params":{"n":20,"p":3.0}})";

bool mentions(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

// Run a loader call expected to fail and check the message names the key.
void expect_rejected(const std::string& text, const std::string& needle) {
  try {
    (void)load_config_from_string(text);
    FAIL_CHECK("config accepted but should have been rejected: " << text);
  } catch (const std::invalid_argument& e) {
    CHECK_MESSAGE(mentions(e, needle),
                  "message \"" << e.what() << "\" lacks \"" << needle << "\"");
  }
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return std::string(std::istreambuf_iterator<char>(is),
                     std::istreambuf_iterator<char>());
}

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

std::string work_dir() {
  const std::string dir = "io_test_tmp";
  std::filesystem::create_directories(dir);
  return dir;
}

EvolutionTrace tiny_trace() {
  EvolutionTrace tr;
  tr.params = make_params(20, 3.0);
  tr.alpha = 1.0;
  tr.times = {0.0, 0.5, 1.0};
  tr.center_values = {1.1, 1.05, 1.025};
  tr.sup_deviation = {0.1, 0.05, 0.025};
  tr.pinned_value = 1.0;
  tr.steps_accepted = 2;
  return tr;
}

RadialProfile tiny_profile(bool with_derivs) {
  RadialProfile p;
  p.grid = {0.0, 1.0, 2.0};
  p.values = {1.0, 0.8, 0.5};
  if (with_derivs) p.derivs = {0.0, -0.3, -0.25};
  p.meta.params = make_params(20, 3.0);
  p.meta.alpha = 1.0;
  return p;
}

}  // namespace

TEST_CASE("minimal config materializes every default") {
  const RunConfig cfg = load_config_from_string(kMinimal);
  CHECK(cfg.params.n == 20);
  CHECK(cfg.params.p == doctest::Approx(3.0));
  CHECK(cfg.params.m == doctest::Approx(1.0 / 3.0));
  CHECK(cfg.solver.R == doctest::Approx(100.0));
  CHECK(cfg.solver.nodes == 2400);
  CHECK(cfg.solver.boundary == BoundaryRule::pin_to_phi_alpha);
  CHECK(cfg.steady.alpha == doctest::Approx(1.0));
  CHECK(cfg.steady.r_max == doctest::Approx(400.0));
  CHECK(cfg.linearize.kappa == doctest::Approx(7.0 / 17.0));
  CHECK(cfg.evolve.gamma == doctest::Approx(6.0));
  CHECK(cfg.evolve.kind == "below");
  // measurement block carries its own tuned solver, not the shared one
  CHECK(cfg.rate_experiment.experiment.solver.R == doctest::Approx(800.0));
  CHECK(cfg.rate_experiment.experiment.solver.nodes == 7200);
  CHECK(cfg.rate_experiment.experiment.snapshot_count == 61);
  CHECK(cfg.rate_experiment.theorem == 1);
  CHECK(cfg.rate_experiment.gammas == std::vector<double>{4.5, 6.0});
  CHECK(cfg.instability.solver.nodes == 12000);
  CHECK(cfg.instability.eps == doctest::Approx(0.05));
  CHECK(cfg.instability.t_end == doctest::Approx(50.0));
  CHECK(cfg.transform.T == doctest::Approx(2.0));
  CHECK(cfg.certify.lemma == 2);
  CHECK(cfg.seed == 0);
  CHECK(cfg.output_dir.empty());

  // the echo carries the materialized values, not the sparse input
  const json echo = to_json(cfg);
  CHECK(echo.at("schema_version").get<std::string>() == kSchemaVersion);
  CHECK(echo.at("solver").at("R").get<double>() == doctest::Approx(100.0));
  CHECK(echo.at("rate_experiment").at("solver").at("nodes").get<int>() ==
        7200);
  CHECK(echo.at("evolve").at("kind").get<std::string>() == "below");
}

TEST_CASE("schema violations are rejected with the offending key path") {
  expect_rejected(R"({"params":{"n":20,"p":3.0},"solvr":{}})", "$.solvr");
  expect_rejected(R"({"params":{"n":20,"p":3.0,"q":1}})", "$.params.q");
  expect_rejected(R"({"params":{"n":20}})", "$.params.p");
  expect_rejected(R"({"params":{"p":3.0}})", "$.params.n");
  expect_rejected(R"({"solver":{"R":40}})", "$.params");
  expect_rejected(R"({"params":{"n":2,"p":3.0}})", "$.params");
  expect_rejected(R"({"params":{"n":20,"p":1.0}})", "$.params");
  expect_rejected(R"({"params":{"n":20,"p":"three"}})", "$.params.p");
  expect_rejected(R"({"params":{"n":20.5,"p":3.0}})", "$.params.n");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"schema_version":"bogus"})",
      "$.schema_version");
}

TEST_CASE("duplicate keys are a parse error") {
  CHECK_THROWS_AS(
      (void)parse_strict(R"({"seed":1,"seed":2})"), std::invalid_argument);
  try {
    (void)parse_strict(R"({"params":{"n":20,"n":21,"p":3.0}})");
    FAIL_CHECK("duplicate key accepted");
  } catch (const std::invalid_argument& e) {
    CHECK(mentions(e, "duplicate"));
    CHECK(mentions(e, "n"));
  }
  // malformed text is also an invalid_argument, not a library escape
  CHECK_THROWS_AS((void)parse_strict("{"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_strict("{} trailing"), std::invalid_argument);
}

TEST_CASE("tail weight outside the admissible window names the window") {
  // the computed bounds must appear in the message so a user can fix the file
  try {
    (void)load_config_from_string(
        R"({"params":{"n":20,"p":3.0},"evolve":{"gamma":3.2}})");
    FAIL_CHECK("gamma=3.2 accepted");
  } catch (const std::invalid_argument& e) {
    CHECK(mentions(e, "$.evolve.gamma"));
    CHECK(mentions(e, "3.52277442494833"));
    CHECK(mentions(e, "9"));
  }
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"rate_experiment":{"gammas":[6.0,9.5]}})",
      "$.rate_experiment.gammas[1]");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"certify":{"gamma":12.0}})",
      "$.certify.gamma");
}

TEST_CASE("solver and block value checks") {
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"solver":{"R":5}})", "$.solver.R");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"solver":{"newton_tol":1e-9}})",
      "$.solver.newton_tol");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"solver":{"boundary":"clamp"}})",
      "$.solver.boundary");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"evolve":{"kind":"sideways"}})",
      "$.evolve.kind");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"instability":{"side":"left"}})",
      "$.instability.side");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"instability":{"eps":2.0}})",
      "$.instability.eps");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"rate_experiment":{"theorem":3}})",
      "$.rate_experiment.theorem");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"rate_experiment":{"snapshot_count":4}})",
      "$.rate_experiment.snapshot_count");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},)"
      R"("rate_experiment":{"window_lo":5.0,"window_hi":2.0}})",
      "$.rate_experiment.window_hi");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"certify":{"lemma":5}})",
      "$.certify.lemma");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"transform":{"source":"file"}})",
      "$.transform.source");
  expect_rejected(
      R"({"params":{"n":20,"p":3.0},"linearize":{"kappa":0.9}})",
      "$.linearize.kappa");
}

TEST_CASE("serialization is canonical: sorted keys, deterministic bytes") {
  json j;
  j["zeta"] = 1;
  j["alpha"] = 2;
  j["mid"] = json{{"b", 1}, {"a", 2}};
  CHECK(canonical_json(j) == R"({"alpha":2,"mid":{"a":2,"b":1},"zeta":1})");

  const RunConfig cfg = load_config_from_string(kMinimal);
  const std::string s1 = canonical_json(to_json(cfg));
  const std::string s2 = canonical_json(to_json(cfg));
  CHECK(s1 == s2);

  // parse -> serialize round trip reproduces the bytes exactly
  const RunConfig cfg2 = load_config_from_string(s1);
  CHECK(canonical_json(to_json(cfg2)) == s1);

  // top-level keys appear in lexicographic order
  const auto pos = [&s1](const char* key) {
    return s1.find("\"" + std::string(key) + "\":");
  };
  CHECK(pos("certify") < pos("evolve"));
  CHECK(pos("evolve") < pos("instability"));
  CHECK(pos("instability") < pos("params"));
  CHECK(pos("params") < pos("schema_version"));
  CHECK(pos("schema_version") < pos("seed"));
  // "solver" also appears nested inside other blocks, so take the last one
  CHECK(pos("seed") < s1.rfind("\"solver\":"));
  CHECK(s1.rfind("\"solver\":") < pos("transform"));
}

TEST_CASE("numbers carry 17 significant digits and survive the round trip") {
  CHECK(canonical_number(1.0 / 3.0) == "0.33333333333333331");
  CHECK(canonical_number(0.1) == "0.10000000000000001");
  CHECK(canonical_number(1.0) == "1");
  // %g trims trailing zeros; the round trip below confirms exactness
  CHECK(canonical_number(-2.5e-300) == "-2.5e-300");
  CHECK(canonical_number(std::atan(1.0) * 4.0) == "3.1415926535897931");
  CHECK(canonical_number(std::numeric_limits<double>::quiet_NaN()) == "null");
  CHECK(canonical_number(std::numeric_limits<double>::infinity()) == "null");

  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-30, 30);
  for (int i = 0; i < 2000; ++i) {
    const double x = mant(rng) * std::pow(10.0, expo(rng));
    const std::string s = canonical_number(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }

  // non-finite values inside documents degrade to null, never to bare tokens
  json j;
  j["bad"] = std::numeric_limits<double>::quiet_NaN();
  j["inf"] = std::numeric_limits<double>::infinity();
  CHECK(canonical_json(j) == R"({"bad":null,"inf":null})");
}

TEST_CASE("report converters expose undefined quantities as null") {
  const json ordered = to_json(compute_exponents(make_params(20, 3.0)));
  CHECK(ordered.at("lambda1").get<double>() ==
        doctest::Approx(8.0 - std::sqrt(30.0)));
  CHECK(ordered.at("p_joseph_lundgren").is_number());
  CHECK(ordered.at("rates_defined").get<bool>());

  // oscillatory regime: no ordering rate exists
  const json intersecting = to_json(compute_exponents(make_params(20, 1.4)));
  CHECK(intersecting.at("lambda1").is_null());
  CHECK_FALSE(intersecting.at("rates_defined").get<bool>());

  // low dimension: the upper critical exponent is infinite
  const json low_n = to_json(compute_exponents(make_params(8, 3.0)));
  CHECK(low_n.at("p_joseph_lundgren").is_null());
  CHECK_FALSE(low_n.at("p_jl_finite").get<bool>());
}

TEST_CASE("csv writers pin their headers and embed schema plus config") {
  const std::string dir = work_dir();
  const RunConfig cfg = load_config_from_string(kMinimal);

  write_trace_csv(tiny_trace(), cfg, dir + "/trace.csv");
  const std::string trace = slurp(dir + "/trace.csv");
  CHECK(first_line(trace) == "t,v_center,sup_dev");
  CHECK(trace.find("0.5,1.05,0.050000000000000003\n") != std::string::npos);

  write_profile_csv(tiny_profile(true), cfg, dir + "/profile.csv");
  const std::string profile = slurp(dir + "/profile.csv");
  CHECK(first_line(profile) == "r,value,deriv");
  CHECK(profile.find("1,0.80000000000000004,-0.29999999999999999\n") !=
        std::string::npos);

  // derivative column stays present but empty when the producer omits it
  write_profile_csv(tiny_profile(false), cfg, dir + "/profile_nd.csv");
  const std::string nd = slurp(dir + "/profile_nd.csv");
  CHECK(nd.find("1,0.80000000000000004,\n") != std::string::npos);

  write_steady_csv(tiny_profile(true), cfg, dir + "/steady.csv");
  CHECK(first_line(slurp(dir + "/steady.csv")) == "r,phi,dphi");

  LinearizedProfile lp;
  lp.base = tiny_profile(true);
  lp.gamma = 6.0;
  lp.alpha = 1.0;
  lp.kappa = 7.0 / 17.0;
  write_linearized_csv(lp, cfg, dir + "/linearized.csv");
  const std::string lin = slurp(dir + "/linearized.csv");
  CHECK(first_line(lin) == "r,f,df,f_times_r_gamma");
  // f * r^gamma at r=2, f=0.5, gamma=6 -> 32
  CHECK(lin.find("2,0.5,-0.25,32\n") != std::string::npos);

  for (const char* name :
       {"trace.csv", "profile.csv", "steady.csv", "linearized.csv"}) {
    const std::string text = slurp(dir + "/" + name);
    CHECK(text.find("# schema_version fdlab-1\n") != std::string::npos);
    CHECK(text.find("# config {\"certify\":") != std::string::npos);
    CHECK(text.find("\"params\":{\"m\":0.33333333333333331,\"n\":20,\"p\":3}") !=
          std::string::npos);
  }
}

TEST_CASE("json documents wrap payloads with config echo and version") {
  const std::string dir = work_dir();
  const RunConfig cfg = load_config_from_string(kMinimal);

  write_report_json(trace_to_json(tiny_trace()), cfg, dir + "/doc.json");
  const std::string text = slurp(dir + "/doc.json");
  const json doc = parse_strict(text);
  CHECK(doc.at("schema_version").get<std::string>() == kSchemaVersion);
  CHECK(doc.at("config").at("params").at("n").get<int>() == 20);
  CHECK(doc.at("report").at("center_values").size() == 3);
  CHECK(doc.at("report").at("status").get<std::string>() == "completed");

  // identical inputs produce identical bytes on a second write
  write_report_json(trace_to_json(tiny_trace()), cfg, dir + "/doc2.json");
  CHECK(slurp(dir + "/doc2.json") == text);

  // emit_results dispatches by format and refuses csv for bare reports
  emit_results(trace_to_json(tiny_trace()), EmitFormat::json, cfg,
               dir + "/emit.json");
  CHECK(slurp(dir + "/emit.json") == text);
  emit_results(tiny_trace(), EmitFormat::csv, cfg, dir + "/emit.csv");
  CHECK(first_line(slurp(dir + "/emit.csv")) == "t,v_center,sup_dev");
  CHECK_THROWS_AS(emit_results(json::object(), EmitFormat::csv, cfg,
                               dir + "/bad.csv"),
                  std::invalid_argument);
}

TEST_CASE("write failures name the path") {
  const RunConfig cfg = load_config_from_string(kMinimal);
  const std::string bad = "/nonexistent_dir_for_io_test/out.json";
  try {
    write_report_json(json::object(), cfg, bad);
    FAIL_CHECK("write to unwritable path succeeded");
  } catch (const std::runtime_error& e) {
    CHECK(mentions(e, bad));
  }
}

TEST_CASE("output locations honor the environment override") {
  unsetenv("FDLAB_OUTPUT_DIR");
  CHECK(default_output_dir() == ".");
  setenv("FDLAB_OUTPUT_DIR", "io_test_tmp/envdir", 1);
  CHECK(default_output_dir() == "io_test_tmp/envdir");

  RunConfig cfg = load_config_from_string(kMinimal);
  CHECK(output_path(cfg, "run one/two", "json") ==
        "io_test_tmp/envdir/run_one_two.json");
  CHECK(std::filesystem::is_directory("io_test_tmp/envdir"));
  cfg.output_dir = "io_test_tmp/explicit";
  CHECK(output_path(cfg, "", "csv") == "io_test_tmp/explicit/run.csv");
  unsetenv("FDLAB_OUTPUT_DIR");
}

TEST_CASE("config file loading reads from disk") {
  const std::string dir = work_dir();
  const std::string path = dir + "/cfg.json";
  std::ofstream(path) << R"({"params":{"n":20,"p":3.0},"seed":42,)"
                      << R"("run_id":"abc"})";
  const RunConfig cfg = load_config(path);
  CHECK(cfg.seed == 42);
  CHECK(cfg.run_id == "abc");
  CHECK_THROWS_AS((void)load_config(dir + "/missing.json"),
                  std::runtime_error);
}
