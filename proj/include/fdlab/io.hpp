#pragma once
// Configuration loading and result serialization.
//
// Configs are JSON with strict validation: unknown keys are rejected with
// their full path, duplicate keys are parse errors, and every defaulted
// field is materialized so the echo written into outputs is complete and
// explicit. Serialization is canonical: object keys sorted, floats printed
// with 17 significant digits (enough to reproduce the double exactly), no
// whitespace — identical inputs give identical bytes, and parsing a
// canonical document and re-serializing it reproduces the bytes.
//
// Every output file carries the schema version and the materialized config:
// JSON documents as top-level fields, CSV files as trailing comment lines
// after the data (the first line stays the pinned column header).

#include <string>
#include <vector>

#include "json.hpp"

#include "fdlab/exponents.hpp"
#include "fdlab/linearized.hpp"
#include "fdlab/pde.hpp"
#include "fdlab/profile.hpp"
#include "fdlab/rates.hpp"

namespace fdlab {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "fdlab-1";

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct SteadyBlock {
  double alpha = 1.0;
  double r_max = 400.0;
  double tol = 1e-6;
};

struct LinearizeBlock {
  double alpha = 1.0;
  double kappa = 7.0 / 17.0;
  double r_max = 1e4;
  double tol = 1e-8;
};

struct EvolveBlock {
  double alpha = 1.0;
  double b = 0.1;
  double gamma = 6.0;
  std::string kind = "below";  // exact | above | capped_above | below
  double cap_offset = 1e-6;    // shift of the singular cap (capped_above)
  double t_end = 20.0;
};

struct RateExperimentBlock {
  int theorem = 1;  // 1: two-sided band; 2: one-sided sharpness + b sweep
  double alpha = 1.0;
  std::vector<double> gammas = {4.5, 6.0};
  std::vector<std::string> directions = {"above", "below"};
  std::vector<double> amplitudes = {0.1};  // b values; >1 entry sweeps
  // Embeds its own solver: rate measurements run on the subtraction-tuned
  // grid (wide box, fine interior, fixed lockstep steps), not the generic
  // evolve defaults. Keys under rate_experiment.solver override it.
  ExperimentConfig experiment;
};

struct InstabilityBlock {
  double alpha = 1.0;
  double eps = 0.05;
  std::string side = "above";  // above | below | both
  double t_end = 50.0;
  // Own solver for the same reason: the dichotomy needs a fine interior
  // before the truncation error stops masking the slow physical growth.
  SolverConfig solver;
  InstabilityBlock() {
    solver.R = 100.0;
    solver.nodes = 12000;
  }
};

struct TransformBlock {
  // source "steady" transforms the frozen trace v = alpha (the separable
  // solution check); "evolve" transforms the trace of the evolve block
  std::string source = "steady";
  double T = 2.0;
  double alpha = 1.0;
  double t_end = 5.0;
  int samples = 21;
};

struct CertifyBlock {
  int lemma = 2;  // one of 2, 4, 6, 7, 8, 9, 10
  double alpha = 1.0;
  double beta = 2.0;
  double kappa = 7.0 / 17.0;
  double gamma = 6.0;
  double A = 0.3;
  double b = 0.1;
  double eps = 1e-3;
};

struct RunConfig {
  Params params = make_params(20, 3.0);
  SolverConfig solver;  // used by evolve and by transform source "evolve"
  SteadyBlock steady;
  LinearizeBlock linearize;
  EvolveBlock evolve;
  RateExperimentBlock rate_experiment;
  InstabilityBlock instability;
  TransformBlock transform;
  CertifyBlock certify;
  long long seed = 0;
  std::string output_dir;  // empty: $FDLAB_OUTPUT_DIR, else "."
  std::string run_id;      // empty: the CLI derives one per subcommand
};

// Parse with duplicate-key rejection (std::invalid_argument naming the key).
json parse_strict(const std::string& text);

// Validate and materialize a config. Unknown keys, wrong types, and value
// violations (n < 3, p <= 1, tail weights outside the admissible window,
// nonpositive amplitudes...) throw std::invalid_argument with the key path;
// the tail-weight message carries the computed admissible window.
RunConfig load_config_from_string(const std::string& text);
RunConfig load_config(const std::string& path);

// Full materialized tree: every field explicit, suitable for echoing.
json to_json(const RunConfig& config);

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

// Sorted keys, 17-significant-digit floats, non-finite numbers as null,
// no whitespace.
std::string canonical_json(const json& j);

// Format one double the way canonical_json does.
std::string canonical_number(double x);

// ---------------------------------------------------------------------------
// Report conversions
// ---------------------------------------------------------------------------

json to_json(const ExponentSet& e);
json to_json(const RateFit& fit);
json to_json(const ExperimentReport& report);
json to_json(const InstabilityReport& report);
json to_json(const OriginalVariablesTrace& trace);
json trace_to_json(const EvolutionTrace& trace);   // channels, no snapshots
json profile_to_json(const RadialProfile& profile);

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

enum class EmitFormat { csv, json };

// Wrap a payload as {config, report, schema_version} and write canonical
// bytes. I/O failures throw std::runtime_error naming the path.
void write_report_json(const json& payload, const RunConfig& config,
                       const std::string& path);

// Pinned CSV headers; config echo and schema version appended as trailing
// '#' comment lines.
void write_trace_csv(const EvolutionTrace& trace, const RunConfig& config,
                     const std::string& path);  // t,v_center,sup_dev
void write_profile_csv(const RadialProfile& profile, const RunConfig& config,
                       const std::string& path);  // r,value,deriv
void write_steady_csv(const RadialProfile& profile, const RunConfig& config,
                      const std::string& path);  // r,phi,dphi
void write_linearized_csv(const LinearizedProfile& profile,
                          const RunConfig& config,
                          const std::string& path);  // r,f,df,f_times_r_gamma

// Report/trace/profile dispatch used by the CLI.
void emit_results(const json& report_payload, EmitFormat format,
                  const RunConfig& config, const std::string& path);
void emit_results(const EvolutionTrace& trace, EmitFormat format,
                  const RunConfig& config, const std::string& path);
void emit_results(const RadialProfile& profile, EmitFormat format,
                  const RunConfig& config, const std::string& path);

// $FDLAB_OUTPUT_DIR when set and nonempty, else ".".
std::string default_output_dir();

// output_dir / run_id.ext with the directory resolved via the config and
// the run id sanitized to [A-Za-z0-9._-].
std::string output_path(const RunConfig& config, const std::string& run_id,
                        const std::string& ext);

}  // namespace fdlab
