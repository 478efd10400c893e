#include "fdlab/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fdlab {
namespace {

// ---------------------------------------------------------------------------
// Validation plumbing: every error carries the path of the offending key.
// ---------------------------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

double get_num(const json& obj, const char* key, double fallback,
               const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

long long get_int(const json& obj, const char* key, long long fallback,
                  const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<long long>();
}

std::string get_str(const json& obj, const char* key,
                    const std::string& fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_num_array(const json& obj, const char* key,
                                  std::vector<double> fallback,
                                  const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      fail(path + "." + key + "[" + std::to_string(i) + "]",
           "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<std::string> get_str_array(const json& obj, const char* key,
                                       std::vector<std::string> fallback,
                                       const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(path + "." + key, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string())
      fail(path + "." + key + "[" + std::to_string(i) + "]",
           "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

void check_positive(double x, const std::string& path) {
  if (!(x > 0.0)) fail(path, "must be positive");
}

// Tail weights are validated against the admissible window; the thrown
// message carries the computed window bounds.
void check_gamma(const ExponentSet& e, double gamma, const std::string& path) {
  try {
    (void)kappa_of_gamma(e, gamma);
  } catch (const std::exception& ex) {
    fail(path, ex.what());
  }
}

void parse_solver(const json& obj, const std::string& path, SolverConfig* s) {
  require_object(obj, path);
  reject_unknown(obj, path,
                 {"R", "nodes", "stretch", "dt_init", "dt_max", "newton_tol",
                  "newton_max_iter", "degenerate_floor", "boundary",
                  "snapshot_times"});
  s->R = get_num(obj, "R", s->R, path);
  if (!(s->R > 10.0)) fail(path + ".R", "truncation radius must exceed 10");
  s->nodes = static_cast<int>(get_int(obj, "nodes", s->nodes, path));
  if (s->nodes < 16) fail(path + ".nodes", "need at least 16 nodes");
  s->stretch = get_num(obj, "stretch", s->stretch, path);
  check_positive(s->stretch, path + ".stretch");
  s->dt_init = get_num(obj, "dt_init", s->dt_init, path);
  check_positive(s->dt_init, path + ".dt_init");
  s->dt_max = get_num(obj, "dt_max", s->dt_max, path);
  check_positive(s->dt_max, path + ".dt_max");
  s->newton_tol = get_num(obj, "newton_tol", s->newton_tol, path);
  if (!(s->newton_tol > 0.0 && s->newton_tol <= 1e-10))
    fail(path + ".newton_tol", "must lie in (0, 1e-10]");
  s->newton_max_iter = static_cast<int>(
      get_int(obj, "newton_max_iter", s->newton_max_iter, path));
  if (s->newton_max_iter < 1) fail(path + ".newton_max_iter", "must be >= 1");
  s->degenerate_floor =
      get_num(obj, "degenerate_floor", s->degenerate_floor, path);
  if (!(s->degenerate_floor >= 1e-20 && s->degenerate_floor <= 1e-8))
    fail(path + ".degenerate_floor", "must lie in [1e-20, 1e-8]");
  const std::string b =
      get_str(obj, "boundary", to_string(s->boundary), path);
  if (b == "pin_to_phi_alpha")
    s->boundary = BoundaryRule::pin_to_phi_alpha;
  else if (b == "pin_to_initial")
    s->boundary = BoundaryRule::pin_to_initial;
  else
    fail(path + ".boundary",
         "expected \"pin_to_phi_alpha\" or \"pin_to_initial\"");
  s->snapshot_times =
      get_num_array(obj, "snapshot_times", s->snapshot_times, path);
  for (std::size_t i = 0; i < s->snapshot_times.size(); ++i)
    if (!(s->snapshot_times[i] >= 0.0))
      fail(path + ".snapshot_times[" + std::to_string(i) + "]",
           "must be nonnegative");
}

json solver_to_json(const SolverConfig& s) {
  json j;
  j["R"] = s.R;
  j["nodes"] = s.nodes;
  j["stretch"] = s.stretch;
  j["dt_init"] = s.dt_init;
  j["dt_max"] = s.dt_max;
  j["newton_tol"] = s.newton_tol;
  j["newton_max_iter"] = s.newton_max_iter;
  j["degenerate_floor"] = s.degenerate_floor;
  j["boundary"] = to_string(s.boundary);
  j["snapshot_times"] = s.snapshot_times;
  return j;
}

// ---------------------------------------------------------------------------
// Canonical emission
// ---------------------------------------------------------------------------

void emit_canonical(const json& j, std::string* out) {
  switch (j.type()) {
    case json::value_t::null:
      *out += "null";
      return;
    case json::value_t::boolean:
      *out += j.get<bool>() ? "true" : "false";
      return;
    case json::value_t::number_integer:
      *out += std::to_string(j.get<long long>());
      return;
    case json::value_t::number_unsigned:
      *out += std::to_string(j.get<unsigned long long>());
      return;
    case json::value_t::number_float:
      *out += canonical_number(j.get<double>());
      return;
    case json::value_t::string:
      *out += json(j.get<std::string>()).dump();  // standard escaping
      return;
    case json::value_t::array: {
      *out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) *out += ',';
        emit_canonical(j[i], out);
      }
      *out += ']';
      return;
    }
    case json::value_t::object: {
      *out += '{';
      bool first = true;  // iteration order is the map's key order
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) *out += ',';
        first = false;
        *out += json(it.key()).dump();
        *out += ':';
        emit_canonical(it.value(), out);
      }
      *out += '}';
      return;
    }
    default:
      *out += "null";
      return;
  }
}

void write_text(const std::string& text, const std::string& path) {
  if (path == "-") {  // stdout passthrough for pipelines and smoke tests
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + path);
}

void append_csv_footer(std::string* text, const RunConfig& config) {
  *text += "# schema_version ";
  *text += kSchemaVersion;
  *text += '\n';
  *text += "# config ";
  *text += canonical_json(to_json(config));
  *text += '\n';
}

std::string csv_row(std::initializer_list<double> cells) {
  std::string row;
  bool first = true;
  for (double c : cells) {
    if (!first) row += ',';
    first = false;
    row += canonical_number(c);
  }
  row += '\n';
  return row;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

json parse_strict(const std::string& text) {
  std::vector<std::set<std::string>> object_keys;
  json::parser_callback_t cb = [&object_keys](int, json::parse_event_t event,
                                              json& parsed) {
    if (event == json::parse_event_t::object_start) {
      object_keys.emplace_back();
    } else if (event == json::parse_event_t::object_end) {
      object_keys.pop_back();
    } else if (event == json::parse_event_t::key) {
      const std::string key = parsed.get<std::string>();
      if (!object_keys.back().insert(key).second)
        throw std::invalid_argument("config: duplicate key \"" + key + "\"");
    }
    return true;
  };
  try {
    return json::parse(text, cb);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

RunConfig load_config_from_string(const std::string& text) {
  const json root = parse_strict(text);
  require_object(root, "$");
  reject_unknown(root, "$",
                 {"schema_version", "params", "solver", "steady", "linearize",
                  "evolve", "rate_experiment", "instability", "transform",
                  "certify", "seed", "output_dir", "run_id"});

  if (root.contains("schema_version")) {
    const std::string v = get_str(root, "schema_version", "", "$");
    if (v != kSchemaVersion)
      fail("$.schema_version", "expected \"" + std::string(kSchemaVersion) +
                                   "\", got \"" + v + "\"");
  }

  RunConfig cfg;

  // params: the only required block
  if (!root.contains("params")) fail("$.params", "missing required block");
  const json& jp = root.at("params");
  require_object(jp, "$.params");
  reject_unknown(jp, "$.params", {"n", "p", "m"});
  if (!jp.contains("n")) fail("$.params.n", "missing");
  if (!jp.contains("p")) fail("$.params.p", "missing");
  const long long n = get_int(jp, "n", 0, "$.params");
  const double p = get_num(jp, "p", 0.0, "$.params");
  try {
    cfg.params = make_params(static_cast<int>(n), p);
  } catch (const std::exception& ex) {
    fail("$.params", ex.what());
  }
  // m is derived from p; an echoed value must agree with the one we computed
  const double m_in = get_num(jp, "m", cfg.params.m, "$.params");
  if (std::abs(m_in - cfg.params.m) > 1e-12 * cfg.params.m)
    fail("$.params.m", "inconsistent with p (expected " +
                           canonical_number(cfg.params.m) + ")");
  const ExponentSet expo = compute_exponents(cfg.params);

  if (root.contains("solver"))
    parse_solver(root.at("solver"), "$.solver", &cfg.solver);

  if (root.contains("steady")) {
    const json& o = root.at("steady");
    require_object(o, "$.steady");
    reject_unknown(o, "$.steady", {"alpha", "r_max", "tol"});
    cfg.steady.alpha = get_num(o, "alpha", cfg.steady.alpha, "$.steady");
    check_positive(cfg.steady.alpha, "$.steady.alpha");
    cfg.steady.r_max = get_num(o, "r_max", cfg.steady.r_max, "$.steady");
    check_positive(cfg.steady.r_max, "$.steady.r_max");
    cfg.steady.tol = get_num(o, "tol", cfg.steady.tol, "$.steady");
    if (!(cfg.steady.tol >= 1e-12 && cfg.steady.tol <= 1e-6))
      fail("$.steady.tol", "must lie in [1e-12, 1e-6]");
  }

  if (root.contains("linearize")) {
    const json& o = root.at("linearize");
    require_object(o, "$.linearize");
    reject_unknown(o, "$.linearize", {"alpha", "kappa", "r_max", "tol"});
    cfg.linearize.alpha =
        get_num(o, "alpha", cfg.linearize.alpha, "$.linearize");
    check_positive(cfg.linearize.alpha, "$.linearize.alpha");
    cfg.linearize.kappa =
        get_num(o, "kappa", cfg.linearize.kappa, "$.linearize");
    try {
      (void)gamma_of_kappa(expo, cfg.linearize.kappa);
    } catch (const std::exception& ex) {
      fail("$.linearize.kappa", ex.what());
    }
    cfg.linearize.r_max =
        get_num(o, "r_max", cfg.linearize.r_max, "$.linearize");
    check_positive(cfg.linearize.r_max, "$.linearize.r_max");
    cfg.linearize.tol = get_num(o, "tol", cfg.linearize.tol, "$.linearize");
    check_positive(cfg.linearize.tol, "$.linearize.tol");
  }

  if (root.contains("evolve")) {
    const json& o = root.at("evolve");
    require_object(o, "$.evolve");
    reject_unknown(o, "$.evolve",
                   {"alpha", "b", "gamma", "kind", "cap_offset", "t_end"});
    cfg.evolve.alpha = get_num(o, "alpha", cfg.evolve.alpha, "$.evolve");
    check_positive(cfg.evolve.alpha, "$.evolve.alpha");
    cfg.evolve.b = get_num(o, "b", cfg.evolve.b, "$.evolve");
    check_positive(cfg.evolve.b, "$.evolve.b");
    cfg.evolve.gamma = get_num(o, "gamma", cfg.evolve.gamma, "$.evolve");
    check_gamma(expo, cfg.evolve.gamma, "$.evolve.gamma");
    cfg.evolve.kind = get_str(o, "kind", cfg.evolve.kind, "$.evolve");
    if (cfg.evolve.kind != "exact" && cfg.evolve.kind != "above" &&
        cfg.evolve.kind != "capped_above" && cfg.evolve.kind != "below")
      fail("$.evolve.kind",
           "expected one of \"exact\", \"above\", \"capped_above\", "
           "\"below\"");
    cfg.evolve.cap_offset =
        get_num(o, "cap_offset", cfg.evolve.cap_offset, "$.evolve");
    if (!(cfg.evolve.cap_offset > 0.0 && cfg.evolve.cap_offset < 1.0))
      fail("$.evolve.cap_offset", "must lie in (0, 1)");
    cfg.evolve.t_end = get_num(o, "t_end", cfg.evolve.t_end, "$.evolve");
    check_positive(cfg.evolve.t_end, "$.evolve.t_end");
  }

  if (root.contains("rate_experiment")) {
    const json& o = root.at("rate_experiment");
    require_object(o, "$.rate_experiment");
    reject_unknown(o, "$.rate_experiment",
                   {"theorem", "alpha", "gammas", "directions", "amplitudes",
                    "solver", "cap_offset", "t_end", "window_lo", "window_hi",
                    "rate_tolerance", "r2_threshold", "snapshot_count"});
    RateExperimentBlock& rx = cfg.rate_experiment;
    rx.theorem = static_cast<int>(
        get_int(o, "theorem", rx.theorem, "$.rate_experiment"));
    if (rx.theorem != 1 && rx.theorem != 2)
      fail("$.rate_experiment.theorem", "expected 1 or 2");
    rx.alpha = get_num(o, "alpha", rx.alpha, "$.rate_experiment");
    check_positive(rx.alpha, "$.rate_experiment.alpha");
    rx.gammas = get_num_array(o, "gammas", rx.gammas, "$.rate_experiment");
    if (rx.gammas.empty())
      fail("$.rate_experiment.gammas", "need at least one tail weight");
    for (std::size_t i = 0; i < rx.gammas.size(); ++i)
      check_gamma(expo, rx.gammas[i],
                  "$.rate_experiment.gammas[" + std::to_string(i) + "]");
    rx.directions =
        get_str_array(o, "directions", rx.directions, "$.rate_experiment");
    if (rx.directions.empty())
      fail("$.rate_experiment.directions", "need at least one direction");
    for (std::size_t i = 0; i < rx.directions.size(); ++i)
      if (rx.directions[i] != "above" && rx.directions[i] != "below")
        fail("$.rate_experiment.directions[" + std::to_string(i) + "]",
             "expected \"above\" or \"below\"");
    rx.amplitudes =
        get_num_array(o, "amplitudes", rx.amplitudes, "$.rate_experiment");
    if (rx.amplitudes.empty())
      fail("$.rate_experiment.amplitudes", "need at least one amplitude");
    for (std::size_t i = 0; i < rx.amplitudes.size(); ++i)
      if (!(rx.amplitudes[i] > 0.0))
        fail("$.rate_experiment.amplitudes[" + std::to_string(i) + "]",
             "must be positive");
    if (o.contains("solver"))
      parse_solver(o.at("solver"), "$.rate_experiment.solver",
                   &rx.experiment.solver);
    ExperimentConfig& ex = rx.experiment;
    ex.cap_offset =
        get_num(o, "cap_offset", ex.cap_offset, "$.rate_experiment");
    if (!(ex.cap_offset > 0.0 && ex.cap_offset < 1.0))
      fail("$.rate_experiment.cap_offset", "must lie in (0, 1)");
    ex.t_end = get_num(o, "t_end", ex.t_end, "$.rate_experiment");
    if (!(ex.t_end >= 0.0))
      fail("$.rate_experiment.t_end", "must be nonnegative (0 = automatic)");
    ex.window_lo = get_num(o, "window_lo", ex.window_lo, "$.rate_experiment");
    ex.window_hi = get_num(o, "window_hi", ex.window_hi, "$.rate_experiment");
    if (ex.window_lo < 0.0 || ex.window_hi < 0.0)
      fail("$.rate_experiment.window_lo", "must be nonnegative (0 = default)");
    if (ex.window_lo > 0.0 && ex.window_hi > 0.0 &&
        !(ex.window_lo < ex.window_hi))
      fail("$.rate_experiment.window_hi", "must exceed window_lo");
    ex.rate_tolerance =
        get_num(o, "rate_tolerance", ex.rate_tolerance, "$.rate_experiment");
    check_positive(ex.rate_tolerance, "$.rate_experiment.rate_tolerance");
    ex.r2_threshold =
        get_num(o, "r2_threshold", ex.r2_threshold, "$.rate_experiment");
    if (!(ex.r2_threshold >= 0.0 && ex.r2_threshold <= 1.0))
      fail("$.rate_experiment.r2_threshold", "must lie in [0, 1]");
    const long long sc = get_int(o, "snapshot_count",
                                 static_cast<long long>(ex.snapshot_count),
                                 "$.rate_experiment");
    if (sc < 12) fail("$.rate_experiment.snapshot_count", "need at least 12");
    ex.snapshot_count = static_cast<std::size_t>(sc);
  }

  if (root.contains("instability")) {
    const json& o = root.at("instability");
    require_object(o, "$.instability");
    reject_unknown(o, "$.instability",
                   {"alpha", "eps", "side", "t_end", "solver"});
    InstabilityBlock& ib = cfg.instability;
    ib.alpha = get_num(o, "alpha", ib.alpha, "$.instability");
    check_positive(ib.alpha, "$.instability.alpha");
    ib.eps = get_num(o, "eps", ib.eps, "$.instability");
    check_positive(ib.eps, "$.instability.eps");
    if (!(ib.eps < ib.alpha))
      fail("$.instability.eps", "must stay below alpha");
    ib.side = get_str(o, "side", ib.side, "$.instability");
    if (ib.side != "above" && ib.side != "below" && ib.side != "both")
      fail("$.instability.side",
           "expected \"above\", \"below\", or \"both\"");
    ib.t_end = get_num(o, "t_end", ib.t_end, "$.instability");
    check_positive(ib.t_end, "$.instability.t_end");
    if (o.contains("solver"))
      parse_solver(o.at("solver"), "$.instability.solver", &ib.solver);
  }

  if (root.contains("transform")) {
    const json& o = root.at("transform");
    require_object(o, "$.transform");
    reject_unknown(o, "$.transform",
                   {"source", "T", "alpha", "t_end", "samples"});
    TransformBlock& tb = cfg.transform;
    tb.source = get_str(o, "source", tb.source, "$.transform");
    if (tb.source != "steady" && tb.source != "evolve")
      fail("$.transform.source", "expected \"steady\" or \"evolve\"");
    tb.T = get_num(o, "T", tb.T, "$.transform");
    check_positive(tb.T, "$.transform.T");
    tb.alpha = get_num(o, "alpha", tb.alpha, "$.transform");
    check_positive(tb.alpha, "$.transform.alpha");
    tb.t_end = get_num(o, "t_end", tb.t_end, "$.transform");
    check_positive(tb.t_end, "$.transform.t_end");
    tb.samples =
        static_cast<int>(get_int(o, "samples", tb.samples, "$.transform"));
    if (tb.samples < 2) fail("$.transform.samples", "need at least 2");
  }

  if (root.contains("certify")) {
    const json& o = root.at("certify");
    require_object(o, "$.certify");
    reject_unknown(o, "$.certify",
                   {"lemma", "alpha", "beta", "kappa", "gamma", "A", "b",
                    "eps"});
    CertifyBlock& cb = cfg.certify;
    cb.lemma =
        static_cast<int>(get_int(o, "lemma", cb.lemma, "$.certify"));
    const bool known_lemma = cb.lemma == 2 || cb.lemma == 4 || cb.lemma == 6 ||
                             cb.lemma == 7 || cb.lemma == 8 || cb.lemma == 9 ||
                             cb.lemma == 10;
    if (!known_lemma)
      fail("$.certify.lemma", "expected one of 2, 4, 6, 7, 8, 9, 10");
    cb.alpha = get_num(o, "alpha", cb.alpha, "$.certify");
    check_positive(cb.alpha, "$.certify.alpha");
    cb.beta = get_num(o, "beta", cb.beta, "$.certify");
    check_positive(cb.beta, "$.certify.beta");
    cb.kappa = get_num(o, "kappa", cb.kappa, "$.certify");
    try {
      (void)gamma_of_kappa(expo, cb.kappa);
    } catch (const std::exception& ex) {
      fail("$.certify.kappa", ex.what());
    }
    cb.gamma = get_num(o, "gamma", cb.gamma, "$.certify");
    check_gamma(expo, cb.gamma, "$.certify.gamma");
    cb.A = get_num(o, "A", cb.A, "$.certify");
    check_positive(cb.A, "$.certify.A");
    cb.b = get_num(o, "b", cb.b, "$.certify");
    check_positive(cb.b, "$.certify.b");
    cb.eps = get_num(o, "eps", cb.eps, "$.certify");
    if (!(cb.eps > 0.0 && cb.eps < 1.0))
      fail("$.certify.eps", "must lie in (0, 1)");
  }

  cfg.seed = get_int(root, "seed", cfg.seed, "$");
  cfg.output_dir = get_str(root, "output_dir", cfg.output_dir, "$");
  cfg.run_id = get_str(root, "run_id", cfg.run_id, "$");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return load_config_from_string(buf.str());
}

json to_json(const RunConfig& config) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["params"] = {{"n", config.params.n},
                 {"p", config.params.p},
                 {"m", config.params.m}};
  j["solver"] = solver_to_json(config.solver);
  j["steady"] = {{"alpha", config.steady.alpha},
                 {"r_max", config.steady.r_max},
                 {"tol", config.steady.tol}};
  j["linearize"] = {{"alpha", config.linearize.alpha},
                    {"kappa", config.linearize.kappa},
                    {"r_max", config.linearize.r_max},
                    {"tol", config.linearize.tol}};
  j["evolve"] = {{"alpha", config.evolve.alpha},
                 {"b", config.evolve.b},
                 {"gamma", config.evolve.gamma},
                 {"kind", config.evolve.kind},
                 {"cap_offset", config.evolve.cap_offset},
                 {"t_end", config.evolve.t_end}};
  const RateExperimentBlock& rx = config.rate_experiment;
  j["rate_experiment"] = {{"theorem", rx.theorem},
                          {"alpha", rx.alpha},
                          {"gammas", rx.gammas},
                          {"directions", rx.directions},
                          {"amplitudes", rx.amplitudes},
                          {"solver", solver_to_json(rx.experiment.solver)},
                          {"cap_offset", rx.experiment.cap_offset},
                          {"t_end", rx.experiment.t_end},
                          {"window_lo", rx.experiment.window_lo},
                          {"window_hi", rx.experiment.window_hi},
                          {"rate_tolerance", rx.experiment.rate_tolerance},
                          {"r2_threshold", rx.experiment.r2_threshold},
                          {"snapshot_count", rx.experiment.snapshot_count}};
  j["instability"] = {{"alpha", config.instability.alpha},
                      {"eps", config.instability.eps},
                      {"side", config.instability.side},
                      {"t_end", config.instability.t_end},
                      {"solver", solver_to_json(config.instability.solver)}};
  j["transform"] = {{"source", config.transform.source},
                    {"T", config.transform.T},
                    {"alpha", config.transform.alpha},
                    {"t_end", config.transform.t_end},
                    {"samples", config.transform.samples}};
  j["certify"] = {{"lemma", config.certify.lemma},
                  {"alpha", config.certify.alpha},
                  {"beta", config.certify.beta},
                  {"kappa", config.certify.kappa},
                  {"gamma", config.certify.gamma},
                  {"A", config.certify.A},
                  {"b", config.certify.b},
                  {"eps", config.certify.eps}};
  j["seed"] = config.seed;
  j["output_dir"] = config.output_dir;
  j["run_id"] = config.run_id;
  return j;
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

std::string canonical_number(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string canonical_json(const json& j) {
  std::string out;
  emit_canonical(j, &out);
  return out;
}

// ---------------------------------------------------------------------------
// Report conversions
// ---------------------------------------------------------------------------

json to_json(const ExponentSet& e) {
  json j;
  j["n"] = e.n;
  j["p"] = e.p;
  j["p_sobolev"] = e.p_sobolev;
  j["p_jl_finite"] = e.p_jl_finite;
  j["p_joseph_lundgren"] =
      e.p_jl_finite ? json(e.p_joseph_lundgren) : json(nullptr);
  j["singular_exists"] = e.singular_exists;
  j["nu"] = e.nu;
  j["L"] = e.L;
  j["pl_pm1"] = e.pl_pm1;
  j["lambda1"] = e.rates_defined ? json(e.lambda1) : json(nullptr);
  j["kappa0"] = e.kappa0;
  j["rates_defined"] = e.rates_defined;
  j["gamma_lo"] = e.gamma_lo;
  j["gamma_hi"] = e.gamma_hi;
  return j;
}

json to_json(const RateFit& fit) {
  json j;
  j["rate"] = fit.rate;
  j["intercept"] = fit.intercept;
  j["t_lo"] = fit.t_lo;
  j["t_hi"] = fit.t_hi;
  j["r_squared"] = fit.r_squared;
  j["n_points"] = fit.n_points;
  return j;
}

json to_json(const ExperimentReport& report) {
  json j;
  j["params"] = {{"n", report.params.n},
                 {"p", report.params.p},
                 {"m", report.params.m}};
  j["alpha"] = report.alpha;
  j["b"] = report.b;
  j["gamma"] = report.gamma;
  j["direction"] = to_string(report.direction);
  j["predicted_rate"] = report.predicted_rate;
  j["center_channel"] = to_json(report.center_channel);
  j["sup_channel"] = to_json(report.sup_channel);
  j["verdict"] = to_string(report.verdict);
  j["tolerance_used"] = report.tolerance_used;
  j["t_end"] = report.t_end;
  j["trace_status"] = to_string(report.trace_status);
  j["notes"] = report.notes;
  return j;
}

json to_json(const InstabilityReport& report) {
  json j;
  j["params"] = {{"n", report.params.n},
                 {"p", report.params.p},
                 {"m", report.params.m}};
  j["alpha"] = report.alpha;
  j["eps"] = report.eps;
  j["side"] = to_string(report.side);
  j["factor"] = report.factor;
  j["t_factor2"] = report.t_factor2;
  j["monotone"] = report.monotone;
  j["trace_status"] = to_string(report.trace_status);
  j["pass"] = report.pass;
  return j;
}

json to_json(const OriginalVariablesTrace& trace) {
  json j;
  j["m"] = trace.m;
  j["T"] = trace.T;
  j["tau"] = trace.tau;
  j["center_u"] = trace.center_u;
  j["t_echo"] = trace.t_echo;
  return j;
}

json trace_to_json(const EvolutionTrace& trace) {
  json j;
  j["times"] = trace.times;
  j["center_values"] = trace.center_values;
  j["sup_deviation"] = trace.sup_deviation;
  j["status"] = to_string(trace.status);
  j["alpha"] = trace.alpha;
  j["pinned_value"] = trace.pinned_value;
  j["steps_accepted"] = trace.steps_accepted;
  j["params"] = {{"n", trace.params.n},
                 {"p", trace.params.p},
                 {"m", trace.params.m}};
  return j;
}

json profile_to_json(const RadialProfile& profile) {
  json j;
  j["r"] = profile.grid;
  j["value"] = profile.values;
  j["deriv"] = profile.derivs;
  j["kind"] = static_cast<int>(profile.meta.kind);
  j["alpha"] = profile.meta.alpha;
  j["time"] = profile.meta.time;
  return j;
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

void write_report_json(const json& payload, const RunConfig& config,
                       const std::string& path) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["config"] = to_json(config);
  doc["report"] = payload;
  write_text(canonical_json(doc) + "\n", path);
}

void write_trace_csv(const EvolutionTrace& trace, const RunConfig& config,
                     const std::string& path) {
  std::string text = "t,v_center,sup_dev\n";
  for (std::size_t k = 0; k < trace.times.size(); ++k)
    text += csv_row(
        {trace.times[k], trace.center_values[k], trace.sup_deviation[k]});
  append_csv_footer(&text, config);
  write_text(text, path);
}

namespace {
void profile_csv(const RadialProfile& profile, const RunConfig& config,
                 const char* header, const std::string& path) {
  std::string text = header;
  text += '\n';
  for (std::size_t i = 0; i < profile.size(); ++i) {
    text += canonical_number(profile.grid[i]);
    text += ',';
    text += canonical_number(profile.values[i]);
    text += ',';
    // producers may omit derivatives (e.g. snapshots); leave the cell empty
    if (profile.has_derivs()) text += canonical_number(profile.derivs[i]);
    text += '\n';
  }
  append_csv_footer(&text, config);
  write_text(text, path);
}
}  // namespace

void write_profile_csv(const RadialProfile& profile, const RunConfig& config,
                       const std::string& path) {
  profile_csv(profile, config, "r,value,deriv", path);
}

void write_steady_csv(const RadialProfile& profile, const RunConfig& config,
                      const std::string& path) {
  profile_csv(profile, config, "r,phi,dphi", path);
}

void write_linearized_csv(const LinearizedProfile& profile,
                          const RunConfig& config, const std::string& path) {
  std::string text = "r,f,df,f_times_r_gamma\n";
  const RadialProfile& f = profile.base;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = f.grid[i];
    text += csv_row({r, f.values[i],
                     f.has_derivs() ? f.derivs[i] : 0.0,
                     f.values[i] * std::pow(r, profile.gamma)});
  }
  append_csv_footer(&text, config);
  write_text(text, path);
}

void emit_results(const json& report_payload, EmitFormat format,
                  const RunConfig& config, const std::string& path) {
  if (format != EmitFormat::json)
    throw std::invalid_argument(
        "emit_results: structured reports serialize as JSON only: " + path);
  write_report_json(report_payload, config, path);
}

void emit_results(const EvolutionTrace& trace, EmitFormat format,
                  const RunConfig& config, const std::string& path) {
  if (format == EmitFormat::csv)
    write_trace_csv(trace, config, path);
  else
    write_report_json(trace_to_json(trace), config, path);
}

void emit_results(const RadialProfile& profile, EmitFormat format,
                  const RunConfig& config, const std::string& path) {
  if (format == EmitFormat::csv)
    write_profile_csv(profile, config, path);
  else
    write_report_json(profile_to_json(profile), config, path);
}

std::string default_output_dir() {
  const char* env = std::getenv("FDLAB_OUTPUT_DIR");
  if (env != nullptr && env[0] != '\0') return env;
  return ".";
}

std::string output_path(const RunConfig& config, const std::string& run_id,
                        const std::string& ext) {
  const std::string dir =
      config.output_dir.empty() ? default_output_dir() : config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);  // best effort; open reports
  std::string id;
  for (char c : run_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    id += ok ? c : '_';
  }
  if (id.empty()) id = "run";
  return dir + "/" + id + "." + ext;
}

}  // namespace fdlab
