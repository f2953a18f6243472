#pragma once

// Batch orchestration: configuration, the run itself and JSON/CSV reports.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dvlab/lemmas.hpp"

#ifndef DVLAB_VERSION
#define DVLAB_VERSION "0.0.0"
#endif

namespace dvlab {

inline constexpr int kSchemaVersion = 1;

/// Bad configuration or flags; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitNonConvergence = 3 };

inline const std::vector<std::string>& lemma_ids() {
  static const std::vector<std::string> ids = {
      "goodness_equivalence", "support_characterization", "approx_eigenvector", "subspace_volume",
      "small_support",        "distinct_values",          "pick_gamma",         "sign_continuity",
      "typicality",           "two_sign_vectors",         "find_lambda",        "approx_orthonormal",
      "sigma_spread",         "parameter_chain",          "counterexample_probe"};
  return ids;
}

inline bool is_monte_carlo(const std::string& id) {
  static const std::set<std::string> mc = {"subspace_volume", "small_support", "distinct_values", "pick_gamma",
                                           "typicality"};
  return mc.count(id) > 0;
}

struct ExperimentConfig {
  int n = 64;
  double eta = 1.0 / 16.0;
  std::optional<int> rank;  // default floor(n/2)
  Seed seed{1, 0};
  int subspace_trials = 200;
  int grid_size = 2048;
  std::int64_t mc_trials = 100000;
  std::int64_t sandwich_samples = 10000;
  std::vector<std::string> lemma_selection = lemma_ids();
  ParameterSet parameter_set;
  std::string output_path;  // empty: stdout
  std::string format = "json";
  double tol = 1e-6;
  bool projection_norm = false;
  int m = 1;
  double gamma = 0.1;
  double alpha = 0.25;
  bool mc_custom = false;  // subspace_volume runs only the (n, m, gamma) instance

  bool sandwich = true;
  bool subspaces = true;
  bool lemmas = true;

  int effective_rank() const { return rank.value_or(std::max(1, default_rank(n))); }
  int goodness_grid() const { return std::max(256, grid_size); }

  void validate() const {
    if (n < 2) throw UsageError("n must be >= 2");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw UsageError("eta must be finite and >= 0");
    if (rank && (*rank < 1 || *rank > n)) throw UsageError("rank must lie in [1, n]");
    if (grid_size < 64) throw UsageError("grid must be >= 64");
    if (subspace_trials < 1) throw UsageError("subspace trials must be >= 1");
    if (format != "json" && format != "csv") throw UsageError("format must be json or csv");
    if (!(tol > 0.0)) throw UsageError("tol must be positive");
    if (mc_custom && (m < 1 || m >= n)) throw UsageError("m must lie in [1, n)");
    if (mc_custom && !(gamma > 0.0)) throw UsageError("gamma must be positive");
    if (lemmas) {
      for (const auto& id : lemma_selection) {
        if (std::find(lemma_ids().begin(), lemma_ids().end(), id) == lemma_ids().end()) {
          std::string all;
          for (const auto& v : lemma_ids()) all += (all.empty() ? "" : ", ") + v;
          throw UsageError("unknown lemma id '" + id + "'; valid ids: " + all);
        }
        if (is_monte_carlo(id) && mc_trials < 1000) throw UsageError("mc trials must be >= 1000 for " + id);
      }
    }
    try {
      parameter_set.validate();
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

/// Applies one typed key to the config. Types: int, real, bool, string,
/// list, rational.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& type, const std::string& value) {
  auto as_int = [&] {
    if (type != "int") throw UsageError(key + " expects type int");
    try {
      std::size_t pos = 0;
      long long v = std::stoll(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw UsageError("bad int for " + key + ": '" + value + "'");
    }
  };
  auto as_real = [&] {
    if (type != "real") throw UsageError(key + " expects type real");
    try {
      std::size_t pos = 0;
      double v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw UsageError("bad real for " + key + ": '" + value + "'");
    }
  };
  auto as_bool = [&] {
    if (type != "bool") throw UsageError(key + " expects type bool");
    if (value == "true") return true;
    if (value == "false") return false;
    throw UsageError("bad bool for " + key + ": '" + value + "'");
  };
  if (key == "n") cfg.n = static_cast<int>(as_int());
  else if (key == "eta") cfg.eta = as_real();
  else if (key == "rank") cfg.rank = static_cast<int>(as_int());
  else if (key == "seed.master") cfg.seed.master = static_cast<std::uint64_t>(as_int());
  else if (key == "seed.stream") cfg.seed.stream = static_cast<std::uint64_t>(as_int());
  else if (key == "subspace_trials") cfg.subspace_trials = static_cast<int>(as_int());
  else if (key == "grid_size") cfg.grid_size = static_cast<int>(as_int());
  else if (key == "mc_trials") cfg.mc_trials = as_int();
  else if (key == "sandwich_samples") cfg.sandwich_samples = as_int();
  else if (key == "tol") cfg.tol = as_real();
  else if (key == "m") cfg.m = static_cast<int>(as_int());
  else if (key == "gamma") cfg.gamma = as_real();
  else if (key == "alpha") cfg.alpha = as_real();
  else if (key == "projection_norm") cfg.projection_norm = as_bool();
  else if (key == "mc_custom") cfg.mc_custom = as_bool();
  else if (key == "format" || key == "output") {
    if (type != "string") throw UsageError(key + " expects type string");
    (key == "format" ? cfg.format : cfg.output_path) = value;
  } else if (key == "lemmas") {
    if (type != "list") throw UsageError("lemmas expects type list");
    cfg.lemma_selection = detail::split_list(value);
  } else if (key.rfind("param.", 0) == 0) {
    if (type != "rational") throw UsageError(key + " expects type rational");
    try {
      cfg.parameter_set.at(key.substr(6)) = exact::parse_rational(value);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

/// Reads "key:type = value" lines; '#' starts a comment.
inline void load_config(ExperimentConfig& cfg, std::istream& in, const std::string& origin = "config") {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto colon = line.find(':');
    if (eq == std::string::npos || colon == std::string::npos || colon > eq)
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected 'key:type = value'");
    apply_setting(cfg, detail::trim(line.substr(0, colon)), detail::trim(line.substr(colon + 1, eq - colon - 1)),
                  detail::trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  load_config(cfg, in, path);
}

struct SandwichResult {
  std::int64_t samples = 0;
  double min_ratio = 0.0;  // min ||x|| / |x|
  double max_ratio = 0.0;  // max ||x|| / |x|
  double upper = 0.0;      // sqrt 2 + eta
  double slack = 1e-9;
  bool passed = false;
};

inline SandwichResult sandwich_check(const NormSpec& spec, std::int64_t samples, Seed seed, double slack = 1e-9) {
  SandwichResult out;
  out.samples = samples;
  out.upper = spec.distortion();
  out.slack = slack;
  std::vector<double> lo(kMonteCarloChunks, std::numeric_limits<double>::infinity()), hi(kMonteCarloChunks, 0.0);
  parallel_for(kMonteCarloChunks, [&](std::size_t c) {
    Engine e = make_engine(derive(seed, "sandwich", c));
    for (std::int64_t i = static_cast<std::int64_t>(c); i < samples; i += kMonteCarloChunks) {
      Vector x = sample_unit_sphere(spec.n(), e);
      // Spread the Euclidean length too; the ratio is scale invariant.
      x *= std::ldexp(1.0, static_cast<int>(i % 9) - 4);
      const double r = norm(spec, x) / x.norm();
      lo[c] = std::min(lo[c], r);
      hi[c] = std::max(hi[c], r);
    }
  });
  out.min_ratio = *std::min_element(lo.begin(), lo.end());
  out.max_ratio = *std::max_element(hi.begin(), hi.end());
  out.passed = out.min_ratio >= 1.0 - slack && out.max_ratio <= out.upper * (1.0 + slack);
  return out;
}

struct RunReport {
  ExperimentConfig config;
  std::optional<SandwichResult> sandwich;
  std::vector<SubspaceReport> subspaces;
  std::optional<LemmaReport> probe;
  std::vector<LemmaReport> lemmas;
  std::map<std::string, double> timing;  // seconds per section
  std::vector<std::string> failed_ids;
  int exit_code = kExitPass;
};

namespace detail {

template <class F>
auto timed(RunReport& rep, const std::string& section, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  rep.timing[section] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void append(std::vector<LemmaReport>& out, std::vector<LemmaReport> more) {
  for (auto& r : more) out.push_back(std::move(r));
}

/// Desk-scale instances for one lemma id.
inline std::vector<LemmaReport> run_lemma(const std::string& id, const NormSpec& spec, const ExperimentConfig& cfg,
                                          Seed seed, RunReport& rep) {
  std::vector<LemmaReport> out;
  const std::int64_t mc = cfg.mc_trials;
  if (id == "goodness_equivalence") {
    EquivalenceOptions opt;
    opt.grid_size = cfg.goodness_grid();
    opt.tol = cfg.tol;
    for (int i = 0; i < 4; ++i) {
      const Seed s = derive(seed, "random", i);
      append(out, verify_goodness_equivalence(spec, random_subspace(spec.n(), s), std::nullopt, s, opt));
    }
    if (spec.projection().rank >= 2) {
      const Seed s = derive(seed, "inside_range");
      append(out, verify_goodness_equivalence(spec, random_subspace_within(spec.projection().basis, s), std::nullopt, s, opt));
    }
  } else if (id == "support_characterization") {
    for (int i = 0; i < 3; ++i) {
      const Vector x = sample_unit_sphere(spec.n(), derive(seed, "point", i));
      for (double delta : {0.5, 0.05}) append(out, verify_support_characterization(spec, x, delta, cfg.tol));
    }
  } else if (id == "approx_eigenvector") {
    Vector y(2);
    y << 1.0, 1.0;
    out.push_back(verify_approx_eigenvector(coordinate_projection(2, 1), y.normalized(), 1.5));
    out.push_back(approx_eigenvector_sweep(6, 2000, derive(seed, "sweep")));
  } else if (id == "subspace_volume") {
    if (cfg.mc_custom) {
      out.push_back(mc_subspace_volume(cfg.n, cfg.m, cfg.gamma, mc, derive(seed, "configured")));
    } else {
      out.push_back(mc_subspace_volume(2, 1, 0.1, mc, derive(seed, "line")));
      out.push_back(mc_subspace_volume(20, 10, 1e-4, mc, derive(seed, "half")));
    }
  } else if (id == "small_support") {
    const std::int64_t t = std::min<std::int64_t>(mc, 20000);
    out.push_back(small_support_incidence(6, 1, 1, 0.01, StructureMode::small_support, t, derive(seed, "axes")));
    out.push_back(small_support_incidence(8, 2, 2, 0.05, StructureMode::small_support, t, derive(seed, "pairs")));
  } else if (id == "distinct_values") {
    out.push_back(small_support_incidence(6, 3, 1, 0.05, StructureMode::distinct_values, std::min<std::int64_t>(mc, 20000),
                                          derive(seed, "constant")));
    out.push_back(small_support_incidence(8, 3, 2, 0.01, StructureMode::distinct_values, std::min<std::int64_t>(mc, 2000),
                                          derive(seed, "two_values")));
  } else if (id == "pick_gamma") {
    out.push_back(verify_pick_gamma(8, std::min<std::int64_t>(mc, 2000), derive(seed, "n8")));
  } else if (id == "sign_continuity") {
    out.push_back(sign_continuity_sweep(spec.n(), 10000, derive(seed, "sweep")));
  } else if (id == "typicality") {
    const TwoDSubspace Y = random_subspace(spec.n(), derive(seed, "subspace"));
    out.push_back(verify_typicality_probability(Y, 0.01, 0.5, cfg.alpha, mc, derive(seed, "theta")));
  } else if (id == "two_sign_vectors") {
    out.push_back(exhaustive_two_sign_vectors(10));
  } else if (id == "find_lambda") {
    out.push_back(find_lambda_sweep(6, 100000, derive(seed, "sweep")));
  } else if (id == "approx_orthonormal") {
    out.push_back(approx_orthonormal_sweep(5, 10, 100000, derive(seed, "sweep")));
  } else if (id == "sigma_spread") {
    const TwoDSubspace Y = random_subspace(spec.n(), derive(seed, "subspace"));
    const SignSetAnalysis a = sigma_set(Y, cfg.alpha, 0.01, 0.5, 0.5, std::max(64, cfg.grid_size));
    if (a.samples.size() >= 4) {
      Matrix W(spec.n(), 4);
      for (int j = 0; j < 4; ++j) W.col(j) = a.samples[static_cast<std::size_t>(j) * a.samples.size() / 4];
      out.push_back(verify_sigma_spread(a, orthonormalize(W), 0.5));
    }
    out.push_back(verify_sigma_spread(a, random_frame(spec.n(), 4, derive(seed, "W")), 0.5));
  } else if (id == "parameter_chain") {
    out.push_back(parameter_chain_report(cfg.parameter_set));
  } else if (id == "counterexample_probe") {
    if (!rep.probe) {
      ProbeOptions opt;
      opt.alpha = cfg.alpha;
      ProbeResult res = verify_counterexample_probe(spec, cfg.subspace_trials, cfg.goodness_grid(), derive(cfg.seed, "subspaces"), opt);
      rep.probe = res.report;
    }
    out.push_back(*rep.probe);
  }
  return out;
}

}  // namespace detail

/// Samples P, builds the norm and runs the enabled sections.
inline RunReport run(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport rep;
  rep.config = cfg;
  const ProjectionPair proj = sample_projection(cfg.n, cfg.effective_rank(), derive(cfg.seed, "projection"));
  const NormSpec spec(proj, cfg.eta);

  if (cfg.sandwich) {
    detail::timed(rep, "sandwich", [&] { rep.sandwich = sandwich_check(spec, cfg.sandwich_samples, derive(cfg.seed, "sandwich")); });
    if (!rep.sandwich->passed) rep.failed_ids.push_back("sandwich");
  }
  if (cfg.subspaces) {
    detail::timed(rep, "subspaces", [&] {
      ProbeOptions opt;
      opt.alpha = cfg.alpha;
      opt.projection_norm = cfg.projection_norm;
      ProbeResult res =
          verify_counterexample_probe(spec, cfg.subspace_trials, cfg.goodness_grid(), derive(cfg.seed, "subspaces"), opt);
      rep.subspaces = std::move(res.subspaces);
      rep.probe = std::move(res.report);
    });
  }
  if (cfg.lemmas) {
    for (const auto& id : cfg.lemma_selection) {
      detail::timed(rep, "lemma." + id, [&] {
        detail::append(rep.lemmas, detail::run_lemma(id, spec, cfg, derive(cfg.seed, id), rep));
      });
    }
    for (const auto& r : rep.lemmas)
      if (r.failed() && std::find(rep.failed_ids.begin(), rep.failed_ids.end(), r.lemma_id) == rep.failed_ids.end())
        rep.failed_ids.push_back(r.lemma_id);
  }
  rep.exit_code = rep.failed_ids.empty() ? kExitPass : kExitFail;
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization.

namespace detail {

inline nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

/// Numbers in CSV use the JSON spelling so both formats agree.
inline std::string csv_number(double v) { return number(v).dump(); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace detail

inline nlohmann::json to_json(const LemmaReport& r) {
  nlohmann::json j;
  j["lemma_id"] = r.lemma_id;
  j["instance"] = r.instance;
  j["bound"] = detail::number(r.bound);
  j["measured"] = detail::number(r.measured);
  j["margin"] = detail::number(r.margin);
  j["tolerance"] = detail::number(r.tolerance);
  j["trials"] = r.trials;
  j["seed"] = {{"master", r.seed.master}, {"stream", r.seed.stream}};
  j["status"] = to_string(r.status);
  j["passed"] = r.passed();
  j["asserting"] = r.asserting;
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [k, v] : r.values) values[k] = detail::number(v);
  j["values"] = values;
  j["notes"] = r.notes;
  return j;
}

inline nlohmann::json to_json(const SubspaceReport& s) {
  return {{"euclidean_ratio", detail::number(s.euclidean_ratio)},
          {"euclidean_ratio_upper", detail::number(s.euclidean_ratio_upper)},
          {"scale_t", detail::number(s.scale_t)},
          {"proj_op_norm", s.proj_op_norm ? detail::number(*s.proj_op_norm) : nlohmann::json(nullptr)},
          {"worst_goodness", detail::number(s.worst_goodness)},
          {"theta_star", detail::number(s.theta_star)},
          {"goodness_enclosure", detail::number(s.goodness_enclosure)},
          {"E", s.E},
          {"grid_resolution", s.grid_resolution},
          {"solver_failures", s.solver_failures}};
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& name : ParameterSet::names()) params[name] = exact::format_rational(c.parameter_set.at(name));
  return {{"n", c.n},
          {"eta", c.eta},
          {"rank", c.effective_rank()},
          {"rank_rule", c.rank ? "explicit" : "floor(n/2)"},
          {"seed", {{"master", c.seed.master}, {"stream", c.seed.stream}}},
          {"rng", {{"engine", "mt19937_64"}, {"stream_derivation", "splitmix64(splitmix64(stream ^ fnv1a(section)) + index)"}}},
          {"subspace_trials", c.subspace_trials},
          {"grid_size", c.grid_size},
          {"goodness_grid", c.goodness_grid()},
          {"mc_trials", c.mc_trials},
          {"sandwich_samples", c.sandwich_samples},
          {"lemmas", c.lemmas ? c.lemma_selection : std::vector<std::string>{}},
          {"parameter_set", params},
          {"tol", c.tol},
          {"projection_norm", c.projection_norm},
          {"m", c.m},
          {"gamma", c.gamma},
          {"mc_custom", c.mc_custom},
          {"alpha", c.alpha}};
}

inline nlohmann::json to_json(const RunReport& rep) {
  nlohmann::json j;
  j["config"] = config_json(rep.config);
  if (rep.sandwich) {
    const auto& s = *rep.sandwich;
    j["sandwich"] = {{"samples", s.samples}, {"min_ratio", s.min_ratio}, {"max_ratio", s.max_ratio},
                     {"upper", s.upper},     {"slack", s.slack},         {"passed", s.passed}};
  } else {
    j["sandwich"] = nullptr;
  }
  j["subspaces"] = nlohmann::json::array();
  for (const auto& s : rep.subspaces) j["subspaces"].push_back(to_json(s));
  j["lemmas"] = nlohmann::json::array();
  for (const auto& r : rep.lemmas) j["lemmas"].push_back(to_json(r));
  int passed = 0, failed = 0, na = 0;
  for (const auto& r : rep.lemmas) {
    if (r.status == Status::pass) ++passed;
    else if (r.status == Status::fail) ++failed;
    else ++na;
  }
  nlohmann::json summary = {{"lemma_reports", rep.lemmas.size()},
                            {"passed", passed},
                            {"failed", failed},
                            {"not_applicable", na},
                            {"failed_ids", rep.failed_ids},
                            {"exit_code", rep.exit_code}};
  if (rep.probe) {
    summary["goodness_floor"] = detail::number(rep.probe->get("floor"));
    summary["goodness_mean"] = detail::number(rep.probe->get("mean"));
    summary["goodness_max"] = detail::number(rep.probe->get("max"));
    summary["floor_enclosure"] = detail::number(rep.probe->get("enclosure"));
    summary["floor_exceeds_enclosure"] = rep.probe->status == Status::pass;
  }
  j["summary"] = summary;
  j["timing"] = rep.timing;
  j["version"] = {{"artifact", DVLAB_VERSION}, {"schema", kSchemaVersion}};
  return j;
}

/// One row per (lemma_id, instance); sandwich and goodness floor as extra rows.
inline std::string to_csv(const RunReport& rep) {
  std::ostringstream os;
  os << "lemma_id,instance,status,bound,measured,margin,tolerance,trials,seed_master,seed_stream,asserting\n";
  auto row = [&](const LemmaReport& r) {
    os << detail::csv_field(r.lemma_id) << ',' << detail::csv_field(r.instance) << ',' << to_string(r.status) << ','
       << detail::csv_number(r.bound) << ',' << detail::csv_number(r.measured) << ',' << detail::csv_number(r.margin)
       << ',' << detail::csv_number(r.tolerance) << ',' << r.trials << ',' << r.seed.master << ',' << r.seed.stream
       << ',' << (r.asserting ? "true" : "false") << '\n';
  };
  if (rep.sandwich) {
    LemmaReport s = upper_report("sandwich", "samples=" + std::to_string(rep.sandwich->samples), rep.sandwich->upper,
                                 rep.sandwich->max_ratio, rep.sandwich->upper * rep.sandwich->slack);
    s.status = rep.sandwich->passed ? Status::pass : Status::fail;
    s.seed = derive(rep.config.seed, "sandwich");
    s.trials = rep.sandwich->samples;
    row(s);
  }
  const bool probe_listed = std::any_of(rep.lemmas.begin(), rep.lemmas.end(),
                                        [](const LemmaReport& r) { return r.lemma_id == "counterexample_probe"; });
  if (rep.probe && rep.config.subspaces && !probe_listed) row(*rep.probe);
  for (const auto& r : rep.lemmas) row(r);
  return os.str();
}

inline std::string render(const RunReport& rep) {
  return rep.config.format == "csv" ? to_csv(rep) : to_json(rep).dump(2) + "\n";
}

}  // namespace dvlab
