// Command-line front end. Each subcommand runs one section of a full run.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dvlab/experiment.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<int> n;
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> stream;
  std::optional<std::int64_t> trials;
  std::optional<int> subspaces;
  std::optional<int> grid;
  std::optional<int> rank;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<double> tol;
  std::optional<int> m;
  std::optional<double> gamma;
  std::optional<double> alpha;
  std::vector<std::string> lemmas;
  std::vector<std::string> params;
  bool projection_norm = false;
};

enum class Section { run, sample_norm, probe_subspaces, verify_lemmas, check_params, mc_bounds };

void add_shared(CLI::App* cmd, Flags& f) {
  cmd->add_option("config", f.config_path, "Config file with 'key:type = value' lines");
  cmd->add_option("--n", f.n, "Dimension");
  cmd->add_option("--eta", f.eta, "Weight of the l1 term");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--stream", f.stream, "Seed stream");
  cmd->add_option("--trials", f.trials, "Trial count for the section");
  cmd->add_option("--grid", f.grid, "Circle grid size");
  cmd->add_option("--rank", f.rank, "Rank of P (default floor(n/2))");
  cmd->add_option("--out", f.out, "Output file (default stdout)");
  cmd->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--tol", f.tol, "Verification tolerance");
  cmd->add_option("--alpha", f.alpha, "E-set threshold");
}

dvlab::ExperimentConfig build_config(Section section, const Flags& f) {
  dvlab::ExperimentConfig cfg;
  if (!f.config_path.empty()) dvlab::load_config_file(cfg, f.config_path);
  if (f.n) cfg.n = *f.n;
  if (f.eta) cfg.eta = *f.eta;
  if (f.seed) cfg.seed.master = *f.seed;
  if (f.stream) cfg.seed.stream = *f.stream;
  if (f.grid) cfg.grid_size = *f.grid;
  if (f.rank) cfg.rank = *f.rank;
  if (f.out) cfg.output_path = *f.out;
  if (f.format) cfg.format = *f.format;
  if (f.tol) cfg.tol = *f.tol;
  if (f.m) cfg.m = *f.m;
  if (f.gamma) cfg.gamma = *f.gamma;
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.subspaces) cfg.subspace_trials = *f.subspaces;
  if (f.projection_norm) cfg.projection_norm = true;
  if (!f.lemmas.empty()) cfg.lemma_selection = f.lemmas;
  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw dvlab::UsageError("--param expects name=value, got '" + kv + "'");
    dvlab::apply_setting(cfg, "param." + kv.substr(0, eq), "rational", kv.substr(eq + 1));
  }

  const bool is_run = section == Section::run;
  cfg.sandwich = is_run || section == Section::sample_norm;
  cfg.subspaces = is_run || section == Section::probe_subspaces;
  cfg.lemmas = is_run || section == Section::verify_lemmas || section == Section::check_params ||
               section == Section::mc_bounds;
  switch (section) {
    case Section::sample_norm:
      if (f.trials) cfg.sandwich_samples = *f.trials;
      break;
    case Section::probe_subspaces:
      if (f.trials) cfg.subspace_trials = static_cast<int>(*f.trials);
      break;
    case Section::check_params:
      cfg.lemma_selection = {"parameter_chain"};
      break;
    case Section::mc_bounds:
      cfg.lemma_selection = {"subspace_volume"};
      cfg.mc_custom = true;
      if (!f.m) cfg.m = std::max(1, cfg.n / 2);
      if (f.trials) cfg.mc_trials = *f.trials;
      break;
    default:
      if (f.trials) cfg.mc_trials = *f.trials;
  }
  return cfg;
}

int emit(const dvlab::RunReport& rep) {
  const std::string text = dvlab::render(rep);
  if (rep.config.output_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(rep.config.output_path);
    if (!out) {
      std::cerr << "error: cannot write '" << rep.config.output_path << "'\n";
      return dvlab::kExitUsage;
    }
    out << text;
  }
  if (!rep.failed_ids.empty()) {
    std::cerr << "failed:";
    for (const auto& id : rep.failed_ids) std::cerr << ' ' << id;
    std::cerr << '\n';
  }
  return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on a perturbed Euclidean norm", "dvlab"};
  app.set_version_flag("--version", std::string(DVLAB_VERSION));
  app.require_subcommand(1);

  Flags flags;
  Section section = Section::run;
  auto add = [&](const char* name, const char* help, Section s) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_shared(cmd, flags);
    cmd->callback([&section, s] { section = s; });
    return cmd;
  };

  CLI::App* run = add("run", "Full run: sandwich, subspace probe and lemma verifiers", Section::run);
  run->add_option("--subspaces", flags.subspaces, "Number of random 2-D subspaces");
  run->add_option("--lemmas", flags.lemmas, "Lemma ids to run")->delimiter(',');
  run->add_flag("--projection-norm", flags.projection_norm, "Also estimate the projection operator norm");
  add("sample-norm", "Check |x| <= ||x|| <= (sqrt2 + eta)|x| on random points", Section::sample_norm);
  CLI::App* probe = add("probe-subspaces", "Worst goodness over random 2-D subspaces", Section::probe_subspaces);
  probe->add_flag("--projection-norm", flags.projection_norm, "Also estimate the projection operator norm");
  CLI::App* verify = add("verify-lemmas", "Run the lemma verifiers", Section::verify_lemmas);
  verify->add_option("--lemmas", flags.lemmas, "Lemma ids to run")->delimiter(',');
  verify->add_option("--subspaces", flags.subspaces, "Subspaces for counterexample_probe");
  CLI::App* params = add("check-params", "Decide the parameter inequalities exactly", Section::check_params);
  params->add_option("--param", flags.params, "Override a parameter, e.g. delta=2^-506");
  CLI::App* mc = add("mc-bounds", "Monte Carlo subspace-volume estimate", Section::mc_bounds);
  mc->add_option("--m", flags.m, "Subspace dimension (default n/2)");
  mc->add_option("--gamma", flags.gamma, "Expansion radius");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dvlab::kExitUsage;
  }

  try {
    return emit(dvlab::run(build_config(section, flags)));
  } catch (const dvlab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return dvlab::kExitUsage;
  } catch (const dvlab::NonConvergence& e) {
    std::cerr << "nonconvergence: " << e.what() << '\n';
    return dvlab::kExitNonConvergence;
  } catch (const dvlab::Undecidable& e) {
    std::cerr << "undecidable: " << e.what() << '\n';
    return dvlab::kExitNonConvergence;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return dvlab::kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return dvlab::kExitUsage;
  }
}
