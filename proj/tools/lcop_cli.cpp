#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lcop/compare.hpp"
#include "lcop/errors.hpp"
#include "lcop/inference.hpp"
#include "lcop/io.hpp"
#include "lcop/model.hpp"
#include "lcop/samplers.hpp"
#include "lcop/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw lcop::ValidationError("cannot create output directory: " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd json_to_vector(const json& arr, const std::string& key) {
  if (!arr.is_array()) throw lcop::ValidationError(key + " must be an array");
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw lcop::ValidationError(key + " must contain numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

json manifest_shell(const std::string& command, double seconds) {
  json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["seconds"] = seconds;
  return m;
}

json data_block(const std::string& path, const lcop::io::LoadedDataset& loaded) {
  json d;
  d["path"] = fs::path(path).filename().string();
  d["hash"] = lcop::io::hash_file(path);
  d["n"] = loaded.data.n();
  d["J"] = loaded.data.J;
  d["p"] = loaded.data.p();
  d["q"] = loaded.data.q();
  d["label_map"] = loaded.label_map;
  d["x_columns"] = loaded.x_names;
  d["w_columns"] = loaded.w_names;
  return d;
}

void add_output(json& manifest, const std::string& dir, const std::string& name) {
  manifest["outputs"][name] = lcop::io::hash_file(join(dir, name));
}

void write_manifest(const std::string& dir, const json& manifest) {
  lcop::io::write_text_file(join(dir, "manifest.json"), manifest.dump(2) + "\n");
}

json read_manifest(const std::string& fit_dir) {
  const std::string path = join(fit_dir, "manifest.json");
  json m;
  try {
    m = json::parse(lcop::io::read_text_file(path));
  } catch (const json::exception& e) {
    throw lcop::ValidationError(path + ": invalid manifest: " + e.what());
  }
  return m;
}

lcop::io::CliConfig load_config(const std::string& config_path) {
  if (config_path.empty()) return {};
  return lcop::io::parse_config_json(lcop::io::read_text_file(config_path));
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  int setting = 0;
  std::string spec_file;
  std::uint64_t seed = 1;
  std::string out;
};

lcop::sim::SimSpec parse_sim_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw lcop::ValidationError(std::string("spec file: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw lcop::ValidationError("spec file: top level must be an object");
  lcop::sim::SimSpec spec;
  std::array<Eigen::VectorXd, 2> delta = {Eigen::VectorXd(0), Eigen::VectorXd(0)};
  bool has_delta = false;
  for (const auto& [key, val] : j.items()) {
    if (key == "n") {
      spec.n = val.get<int>();
    } else if (key == "J") {
      spec.J = val.get<int>();
    } else if (key == "alpha_true") {
      spec.alpha_true = json_to_vector(val, key);
    } else if (key == "beta_true_1") {
      spec.beta_true[0] = json_to_vector(val, key);
    } else if (key == "beta_true_2") {
      spec.beta_true[1] = json_to_vector(val, key);
    } else if (key == "sigma2_true") {
      auto v = json_to_vector(val, key);
      if (v.size() != 2) throw lcop::ValidationError("spec file: sigma2_true needs two entries");
      spec.sigma2_true = {v[0], v[1]};
    } else if (key == "x_means") {
      spec.x_means = json_to_vector(val, key);
    } else if (key == "x_vars") {
      spec.x_vars = json_to_vector(val, key);
    } else if (key == "delta_1") {
      delta[0] = json_to_vector(val, key);
      has_delta = true;
    } else if (key == "delta_2") {
      delta[1] = json_to_vector(val, key);
      has_delta = true;
    } else {
      throw lcop::ValidationError("spec file: unknown field '" + key + "'");
    }
  }
  if (has_delta)
    spec.cutpoints = lcop::model::Cutpoints::from_delta(spec.J, delta);
  else if (spec.J == 3)
    spec.cutpoints = lcop::model::Cutpoints::fixed_default(3);
  else
    throw lcop::ValidationError("spec file: J > 3 requires delta_1 and delta_2");
  return spec;
}

int cmd_simulate(const SimulateArgs& args) {
  Timer timer;
  if ((args.setting == 0) == args.spec_file.empty())
    throw lcop::ValidationError("simulate: give exactly one of --setting or --spec-file");
  lcop::sim::SimSpec spec = args.spec_file.empty()
                                ? lcop::sim::builtin_setting(args.setting)
                                : parse_sim_spec(lcop::io::read_text_file(args.spec_file));
  lcop::sim::SimOutput out = lcop::sim::generate(spec, args.seed);
  ensure_dir(args.out);
  lcop::io::write_dataset_csv(join(args.out, "data.csv"), out.data);

  json truth;
  truth["seed"] = args.seed;
  truth["n"] = spec.n;
  truth["J"] = spec.J;
  truth["alpha_true"] = vector_to_json(spec.alpha_true);
  truth["beta_true_1"] = vector_to_json(spec.beta_true[0]);
  truth["beta_true_2"] = vector_to_json(spec.beta_true[1]);
  truth["sigma2_true"] = {spec.sigma2_true[0], spec.sigma2_true[1]};
  truth["x_means"] = vector_to_json(spec.x_means);
  truth["x_vars"] = vector_to_json(spec.x_vars);
  truth["gamma_1"] = vector_to_json(spec.cutpoints.gamma[0]);
  truth["gamma_2"] = vector_to_json(spec.cutpoints.gamma[1]);
  truth["class_count"] = {out.class_count[0], out.class_count[1]};
  truth["class_cond_mean"] = {out.class_cond_mean[0], out.class_cond_mean[1]};
  truth["s_true"] = std::vector<int>(out.s_true.data(), out.s_true.data() + out.s_true.size());
  truth["z_true"] = vector_to_json(out.z_true);
  truth["l_true"] = vector_to_json(out.l_true);
  lcop::io::write_text_file(join(args.out, "truth.json"), truth.dump(2) + "\n");

  json manifest = manifest_shell("simulate", timer.seconds());
  if (args.setting != 0) manifest["setting"] = args.setting;
  manifest["seed"] = args.seed;
  add_output(manifest, args.out, "data.csv");
  add_output(manifest, args.out, "truth.json");
  write_manifest(args.out, manifest);
  std::cout << "wrote " << join(args.out, "data.csv") << " (" << out.data.n() << " rows, J="
            << out.data.J << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string out;
  std::string config;
  std::string sampler = "collapsed";
};

int cmd_fit(const FitArgs& args) {
  Timer timer;
  lcop::io::CliConfig cfg = load_config(args.config);
  if (args.sampler != "collapsed" && args.sampler != "full")
    throw lcop::ValidationError("fit: --sampler must be 'collapsed' or 'full'");
  auto loaded = lcop::io::load_dataset_csv(args.data, cfg.x_columns, cfg.w_columns);
  cfg.x_columns = loaded.x_names;  // record the effective selection
  cfg.w_columns = loaded.w_names;
  auto prior = lcop::io::materialize_prior(cfg.prior, loaded.data.p(), loaded.data.q(),
                                           loaded.data.J);
  lcop::samplers::PosteriorSample sample =
      args.sampler == "collapsed" ? lcop::samplers::run_collapsed_gibbs(loaded.data, prior, cfg.run)
                                  : lcop::samplers::run_full_gibbs(loaded.data, prior, cfg.run);
  lcop::samplers::relabel(sample);

  ensure_dir(args.out);
  lcop::io::write_draws_csv(join(args.out, "draws.csv"), sample);
  lcop::io::write_summary_csv(join(args.out, "summary.csv"),
                              lcop::inference::summarize(sample));

  json manifest = manifest_shell("fit", timer.seconds());
  manifest["config"] = json::parse(lcop::io::config_echo_json(cfg));
  manifest["data"] = data_block(args.data, loaded);
  json stats;
  stats["algorithm"] = args.sampler;
  stats["retained"] = sample.size();
  stats["accept_rate_alpha"] = sample.accept_rate_alpha;
  if (sample.J > 3)
    stats["accept_rate_beta_delta"] = {sample.accept_rate_beta_delta[0],
                                       sample.accept_rate_beta_delta[1]};
  stats["relabeled"] = sample.relabeled;
  stats["swap_fraction"] = sample.swap_fraction;
  manifest["sampler"] = stats;
  manifest["warnings"] = sample.warnings;
  add_output(manifest, args.out, "draws.csv");
  add_output(manifest, args.out, "summary.csv");
  write_manifest(args.out, manifest);
  for (const auto& w : sample.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "retained " << sample.size() << " draws; alpha acceptance "
            << sample.accept_rate_alpha << "; swap fraction " << sample.swap_fraction << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct FitInputs {
  lcop::io::LoadedDataset loaded;
  lcop::samplers::PosteriorSample sample;
  json fit_manifest;
  std::string data_hash;
};

// Reload a fit and its dataset, refusing silently modified or mismatched files.
FitInputs reload_fit(const std::string& fit_dir, const std::string& data_path) {
  FitInputs in;
  in.fit_manifest = read_manifest(fit_dir);
  if (in.fit_manifest.value("command", "") != "fit")
    throw lcop::ValidationError(fit_dir + ": manifest does not describe a fit");
  in.data_hash = lcop::io::hash_file(data_path);
  const std::string recorded = in.fit_manifest.at("data").value("hash", "");
  if (in.data_hash != recorded)
    throw lcop::ValidationError("data file does not match the one used by the fit (hash " +
                                in.data_hash + " vs " + recorded + ")");
  const std::string draws_path = join(fit_dir, "draws.csv");
  const std::string draws_hash = lcop::io::hash_file(draws_path);
  if (draws_hash != in.fit_manifest.at("outputs").value("draws.csv", ""))
    throw lcop::ValidationError("draws.csv does not match the fit manifest");
  std::vector<std::string> xs = in.fit_manifest.at("data").value("x_columns",
                                                                 std::vector<std::string>{});
  std::vector<std::string> ws = in.fit_manifest.at("data").value("w_columns",
                                                                 std::vector<std::string>{});
  in.loaded = lcop::io::load_dataset_csv(data_path, xs, ws);
  in.sample = lcop::io::read_draws_csv(draws_path);
  if (in.sample.J != in.loaded.data.J)
    throw lcop::ValidationError("draws and data disagree on the number of categories");
  return in;
}

struct EffectsArgs {
  std::string fit;
  std::string data;
  std::string covariate;
  std::optional<double> delta;
  std::string out;
};

std::vector<lcop::inference::NamedChain> series_to_chains(
    const std::array<std::vector<Eigen::VectorXd>, 2>& series, int J, const std::string& stem) {
  std::vector<lcop::inference::NamedChain> chains;
  for (int s = 0; s < 2; ++s)
    for (int j = 0; j < J; ++j)
      chains.emplace_back(stem + "_class" + std::to_string(s + 1) + "_cat" + std::to_string(j + 1),
                          series[s][j]);
  return chains;
}

int cmd_effects(const EffectsArgs& args) {
  Timer timer;
  FitInputs in = reload_fit(args.fit, args.data);
  const auto& x_names = in.loaded.x_names;
  auto it = std::find(x_names.begin(), x_names.end(), args.covariate);
  if (it == x_names.end())
    throw lcop::ValidationError("effects: covariate '" + args.covariate +
                                "' is not an x column of the fit");
  const int column = static_cast<int>(1 + (it - x_names.begin()));
  auto eff = lcop::inference::covariate_effect(in.sample, in.loaded.data, column, args.delta);

  ensure_dir(args.out);
  auto chains = series_to_chains(eff.series, eff.J, "effect");
  lcop::io::write_named_csv(join(args.out, "effects_draws.csv"), chains);
  lcop::io::write_summary_csv(join(args.out, "effects_summary.csv"),
                              lcop::inference::summarize(chains));

  json manifest = manifest_shell("effects", timer.seconds());
  manifest["fit_dir"] = args.fit;
  manifest["data_hash"] = in.data_hash;
  manifest["covariate"] = args.covariate;
  manifest["column_index"] = column;
  manifest["delta"] = eff.delta;
  manifest["binary"] = eff.binary;
  add_output(manifest, args.out, "effects_draws.csv");
  add_output(manifest, args.out, "effects_summary.csv");
  write_manifest(args.out, manifest);
  std::cout << "covariate " << args.covariate << (eff.binary ? " (binary contrast)" : "")
            << ", shift " << eff.delta << "\n";
  return 0;
}

struct AvgProbArgs {
  std::string fit;
  std::string data;
  std::string out;
};

int cmd_avgprob(const AvgProbArgs& args) {
  Timer timer;
  FitInputs in = reload_fit(args.fit, args.data);
  auto probs = lcop::inference::average_category_probs(in.sample, in.loaded.data);

  ensure_dir(args.out);
  auto chains = series_to_chains(probs.series, probs.J, "avgprob");
  lcop::io::write_named_csv(join(args.out, "avgprob_draws.csv"), chains);
  lcop::io::write_summary_csv(join(args.out, "avgprob_summary.csv"),
                              lcop::inference::summarize(chains));

  json manifest = manifest_shell("avgprob", timer.seconds());
  manifest["fit_dir"] = args.fit;
  manifest["data_hash"] = in.data_hash;
  add_output(manifest, args.out, "avgprob_draws.csv");
  add_output(manifest, args.out, "avgprob_summary.csv");
  write_manifest(args.out, manifest);
  std::cout << "wrote class-conditional average category probabilities for " << probs.series[0][0].size()
            << " draws\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string data;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct ModelSpecEntry {
  std::string name;
  std::vector<std::string> x_columns;
  std::vector<std::string> w_columns;
};

int cmd_compare(const CompareArgs& args) {
  Timer timer;
  json j;
  try {
    j = json::parse(lcop::io::read_text_file(args.config));
  } catch (const json::exception& e) {
    throw lcop::ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("models") || !j["models"].is_array() || j["models"].empty())
    throw lcop::ValidationError("compare: config must contain a nonempty 'models' array");
  std::vector<ModelSpecEntry> models;
  for (const auto& m : j["models"]) {
    if (!m.is_object()) throw lcop::ValidationError("compare: each model must be an object");
    ModelSpecEntry e;
    for (const auto& [key, val] : m.items()) {
      if (key == "name") {
        e.name = val.get<std::string>();
      } else if (key == "x_columns") {
        for (const auto& s : val) e.x_columns.push_back(s.get<std::string>());
      } else if (key == "w_columns") {
        for (const auto& s : val) e.w_columns.push_back(s.get<std::string>());
      } else {
        throw lcop::ValidationError("compare: unknown model field '" + key + "'");
      }
    }
    if (e.name.empty()) e.name = "model_" + std::to_string(models.size() + 1);
    models.push_back(std::move(e));
  }
  j.erase("models");
  lcop::io::CliConfig cfg = lcop::io::parse_config_json(j.dump());
  if (args.seed) cfg.run.seed = *args.seed;

  ensure_dir(args.out);
  json results = json::array();
  double best = -std::numeric_limits<double>::infinity();
  std::string best_name;
  for (std::size_t m = 0; m < models.size(); ++m) {
    auto loaded = lcop::io::load_dataset_csv(args.data, models[m].x_columns, models[m].w_columns);
    auto prior = lcop::io::materialize_prior(cfg.prior, loaded.data.p(), loaded.data.q(),
                                             loaded.data.J);
    lcop::samplers::RunConfig rc = cfg.run;
    rc.seed = lcop::rng::mix_seed(cfg.run.seed, 100 + m);
    rc.store_u = false;
    auto res = lcop::compare::chib_marginal_likelihood(loaded.data, prior, rc);
    json r;
    r["name"] = models[m].name;
    r["x_columns"] = loaded.x_names;
    r["w_columns"] = loaded.w_names;
    r["seed"] = rc.seed;
    r["log_marginal"] = res.log_marginal;
    r["mc_se"] = res.mc_se;
    r["log_lik_at_star"] = res.log_lik_at_star;
    r["log_prior_at_star"] = res.log_prior_at_star;
    r["alpha_ordinate"] = {{"log_value", res.alpha_ordinate.log_value},
                           {"mc_se", res.alpha_ordinate.mc_se}};
    r["beta_ordinate"] = {{"log_value", res.beta_ordinate.log_value},
                          {"mc_se", res.beta_ordinate.mc_se}};
    r["sigma2_ordinate"] = {{"log_value", res.sigma2_ordinate.log_value},
                            {"mc_se", res.sigma2_ordinate.mc_se}};
    results.push_back(std::move(r));
    if (res.log_marginal > best) {
      best = res.log_marginal;
      best_name = models[m].name;
    }
    std::cout << models[m].name << ": log marginal likelihood " << res.log_marginal << " (se "
              << res.mc_se << ")\n";
  }
  json outdoc;
  outdoc["models"] = results;
  outdoc["best"] = best_name;
  lcop::io::write_text_file(join(args.out, "compare.json"), outdoc.dump(2) + "\n");

  json manifest = manifest_shell("compare", timer.seconds());
  manifest["config"] = json::parse(lcop::io::config_echo_json(cfg));
  manifest["data_path"] = fs::path(args.data).filename().string();
  manifest["data_hash"] = lcop::io::hash_file(args.data);
  add_output(manifest, args.out, "compare.json");
  write_manifest(args.out, manifest);
  std::cout << "best: " << best_name << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct DiagArgs {
  std::string draws;
  std::string out;
};

int cmd_diag(const DiagArgs& args) {
  Timer timer;
  auto chains = lcop::io::read_named_csv(args.draws);
  auto summaries = lcop::inference::summarize(chains);
  ensure_dir(args.out);
  lcop::io::write_summary_csv(join(args.out, "diag.csv"), summaries);
  json manifest = manifest_shell("diag", timer.seconds());
  manifest["draws_path"] = fs::path(args.draws).filename().string();
  manifest["draws_hash"] = lcop::io::hash_file(args.draws);
  add_output(manifest, args.out, "diag.csv");
  write_manifest(args.out, manifest);
  std::cout << "summarized " << summaries.size() << " chains\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-class latent ordinal outcome toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--setting", sim_args.setting, "builtin generator setting (1 or 2)");
  sim->add_option("--spec-file", sim_args.spec_file, "JSON generator specification");
  sim->add_option("--seed", sim_args.seed, "stream seed");
  sim->add_option("--out", sim_args.out, "output directory")->required();

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "sample the posterior for a dataset");
  fit->add_option("--data", fit_args.data, "dataset CSV")->required();
  fit->add_option("--out", fit_args.out, "output directory")->required();
  fit->add_option("--config", fit_args.config, "JSON run configuration");
  fit->add_option("--sampler", fit_args.sampler, "collapsed (default) or full");

  EffectsArgs eff_args;
  auto* eff = app.add_subcommand("effects", "posterior covariate effects from a fit");
  eff->add_option("--fit", eff_args.fit, "fit output directory")->required();
  eff->add_option("--data", eff_args.data, "dataset CSV used for the fit")->required();
  eff->add_option("--covariate", eff_args.covariate, "x column name")->required();
  double delta_value = 0.0;
  auto* delta_opt = eff->add_option("--delta", delta_value, "shift for a continuous covariate");
  eff->add_option("--out", eff_args.out, "output directory")->required();

  AvgProbArgs avg_args;
  auto* avg = app.add_subcommand("avgprob", "class-conditional average category probabilities");
  avg->add_option("--fit", avg_args.fit, "fit output directory")->required();
  avg->add_option("--data", avg_args.data, "dataset CSV used for the fit")->required();
  avg->add_option("--out", avg_args.out, "output directory")->required();

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand("compare", "marginal likelihoods for candidate specifications");
  cmp->add_option("--data", cmp_args.data, "dataset CSV")->required();
  cmp->add_option("--config", cmp_args.config, "JSON comparison configuration")->required();
  cmp->add_option("--out", cmp_args.out, "output directory")->required();
  std::uint64_t seed_value = 0;
  auto* seed_opt = cmp->add_option("--seed", seed_value, "override the config seed");

  DiagArgs diag_args;
  auto* diag = app.add_subcommand("diag", "chain summaries for a draws CSV");
  diag->add_option("--draws", diag_args.draws, "CSV of named numeric columns")->required();
  diag->add_option("--out", diag_args.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (fit->parsed()) return cmd_fit(fit_args);
    if (eff->parsed()) {
      if (delta_opt->count() > 0) eff_args.delta = delta_value;
      return cmd_effects(eff_args);
    }
    if (avg->parsed()) return cmd_avgprob(avg_args);
    if (cmp->parsed()) {
      if (seed_opt->count() > 0) cmp_args.seed = seed_value;
      return cmd_compare(cmp_args);
    }
    if (diag->parsed()) return cmd_diag(diag_args);
  } catch (const lcop::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
