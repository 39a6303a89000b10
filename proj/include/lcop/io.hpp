#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcop/inference.hpp"
#include "lcop/model.hpp"
#include "lcop/samplers.hpp"

namespace lcop::io {

// 64-bit FNV-1a, used to fingerprint files so downstream commands can refuse
// mismatched inputs.
std::uint64_t fnv1a64(const void* bytes, std::size_t len);
std::string hash_hex(std::uint64_t h);
std::string hash_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Dataset CSV: header "y,x1,...,w1,..."; the y column holds numeric category
// labels, x* are outcome covariates and w* class-membership covariates, both
// without intercepts (a leading column of ones is added on load). Labels are
// mapped to 1..J by ascending value; label_map records the original values.
struct LoadedDataset {
  model::Dataset data;
  std::vector<double> label_map;
  std::vector<std::string> x_names;  // selected columns, intercept excluded
  std::vector<std::string> w_names;
};

LoadedDataset load_dataset_csv(const std::string& path);
// Same, keeping only the named covariate columns (for nested model specs).
LoadedDataset load_dataset_csv(const std::string& path,
                               const std::vector<std::string>& x_columns,
                               const std::vector<std::string>& w_columns);

void write_dataset_csv(const std::string& path, const model::Dataset& data);

// Generic numeric CSV with a header row; every column becomes a named series.
// Values are written with 17 significant digits so doubles round-trip exactly.
void write_named_csv(const std::string& path, const std::vector<inference::NamedChain>& chains);
std::vector<inference::NamedChain> read_named_csv(const std::string& path);

// Posterior draws as a named CSV in flatten() order; the reader rebuilds the
// sample (dimensions inferred from the column names).
void write_draws_csv(const std::string& path, const samplers::PosteriorSample& sample);
samplers::PosteriorSample read_draws_csv(const std::string& path);

void write_summary_csv(const std::string& path,
                       const std::vector<inference::ChainSummary>& summaries);

// Run configuration parsed from strict JSON: unknown keys are rejected, as are
// values of the wrong shape. Prior entries may be a scalar (constant vector /
// scaled identity) or an explicit array / matrix; per-class overrides use the
// _1 / _2 suffix. sigma2_shape and sigma2_scale give the inverse-gamma prior
// directly (v = 2 shape, d = 2 scale).
struct ArrayOrScalar {
  std::optional<double> scalar;
  std::optional<Eigen::VectorXd> vector;
  std::optional<Eigen::MatrixXd> matrix;
  bool set() const { return scalar || vector || matrix; }
};

struct PriorOverrides {
  ArrayOrScalar alpha_mean, alpha_cov;
  std::array<ArrayOrScalar, 2> beta_mean, beta_cov;
  std::optional<double> sigma2_shape, sigma2_scale;
  std::array<ArrayOrScalar, 2> delta_mean, delta_cov;
};

struct CliConfig {
  samplers::RunConfig run;
  PriorOverrides prior;
  std::vector<std::string> x_columns;  // empty = every x column in the file
  std::vector<std::string> w_columns;
};

CliConfig parse_config_json(const std::string& text);

// Prior specification for concrete dimensions, defaults where not overridden.
model::PriorSpec materialize_prior(const PriorOverrides& overrides, int p, int q, int J);

// Canonical JSON echo of the effective configuration, for run manifests.
std::string config_echo_json(const CliConfig& config);

}  // namespace lcop::io
