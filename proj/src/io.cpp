#include "lcop/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "lcop/errors.hpp"
#include "json.hpp"

namespace lcop::io {

using nlohmann::json;

std::uint64_t fnv1a64(const void* bytes, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw ValidationError("failed reading file: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open file for writing: " + path);
  out << text;
  out.close();
  if (!out) throw ValidationError("failed writing file: " + path);
}

std::string hash_file(const std::string& path) {
  std::string bytes = read_text_file(path);
  return hash_hex(fnv1a64(bytes.data(), bytes.size()));
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::string text = read_text_file(path);
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

double parse_double(const std::string& tok, const std::string& where) {
  if (tok.empty()) throw ValidationError(where + ": empty value");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE)
    throw ValidationError(where + ": cannot parse number '" + tok + "'");
  if (!std::isfinite(v)) throw ValidationError(where + ": value is not finite");
  return v;
}

struct RawTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  int rows = 0;
};

RawTable read_table(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw ValidationError(path + ": file is empty");
  RawTable t;
  t.names = split_line(lines[0]);
  for (const auto& name : t.names)
    if (name.empty()) throw ValidationError(path + ": empty column name in header");
  const int ncol = static_cast<int>(t.names.size());
  t.columns.assign(ncol, {});
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) {
      if (r + 1 == lines.size()) break;  // trailing newline
      throw ValidationError(path + ": blank line " + std::to_string(r + 1));
    }
    auto toks = split_line(lines[r]);
    if (static_cast<int>(toks.size()) != ncol)
      throw ValidationError(path + ": line " + std::to_string(r + 1) + " has " +
                            std::to_string(toks.size()) + " fields, expected " +
                            std::to_string(ncol));
    for (int c = 0; c < ncol; ++c)
      t.columns[c].push_back(
          parse_double(toks[c], path + ": line " + std::to_string(r + 1)));
    ++t.rows;
  }
  if (t.rows < 1) throw ValidationError(path + ": no data rows");
  return t;
}

}  // namespace

LoadedDataset load_dataset_csv(const std::string& path) {
  return load_dataset_csv(path, {}, {});
}

LoadedDataset load_dataset_csv(const std::string& path,
                               const std::vector<std::string>& x_columns,
                               const std::vector<std::string>& w_columns) {
  RawTable t = read_table(path);
  if (t.names[0] != "y") throw ValidationError(path + ": first column must be 'y'");
  std::vector<std::string> file_x, file_w;
  bool in_w = false;
  for (std::size_t c = 1; c < t.names.size(); ++c) {
    const std::string& name = t.names[c];
    if (name.rfind('x', 0) == 0 && !in_w) {
      file_x.push_back(name);
    } else if (name.rfind('w', 0) == 0) {
      in_w = true;
      file_w.push_back(name);
    } else {
      throw ValidationError(path + ": column '" + name +
                            "' must start with x or w (x columns before w columns)");
    }
  }

  auto select = [&](const std::vector<std::string>& wanted,
                    const std::vector<std::string>& available, std::size_t offset,
                    const char* kind) {
    std::vector<int> idx;
    const auto& names = wanted.empty() ? available : wanted;
    for (const auto& name : names) {
      auto it = std::find(available.begin(), available.end(), name);
      if (it == available.end())
        throw ValidationError(path + ": no " + std::string(kind) + " column named '" + name + "'");
      idx.push_back(static_cast<int>(offset + (it - available.begin())));
    }
    return std::pair{idx, names};
  };
  auto [x_idx, x_names] = select(x_columns, file_x, 1, "x");
  auto [w_idx, w_names] = select(w_columns, file_w, 1 + file_x.size(), "w");

  // Map labels to 1..J by ascending value.
  std::map<double, int> labels;
  for (double v : t.columns[0]) labels[v] = 0;
  if (labels.size() < 3)
    throw ValidationError(path + ": need at least three distinct y labels, found " +
                          std::to_string(labels.size()));
  int next = 1;
  std::vector<double> label_map;
  for (auto& [value, cat] : labels) {
    cat = next++;
    label_map.push_back(value);
  }

  LoadedDataset out;
  const int n = t.rows;
  out.data.J = static_cast<int>(labels.size());
  out.data.y.resize(n);
  for (int i = 0; i < n; ++i) out.data.y[i] = labels.at(t.columns[0][i]);
  out.data.X = Eigen::MatrixXd::Ones(n, 1 + x_idx.size());
  for (std::size_t k = 0; k < x_idx.size(); ++k)
    for (int i = 0; i < n; ++i) out.data.X(i, 1 + k) = t.columns[x_idx[k]][i];
  out.data.W = Eigen::MatrixXd::Ones(n, 1 + w_idx.size());
  for (std::size_t k = 0; k < w_idx.size(); ++k)
    for (int i = 0; i < n; ++i) out.data.W(i, 1 + k) = t.columns[w_idx[k]][i];
  out.label_map = std::move(label_map);
  out.x_names = x_names;
  out.w_names = w_names;
  return out;
}

void write_dataset_csv(const std::string& path, const model::Dataset& data) {
  std::ostringstream ss;
  ss << "y";
  for (int k = 1; k < data.q(); ++k) ss << ",x" << k;
  for (int k = 1; k < data.p(); ++k) ss << ",w" << k;
  ss << "\n";
  for (int i = 0; i < data.n(); ++i) {
    ss << data.y[i];
    for (int k = 1; k < data.q(); ++k) ss << "," << format_double(data.X(i, k));
    for (int k = 1; k < data.p(); ++k) ss << "," << format_double(data.W(i, k));
    ss << "\n";
  }
  write_text_file(path, ss.str());
}

void write_named_csv(const std::string& path, const std::vector<inference::NamedChain>& chains) {
  if (chains.empty()) throw ContractError("write_named_csv: no columns");
  const auto rows = chains.front().second.size();
  std::ostringstream ss;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    if (chains[c].second.size() != rows)
      throw ContractError("write_named_csv: column lengths differ");
    ss << (c ? "," : "") << chains[c].first;
  }
  ss << "\n";
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < chains.size(); ++c)
      ss << (c ? "," : "") << format_double(chains[c].second[r]);
    ss << "\n";
  }
  write_text_file(path, ss.str());
}

std::vector<inference::NamedChain> read_named_csv(const std::string& path) {
  RawTable t = read_table(path);
  std::vector<inference::NamedChain> out;
  out.reserve(t.names.size());
  for (std::size_t c = 0; c < t.names.size(); ++c) {
    Eigen::VectorXd v(t.rows);
    for (int r = 0; r < t.rows; ++r) v[r] = t.columns[c][r];
    out.emplace_back(t.names[c], std::move(v));
  }
  return out;
}

void write_draws_csv(const std::string& path, const samplers::PosteriorSample& sample) {
  write_named_csv(path, inference::flatten(sample));
}

samplers::PosteriorSample read_draws_csv(const std::string& path) {
  auto chains = read_named_csv(path);
  auto count_prefix = [&](const std::string& prefix) {
    int c = 0;
    for (const auto& [name, v] : chains)
      if (name.rfind(prefix, 0) == 0) ++c;
    return c;
  };
  const int p = count_prefix("alpha_");
  const int q = count_prefix("beta1_");
  const int J = 3 + count_prefix("delta1_");
  if (p < 1 || q < 1) throw ValidationError(path + ": not a posterior draws file");

  samplers::PosteriorSample sample;
  sample.J = J;
  const int G = static_cast<int>(chains.front().second.size());
  sample.draws.assign(G, model::ParamDraw{});

  // Regenerate the expected layout and verify it matches exactly.
  {
    samplers::PosteriorSample probe;
    probe.J = J;
    model::ParamDraw d;
    d.alpha = Eigen::VectorXd::Zero(p);
    d.beta = {Eigen::VectorXd::Zero(q), Eigen::VectorXd::Zero(q)};
    d.sigma2 = {1.0, 1.0};
    d.cutpoints = J == 3 ? model::Cutpoints::fixed_default(3)
                         : model::Cutpoints::from_delta(
                               J, {Eigen::VectorXd::Zero(J - 3), Eigen::VectorXd::Zero(J - 3)});
    probe.draws.push_back(d);
    auto expected = inference::flatten(probe);
    if (expected.size() != chains.size())
      throw ValidationError(path + ": unexpected number of columns");
    for (std::size_t c = 0; c < chains.size(); ++c)
      if (expected[c].first != chains[c].first)
        throw ValidationError(path + ": column '" + chains[c].first + "' where '" +
                              expected[c].first + "' was expected");
  }

  for (int g = 0; g < G; ++g) {
    auto& d = sample.draws[g];
    d.alpha.resize(p);
    d.beta[0].resize(q);
    d.beta[1].resize(q);
    std::size_t c = 0;
    for (int k = 0; k < p; ++k) d.alpha[k] = chains[c++].second[g];
    for (int s = 0; s < 2; ++s)
      for (int k = 0; k < q; ++k) d.beta[s][k] = chains[c++].second[g];
    for (int s = 0; s < 2; ++s) d.sigma2[s] = chains[c++].second[g];
    if (J == 3) {
      d.cutpoints = model::Cutpoints::fixed_default(3);
    } else {
      std::array<Eigen::VectorXd, 2> delta = {Eigen::VectorXd(J - 3), Eigen::VectorXd(J - 3)};
      for (int s = 0; s < 2; ++s)
        for (int k = 0; k < J - 3; ++k) delta[s][k] = chains[c++].second[g];
      std::array<Eigen::VectorXd, 2> gamma;
      for (int s = 0; s < 2; ++s) {
        gamma[s] = Eigen::VectorXd(J - 1);
        gamma[s][0] = 0.0;
        gamma[s][J - 2] = 1.0;
        for (int k = 1; k <= J - 3; ++k) gamma[s][k] = chains[c++].second[g];
      }
      d.cutpoints.delta = delta;
      d.cutpoints.gamma = gamma;
    }
  }
  return sample;
}

void write_summary_csv(const std::string& path,
                       const std::vector<inference::ChainSummary>& summaries) {
  if (summaries.empty()) throw ContractError("write_summary_csv: nothing to write");
  const auto lags = summaries.front().acf.size();
  std::ostringstream ss;
  ss << "name,mean,sd,lo68,hi68,lo95,hi95,ess";
  for (Eigen::Index k = 1; k <= lags; ++k) ss << ",acf_" << k;
  ss << "\n";
  for (const auto& s : summaries) {
    if (s.acf.size() != lags) throw ContractError("write_summary_csv: ragged acf lengths");
    ss << s.name << "," << format_double(s.mean) << "," << format_double(s.sd) << ","
       << format_double(s.one_sd.lo) << "," << format_double(s.one_sd.hi) << ","
       << format_double(s.two_sd.lo) << "," << format_double(s.two_sd.hi) << ","
       << format_double(s.ess);
    for (Eigen::Index k = 0; k < lags; ++k) ss << "," << format_double(s.acf[k]);
    ss << "\n";
  }
  write_text_file(path, ss.str());
}

namespace {

ArrayOrScalar parse_array_or_scalar(const json& v, const std::string& key) {
  ArrayOrScalar out;
  if (v.is_number()) {
    out.scalar = v.get<double>();
  } else if (v.is_array() && (v.empty() || !v[0].is_array())) {
    Eigen::VectorXd vec(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number())
        throw ValidationError("config: " + key + " must contain numbers");
      vec[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    out.vector = vec;
  } else if (v.is_array()) {
    const std::size_t rows = v.size();
    const std::size_t cols = v[0].size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      if (!v[r].is_array() || v[r].size() != cols)
        throw ValidationError("config: " + key + " must be a rectangular matrix");
      for (std::size_t c = 0; c < cols; ++c) {
        if (!v[r][c].is_number())
          throw ValidationError("config: " + key + " must contain numbers");
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c].get<double>();
      }
    }
    out.matrix = m;
  } else {
    throw ValidationError("config: " + key + " must be a number or an array");
  }
  return out;
}

double require_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ValidationError("config: " + key + " must be a number");
  return v.get<double>();
}

int require_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ValidationError("config: " + key + " must be an integer");
  return v.get<int>();
}

std::vector<std::string> require_string_array(const json& v, const std::string& key) {
  if (!v.is_array()) throw ValidationError("config: " + key + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ValidationError("config: " + key + " must contain strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

void parse_prior_block(const json& j, PriorOverrides& prior) {
  for (const auto& [key, val] : j.items()) {
    if (key == "alpha_mean") {
      prior.alpha_mean = parse_array_or_scalar(val, key);
    } else if (key == "alpha_cov") {
      prior.alpha_cov = parse_array_or_scalar(val, key);
    } else if (key == "beta_mean") {
      prior.beta_mean[0] = prior.beta_mean[1] = parse_array_or_scalar(val, key);
    } else if (key == "beta_cov") {
      prior.beta_cov[0] = prior.beta_cov[1] = parse_array_or_scalar(val, key);
    } else if (key == "beta_mean_1") {
      prior.beta_mean[0] = parse_array_or_scalar(val, key);
    } else if (key == "beta_mean_2") {
      prior.beta_mean[1] = parse_array_or_scalar(val, key);
    } else if (key == "beta_cov_1") {
      prior.beta_cov[0] = parse_array_or_scalar(val, key);
    } else if (key == "beta_cov_2") {
      prior.beta_cov[1] = parse_array_or_scalar(val, key);
    } else if (key == "delta_mean") {
      prior.delta_mean[0] = prior.delta_mean[1] = parse_array_or_scalar(val, key);
    } else if (key == "delta_cov") {
      prior.delta_cov[0] = prior.delta_cov[1] = parse_array_or_scalar(val, key);
    } else if (key == "delta_mean_1") {
      prior.delta_mean[0] = parse_array_or_scalar(val, key);
    } else if (key == "delta_mean_2") {
      prior.delta_mean[1] = parse_array_or_scalar(val, key);
    } else if (key == "delta_cov_1") {
      prior.delta_cov[0] = parse_array_or_scalar(val, key);
    } else if (key == "delta_cov_2") {
      prior.delta_cov[1] = parse_array_or_scalar(val, key);
    } else if (key == "sigma2_shape") {
      prior.sigma2_shape = require_number(val, key);
      if (!(*prior.sigma2_shape > 0.0))
        throw ValidationError("config: sigma2_shape must be positive");
    } else if (key == "sigma2_scale") {
      prior.sigma2_scale = require_number(val, key);
      if (!(*prior.sigma2_scale > 0.0))
        throw ValidationError("config: sigma2_scale must be positive");
    } else {
      throw ValidationError("config: unknown prior field '" + key + "'");
    }
  }
}

}  // namespace

CliConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  CliConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (key == "n_iter") {
      cfg.run.n_iter = require_int(val, key);
    } else if (key == "burn_in") {
      cfg.run.burn_in = require_int(val, key);
    } else if (key == "seed") {
      if (!val.is_number_integer() || (val.is_number_integer() && !val.is_number_unsigned() &&
                                       val.get<long long>() < 0))
        throw ValidationError("config: seed must be a nonnegative integer");
      cfg.run.seed = val.get<std::uint64_t>();
    } else if (key == "proposal_dof") {
      cfg.run.proposal_dof = require_number(val, key);
    } else if (key == "optimizer_max_iter") {
      cfg.run.optimizer_max_iter = require_int(val, key);
    } else if (key == "optimizer_grad_tol") {
      cfg.run.optimizer_grad_tol = require_number(val, key);
    } else if (key == "store_u") {
      if (!val.is_boolean()) throw ValidationError("config: store_u must be a boolean");
      cfg.run.store_u = val.get<bool>();
    } else if (key == "parallel") {
      if (!val.is_boolean()) throw ValidationError("config: parallel must be a boolean");
      cfg.run.exec = val.get<bool>() ? Exec::parallel : Exec::serial;
    } else if (key == "prior") {
      if (!val.is_object()) throw ValidationError("config: prior must be an object");
      parse_prior_block(val, cfg.prior);
    } else if (key == "x_columns") {
      cfg.x_columns = require_string_array(val, key);
    } else if (key == "w_columns") {
      cfg.w_columns = require_string_array(val, key);
    } else {
      throw ValidationError("config: unknown field '" + key + "'");
    }
  }
  cfg.run.validate();
  return cfg;
}

namespace {

Eigen::VectorXd resolve_vector(const ArrayOrScalar& a, int dim, const Eigen::VectorXd& fallback,
                               const std::string& key) {
  if (!a.set()) return fallback;
  if (a.scalar) return Eigen::VectorXd::Constant(dim, *a.scalar);
  if (a.vector) {
    if (a.vector->size() != dim)
      throw ValidationError("config: " + key + " must have length " + std::to_string(dim));
    return *a.vector;
  }
  throw ValidationError("config: " + key + " must be a scalar or a flat array");
}

Eigen::MatrixXd resolve_cov(const ArrayOrScalar& a, int dim, const Eigen::MatrixXd& fallback,
                            const std::string& key) {
  if (!a.set()) return fallback;
  if (a.scalar) {
    if (!(*a.scalar > 0.0)) throw ValidationError("config: " + key + " must be positive");
    return *a.scalar * Eigen::MatrixXd::Identity(dim, dim);
  }
  if (a.matrix) {
    if (a.matrix->rows() != dim || a.matrix->cols() != dim)
      throw ValidationError("config: " + key + " must be " + std::to_string(dim) + "x" +
                            std::to_string(dim));
    return *a.matrix;
  }
  throw ValidationError("config: " + key + " must be a scalar or a matrix");
}

}  // namespace

model::PriorSpec materialize_prior(const PriorOverrides& overrides, int p, int q, int J) {
  model::PriorSpec prior = model::PriorSpec::defaults(p, q, J);
  prior.alpha0 = resolve_vector(overrides.alpha_mean, p, prior.alpha0, "alpha_mean");
  prior.A0 = resolve_cov(overrides.alpha_cov, p, prior.A0, "alpha_cov");
  for (int s = 0; s < 2; ++s) {
    const std::string tag = "_" + std::to_string(s + 1);
    prior.beta0[s] = resolve_vector(overrides.beta_mean[s], q, prior.beta0[s], "beta_mean" + tag);
    prior.B0[s] = resolve_cov(overrides.beta_cov[s], q, prior.B0[s], "beta_cov" + tag);
    if (J > 3) {
      prior.delta0[s] =
          resolve_vector(overrides.delta_mean[s], J - 3, prior.delta0[s], "delta_mean" + tag);
      prior.D0[s] = resolve_cov(overrides.delta_cov[s], J - 3, prior.D0[s], "delta_cov" + tag);
    }
  }
  if (overrides.sigma2_shape) prior.v = 2.0 * *overrides.sigma2_shape;
  if (overrides.sigma2_scale) prior.d = 2.0 * *overrides.sigma2_scale;
  prior.validate(p, q, J);
  return prior;
}

namespace {

json aos_to_json(const ArrayOrScalar& a) {
  if (a.scalar) return *a.scalar;
  if (a.vector) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < a.vector->size(); ++i) arr.push_back((*a.vector)[i]);
    return arr;
  }
  json m = json::array();
  for (Eigen::Index r = 0; r < a.matrix->rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < a.matrix->cols(); ++c) row.push_back((*a.matrix)(r, c));
    m.push_back(row);
  }
  return m;
}

}  // namespace

std::string config_echo_json(const CliConfig& config) {
  json j;
  j["n_iter"] = config.run.n_iter;
  j["burn_in"] = config.run.burn_in;
  j["seed"] = config.run.seed;
  j["proposal_dof"] = config.run.proposal_dof;
  j["optimizer_max_iter"] = config.run.optimizer_max_iter;
  j["optimizer_grad_tol"] = config.run.optimizer_grad_tol;
  j["store_u"] = config.run.store_u;
  j["parallel"] = config.run.exec == Exec::parallel;
  json prior = json::object();
  const auto& pr = config.prior;
  auto put = [&](const char* key, const ArrayOrScalar& a) {
    if (a.set()) prior[key] = aos_to_json(a);
  };
  put("alpha_mean", pr.alpha_mean);
  put("alpha_cov", pr.alpha_cov);
  put("beta_mean_1", pr.beta_mean[0]);
  put("beta_mean_2", pr.beta_mean[1]);
  put("beta_cov_1", pr.beta_cov[0]);
  put("beta_cov_2", pr.beta_cov[1]);
  put("delta_mean_1", pr.delta_mean[0]);
  put("delta_mean_2", pr.delta_mean[1]);
  put("delta_cov_1", pr.delta_cov[0]);
  put("delta_cov_2", pr.delta_cov[1]);
  if (pr.sigma2_shape) prior["sigma2_shape"] = *pr.sigma2_shape;
  if (pr.sigma2_scale) prior["sigma2_scale"] = *pr.sigma2_scale;
  j["prior"] = prior;
  j["x_columns"] = config.x_columns;
  j["w_columns"] = config.w_columns;
  return j.dump();
}

}  // namespace lcop::io
