#include "shrinkreg/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace shrinkreg {

std::string format_double(double value) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
  std::size_t begin = 0, end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' ||
                         text[end - 1] == '\r'))
    --end;
  double value = 0.0;
  const char* first = text.data() + begin;
  const char* last = text.data() + end;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw DataFormatError("not a number: '" + std::string(text) + "'");
  return value;
}

namespace {

const Json& require_field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing field");
  return j.at(key);
}

double number_at(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require_field(j, key, path);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

Index index_at(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require_field(j, key, path);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  return v.get<Index>();
}

Vector vector_at(const Json& j, const std::string& key, Index size,
                 const std::string& path) {
  const Json& v = require_field(j, key, path);
  if (!v.is_array() || static_cast<Index>(v.size()) != size)
    throw ConfigError(path + "." + key + ": expected an array of length " +
                      std::to_string(size));
  Vector out(size);
  for (Index i = 0; i < size; ++i) {
    if (!v.at(static_cast<std::size_t>(i)).is_number())
      throw ConfigError(path + "." + key + "[" + std::to_string(i) + "]: expected a number");
    out(i) = v.at(static_cast<std::size_t>(i)).get<double>();
  }
  return out;
}

// Row-major flat array -> rows x cols matrix.
Matrix matrix_at(const Json& j, const std::string& key, Index rows, Index cols,
                 const std::string& path) {
  const Vector flat = vector_at(j, key, rows * cols, path);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) out(i, c) = flat(i * cols + c);
  return out;
}

Json flat_row_major(const Matrix& m) {
  Json arr = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> known,
                         const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError(path + "." + it.key() + ": unknown field");
  }
}

}  // namespace

Json dgp_config_to_json(const DgpConfig& config) {
  Json j;
  j["n"] = config.n;
  j["m"] = config.m;
  j["k"] = config.k;
  j["alpha"] = config.params.alpha;
  j["beta"] = vector_json(config.params.beta);
  j["gamma"] = vector_json(config.params.gamma);
  j["sigma2"] = config.params.sigma2;
  j["alpha_w"] = vector_json(config.covariates.alpha_w.transpose());
  j["beta_w"] = flat_row_major(config.covariates.beta_w);
  j["sigma_w"] = flat_row_major(config.covariates.sigma_w);
  if (config.x_fixed)
    j["x_design"] = flat_row_major(*config.x_fixed);
  else
    j["x_design"] = "gaussian";
  j["seed"] = config.seed;
  return j;
}

DgpConfig dgp_config_from_json(const Json& j) {
  const std::string path = "dgp";
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  reject_unknown_keys(j,
                      {"n", "m", "k", "alpha", "beta", "gamma", "sigma2", "alpha_w",
                       "beta_w", "sigma_w", "x_design", "seed"},
                      path);
  DgpConfig config;
  config.n = index_at(j, "n", path);
  config.m = index_at(j, "m", path);
  config.k = index_at(j, "k", path);
  if (config.n < 1 || config.m < 1 || config.k < 1)
    throw ConfigError(path + ": n, m, k must be positive");
  config.params.alpha = number_at(j, "alpha", path);
  config.params.beta = vector_at(j, "beta", config.m, path);
  config.params.gamma = vector_at(j, "gamma", config.k, path);
  config.params.sigma2 = number_at(j, "sigma2", path);
  config.covariates.alpha_w = vector_at(j, "alpha_w", config.k, path).transpose();
  config.covariates.beta_w = matrix_at(j, "beta_w", config.m, config.k, path);
  config.covariates.sigma_w = matrix_at(j, "sigma_w", config.k, config.k, path);

  const Json& design = require_field(j, "x_design", path);
  if (design.is_string()) {
    if (design.get<std::string>() != "gaussian")
      throw ConfigError(path + ".x_design: expected \"gaussian\" or a row-major matrix");
  } else {
    config.x_fixed = matrix_at(j, "x_design", config.n, config.m, path);
  }

  const Json& seed = require_field(j, "seed", path);
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw ConfigError(path + ".seed: expected an unsigned integer");
  config.seed = seed.get<std::uint64_t>();
  config.validate();
  return config;
}

Json estimator_spec_to_json(const EstimatorSpec& spec) {
  Json j;
  j["kind"] = estimator_kind_name(spec.kind);
  if (spec.p) j["p"] = *spec.p;
  if (spec.kind == EstimatorKind::kGeneralizedBayes) {
    j["sigma2"] = spec.sigma2;
    j["tau2"] = spec.tau2;
    if (spec.sigma_w) j["sigma_w"] = flat_row_major(*spec.sigma_w);
  }
  return j;
}

EstimatorSpec estimator_spec_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  reject_unknown_keys(j, {"name", "kind", "p", "sigma2", "tau2", "sigma_w"}, path);
  EstimatorSpec spec;
  const Json& kind = require_field(j, "kind", path);
  if (!kind.is_string()) throw ConfigError(path + ".kind: expected a string");
  const auto parsed = estimator_kind_from_name(kind.get<std::string>());
  if (!parsed)
    throw ConfigError(path + ".kind: unknown estimator '" + kind.get<std::string>() + "'");
  spec.kind = *parsed;
  if (j.contains("p")) {
    if (!j.at("p").is_number()) throw ConfigError(path + ".p: expected a number");
    spec.p = j.at("p").get<double>();
  }
  if (j.contains("sigma2")) spec.sigma2 = number_at(j, "sigma2", path);
  if (j.contains("tau2")) spec.tau2 = number_at(j, "tau2", path);
  if (j.contains("sigma_w")) {
    const Json& sw = j.at("sigma_w");
    if (!sw.is_array()) throw ConfigError(path + ".sigma_w: expected a flat row-major array");
    const auto len = static_cast<Index>(sw.size());
    const auto dim = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(len))));
    if (dim * dim != len)
      throw ConfigError(path + ".sigma_w: array length must be a perfect square");
    spec.sigma_w = matrix_at(j, "sigma_w", dim, dim, path);
  }
  return spec;
}

Json estimate_result_to_json(const EstimateResult& result, const std::string& estimator) {
  Json j;
  j["estimator"] = estimator;
  j["beta_hat"] = vector_json(result.beta_hat);
  j["gamma_hat"] = vector_json(result.gamma_hat);
  j["alpha_hat"] = result.alpha_hat;
  j["shrink_factor"] = result.shrink_factor;
  j["ssr"] = result.ssr;
  j["p_used"] = result.diagnostics.p_used;
  j["p_upper_bound"] = result.diagnostics.p_upper_bound;
  j["warnings"] = result.warnings;
  return j;
}

Json risk_report_to_json(const RiskReport& report) {
  Json j;
  j["seed"] = report.seed;
  j["replications_requested"] = report.replications_requested;
  j["replications_used"] = report.replications_used;
  j["failures"] = report.failures;
  Json estimators = Json::array();
  for (const auto& rec : report.estimators) {
    Json e;
    e["estimator"] = rec.estimator;
    e["mean_loss"] = rec.mean_loss;
    e["loss_se"] = rec.loss_se;
    e["bias"] = vector_json(rec.bias);
    e["bias_se"] = vector_json(rec.bias_se);
    e["reps"] = rec.replications;
    e["warnings"] = rec.warnings;
    estimators.push_back(std::move(e));
  }
  j["estimators"] = std::move(estimators);
  Json pairs = Json::array();
  for (const auto& pair : report.pairs) {
    Json p;
    p["estimator_a"] = pair.estimator_a;
    p["estimator_b"] = pair.estimator_b;
    p["loss_diff_mean"] = pair.loss_diff_mean;
    p["loss_diff_se"] = pair.loss_diff_se;
    pairs.push_back(std::move(p));
  }
  j["pairs"] = std::move(pairs);
  return j;
}

std::string risk_report_csv(const RiskReport& report) {
  const Index m = report.estimators.empty() ? 0 : report.estimators.front().bias.size();
  std::ostringstream os;
  os << "estimator,mean_loss,loss_se";
  for (Index i = 1; i <= m; ++i) os << ",bias_" << i;
  for (Index i = 1; i <= m; ++i) os << ",bias_se_" << i;
  os << ",reps\n";
  for (const auto& rec : report.estimators) {
    os << rec.estimator << ',' << format_double(rec.mean_loss) << ','
       << format_double(rec.loss_se);
    for (Index i = 0; i < m; ++i) os << ',' << format_double(rec.bias(i));
    for (Index i = 0; i < m; ++i) os << ',' << format_double(rec.bias_se(i));
    os << ',' << rec.replications << '\n';
  }
  return os.str();
}

std::string risk_pairs_csv(const RiskReport& report) {
  std::ostringstream os;
  os << "estimator_a,estimator_b,loss_diff_mean,loss_diff_se\n";
  for (const auto& pair : report.pairs) {
    os << pair.estimator_a << ',' << pair.estimator_b << ','
       << format_double(pair.loss_diff_mean) << ',' << format_double(pair.loss_diff_se)
       << '\n';
  }
  return os.str();
}

std::string dataset_to_csv(const RegressionData& data) {
  std::ostringstream os;
  os << 'y';
  for (Index j = 1; j <= data.m(); ++j) os << ",x" << j;
  for (Index j = 1; j <= data.k(); ++j) os << ",w" << j;
  os << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    os << format_double(data.y(i));
    for (Index j = 0; j < data.m(); ++j) os << ',' << format_double(data.x(i, j));
    for (Index j = 0; j < data.k(); ++j) os << ',' << format_double(data.w(i, j));
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

RegressionData dataset_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataFormatError("empty file", 1);
  const auto header = split_csv_line(strip_cr(line));
  if (header.empty() || header[0] != "y")
    throw DataFormatError("header must start with 'y'", 1);
  Index m = 0, k = 0;
  std::size_t pos = 1;
  while (pos < header.size() && header[pos] == "x" + std::to_string(m + 1)) {
    ++m;
    ++pos;
  }
  while (pos < header.size() && header[pos] == "w" + std::to_string(k + 1)) {
    ++k;
    ++pos;
  }
  if (pos != header.size())
    throw DataFormatError("header must be y,x1..xm,w1..wk; unexpected column '" +
                              header[pos] + "'",
                          1);
  if (m < 1) throw DataFormatError("at least one x column is required", 1);

  std::vector<std::vector<double>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = strip_cr(line);
    if (stripped.empty()) continue;
    const auto fields = split_csv_line(stripped);
    if (static_cast<Index>(fields.size()) != 1 + m + k)
      throw DataFormatError("expected " + std::to_string(1 + m + k) + " fields, got " +
                                std::to_string(fields.size()),
                            line_no);
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v;
      try {
        v = parse_double(fields[i]);
      } catch (const DataFormatError& e) {
        throw DataFormatError(e.what(), line_no);
      }
      if (!std::isfinite(v))
        throw DataFormatError("non-finite value in column " + std::to_string(i + 1),
                              line_no);
      row[i] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataFormatError("no data rows", line_no);

  RegressionData data;
  const Index n = static_cast<Index>(rows.size());
  data.y.resize(n);
  data.x.resize(n, m);
  data.w.resize(n, k);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    data.y(i) = row[0];
    for (Index j = 0; j < m; ++j) data.x(i, j) = row[static_cast<std::size_t>(1 + j)];
    for (Index j = 0; j < k; ++j)
      data.w(i, j) = row[static_cast<std::size_t>(1 + m + j)];
  }
  return data;
}

RegressionData read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open '" + path + "'");
  return dataset_from_csv(in);
}

}  // namespace shrinkreg
