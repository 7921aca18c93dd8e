#include "shrinkreg/risk.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "shrinkreg/canon.hpp"

namespace shrinkreg {

namespace {

// Neumaier compensated summation; aggregation order is fixed by replication
// index so results do not depend on the worker count.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& values) {
  const std::size_t n = values.size();
  MeanSe out;
  if (n == 0) return out;
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  out.mean = sum.value() / static_cast<double>(n);
  if (n < 2) return out;
  CompensatedSum ss;
  for (double v : values) {
    const double d = v - out.mean;
    ss.add(d * d);
  }
  const double var = ss.value() / static_cast<double>(n - 1);
  out.se = std::sqrt(var / static_cast<double>(n));
  return out;
}

std::string format_ratio(double num, double den) {
  std::ostringstream os;
  os.precision(6);
  os << num;
  if (den > 0.0) os << " (" << num / den << " se)";
  return os.str();
}

// Per-replication results for every estimator; columns indexed by
// replication so parallel workers never touch the same memory.
struct ReplicationTable {
  Matrix losses;                // specs x reps
  std::vector<Matrix> errors;   // per spec: m x reps
  std::vector<std::uint8_t> failed;
};

ReplicationTable fill_replications(const Dgp& dgp, const std::vector<NamedSpec>& specs,
                                   std::int64_t reps, int threads, bool parallel) {
  const Index n_specs = static_cast<Index>(specs.size());
  const Index m = dgp.config().m;
  ReplicationTable table;
  table.losses.resize(n_specs, reps);
  table.errors.assign(specs.size(), Matrix(m, reps));
  table.failed.assign(static_cast<std::size_t>(reps), 0);
  const Vector& beta_true = dgp.config().params.beta;

#pragma omp parallel for schedule(static) num_threads(threads) if (parallel)
  for (std::int64_t r = 0; r < reps; ++r) {
    try {
      const RegressionData data = dgp.simulate(static_cast<std::uint64_t>(r));
      for (Index s = 0; s < n_specs; ++s) {
        const EstimateResult res = estimate(data, specs[static_cast<std::size_t>(s)].spec);
        table.losses(s, r) = prediction_loss(res.beta_hat, beta_true, data.x);
        table.errors[static_cast<std::size_t>(s)].col(r) = res.beta_hat - beta_true;
      }
    } catch (const std::exception&) {
      table.failed[static_cast<std::size_t>(r)] = 1;
    }
  }
  return table;
}

RiskReport aggregate(const DgpConfig& config, const std::vector<NamedSpec>& specs,
                     std::int64_t reps, const ReplicationTable& table) {
  RiskReport report;
  report.replications_requested = reps;
  report.seed = config.seed;
  report.failures = static_cast<std::int64_t>(
      std::count(table.failed.begin(), table.failed.end(), std::uint8_t{1}));
  report.replications_used = reps - report.failures;
  if (report.failures * 100 > reps)
    throw ConfigError("mc_risk: more than 1% of replications failed");
  if (report.replications_used < 2)
    throw ConfigError("mc_risk: fewer than 2 usable replications");

  const Index m = config.m;
  std::vector<std::int64_t> kept;
  kept.reserve(static_cast<std::size_t>(report.replications_used));
  for (std::int64_t r = 0; r < reps; ++r)
    if (!table.failed[static_cast<std::size_t>(r)]) kept.push_back(r);

  std::vector<std::vector<double>> loss_series(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    auto& series = loss_series[s];
    series.reserve(kept.size());
    for (std::int64_t r : kept) series.push_back(table.losses(static_cast<Index>(s), r));

    EstimatorRiskRecord rec;
    rec.estimator = specs[s].name;
    rec.replications = static_cast<std::int64_t>(kept.size());
    const MeanSe loss = mean_se(series);
    rec.mean_loss = loss.mean;
    rec.loss_se = loss.se;
    rec.bias.resize(m);
    rec.bias_se.resize(m);
    std::vector<double> comp(kept.size());
    for (Index j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < kept.size(); ++i)
        comp[i] = table.errors[s](j, kept[i]);
      const MeanSe b = mean_se(comp);
      rec.bias(j) = b.mean;
      rec.bias_se(j) = b.se;
    }
    report.estimators.push_back(std::move(rec));
  }

  std::vector<double> diff(kept.size());
  for (std::size_t a = 0; a < specs.size(); ++a) {
    for (std::size_t b = a + 1; b < specs.size(); ++b) {
      for (std::size_t i = 0; i < kept.size(); ++i)
        diff[i] = loss_series[a][i] - loss_series[b][i];
      const MeanSe d = mean_se(diff);
      report.pairs.push_back(PairedRiskRecord{specs[a].name, specs[b].name, d.mean, d.se});
    }
  }
  return report;
}

void require_specs(const std::vector<NamedSpec>& specs) {
  if (specs.empty()) throw ConfigError("mc_risk: at least one estimator is required");
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (std::size_t j = i + 1; j < specs.size(); ++j)
      if (specs[i].name == specs[j].name)
        throw ConfigError("mc_risk: estimator names must be unique");
}

RiskReport mc_risk_impl(const DgpConfig& config, const std::vector<NamedSpec>& specs,
                        std::int64_t reps, int threads, bool parallel) {
  config.validate();
  require_specs(specs);
  if (reps < 2) throw ConfigError("mc_risk: reps must be >= 2");
  const Dgp dgp(config);
  const ReplicationTable table = fill_replications(dgp, specs, reps, threads, parallel);
  RiskReport report = aggregate(config, specs, reps, table);
  // Surface per-estimator warnings once; they depend on dimensions, not draws.
  const RegressionData probe = dgp.simulate(0);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    try {
      report.estimators[s].warnings = estimate(probe, specs[s].spec).warnings;
    } catch (const std::exception&) {
    }
  }
  return report;
}

}  // namespace

double prediction_loss(const Vector& beta_hat, const Vector& beta, const Matrix& x) {
  if (beta_hat.size() != beta.size() || x.cols() != beta.size())
    throw ConfigError("prediction_loss: dimension mismatch");
  const Vector d = beta_hat - beta;
  Vector t = x * d;
  t.array() -= t.mean();  // h applied once; the weight is X'hX with h idempotent
  return t.squaredNorm();
}

int resolve_threads(int requested) {
  int threads = requested > 0 ? requested : omp_get_max_threads();
  if (const char* env = std::getenv("SHRINKREG_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) threads = std::min<long>(threads, cap);
  }
  return std::max(1, threads);
}

RiskReport mc_risk(const DgpConfig& config, const std::vector<NamedSpec>& specs,
                   std::int64_t reps, int threads) {
  return mc_risk_impl(config, specs, reps, resolve_threads(threads), true);
}

RiskReport mc_risk_serial(const DgpConfig& config, const std::vector<NamedSpec>& specs,
                          std::int64_t reps) {
  return mc_risk_impl(config, specs, reps, 1, false);
}

RiskOracle make_risk_oracle(const DgpConfig& config) {
  const Dgp dgp(config);
  const Matrix& x = dgp.x();
  const RowVector x_mean = x.colwise().mean();
  const Matrix xc = x.rowwise() - x_mean;
  const Matrix xhx = xc.transpose() * xc;

  RiskOracle oracle;
  oracle.phi = config.covariates.beta_w.transpose() * xhx * config.covariates.beta_w;
  oracle.phi += static_cast<double>(config.m) * config.covariates.sigma_w;

  const double sigma2 = config.params.sigma2;
  const double m = static_cast<double>(config.m);
  oracle.closed_form_values["ols_short_risk"] =
      m * sigma2 + config.params.gamma.dot(oracle.phi * config.params.gamma);
  const Index dof = config.n - config.m - config.k - 2;
  if (dof > 0) {
    // E tr(phi (W'W)^{-1}) with W'W Wishart(n-m-1, sigma_w).
    const double trace =
        config.covariates.sigma_w.llt().solve(oracle.phi).trace() / static_cast<double>(dof);
    oracle.closed_form_values["ols_long_risk"] = m * sigma2 + sigma2 * trace;
  }
  return oracle;
}

double ols_long_risk_closed_form(Index n, Index m, Index k, double sigma2) {
  if (n - m - k - 2 <= 0)
    throw ConfigError("ols_long_risk_closed_form: requires n - m - k - 2 > 0");
  return static_cast<double>(m) * sigma2 *
         (1.0 + static_cast<double>(k) / static_cast<double>(n - m - k - 2));
}

double ols_short_risk_closed_form(Index m, double sigma2, const Vector& gamma,
                                  const Matrix& sigma_w) {
  return static_cast<double>(m) * (sigma2 + gamma.dot(sigma_w * gamma));
}

CheckReport lemma1_bias_check(const DgpConfig& config, std::int64_t reps, int threads) {
  EstimatorSpec short_spec;
  short_spec.kind = EstimatorKind::kOlsShort;
  const std::vector<NamedSpec> specs{{"ols-short", short_spec}};
  const RiskReport report = mc_risk(config, specs, reps, threads);
  const Vector target = config.covariates.beta_w * config.params.gamma;
  const auto& rec = report.estimators.front();

  bool passed = true;
  double worst_z = 0.0;
  for (Index j = 0; j < target.size(); ++j) {
    const double dev = std::abs(rec.bias(j) - target(j));
    if (rec.bias_se(j) > 0.0) {
      const double z = dev / rec.bias_se(j);
      worst_z = std::max(worst_z, z);
      if (z > 4.0) passed = false;
    } else if (dev > 1e-12 * std::max(1.0, std::abs(target(j)))) {
      passed = false;
    }
  }
  std::ostringstream os;
  os << "bias vs beta_w*gamma, worst |z| = " << worst_z << " over " << target.size()
     << " components";
  return CheckReport{"lemma1", passed, os.str()};
}

CheckReport corollary_prediction_equivalence(const DgpConfig& config, const NamedSpec& spec,
                                             std::int64_t reps, int threads) {
  if (!config.covariates.exogenous())
    throw ConfigError("corollary_prediction_equivalence: requires beta_w == 0");
  config.validate();
  if (reps < 2) throw ConfigError("corollary_prediction_equivalence: reps must be >= 2");

  const RiskReport direct = mc_risk(config, {spec}, reps, threads);
  const double r1 = direct.estimators.front().mean_loss;
  const double se1 = direct.estimators.front().loss_se;

  // Out-of-sample route: train the first-stage rule on n-1-m synthetic draws
  // and score one fresh draw, scaled by m.
  const Index s = config.n - config.m - 1;
  const Index k = config.k;
  const Matrix chol = cholesky_sqrt(config.covariates.sigma_w);
  const double sigma = std::sqrt(config.params.sigma2);
  const double m = static_cast<double>(config.m);
  const Vector& gamma = config.params.gamma;

  std::vector<double> holdout(static_cast<std::size_t>(reps));
  const int n_threads = resolve_threads(threads);
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (std::int64_t r = 0; r < reps; ++r) {
    rng::NormalStream stream(config.seed, rng::StreamDomain::kHoldout,
                             static_cast<std::uint64_t>(r));
    Matrix z(s + 1, k);
    for (Index i = 0; i < s + 1; ++i)
      for (Index j = 0; j < k; ++j) z(i, j) = stream.normal();
    const Matrix w_tilde = z * chol.transpose();
    Vector y_tilde = w_tilde * gamma;
    for (Index i = 0; i < s + 1; ++i) y_tilde(i) += sigma * stream.normal();

    const Vector gamma_hat =
        first_stage_gamma(spec.spec, y_tilde.tail(s), w_tilde.bottomRows(s));
    const double e = y_tilde(0) - w_tilde.row(0).dot(gamma_hat);
    holdout[static_cast<std::size_t>(r)] = m * e * e;
  }
  const MeanSe oos = mean_se(holdout);

  const double combined = std::sqrt(se1 * se1 + oos.se * oos.se);
  const double dev = std::abs(r1 - oos.mean);
  const bool passed = combined > 0.0 ? dev <= 4.0 * combined : dev <= 1e-12;
  std::ostringstream os;
  os << spec.name << ": regression risk " << r1 << " vs out-of-sample " << oos.mean
     << ", |diff| = " << format_ratio(dev, combined);
  return CheckReport{"corollary_equivalence", passed, os.str()};
}

CheckReport loss_decomposition_check(const Matrix& x, const Matrix& w,
                                     const ModelParams& params, const NamedSpec& spec,
                                     std::int64_t reps, std::uint64_t seed, int threads) {
  if (reps < 2) throw ConfigError("loss_decomposition_check: reps must be >= 2");
  const Index n = x.rows(), m = x.cols(), k = w.cols();
  const CanonicalBasis basis = build_basis(x, w);
  const CanonicalForm geometry = transform(Vector::Zero(n), basis, x, w);
  const Matrix& a = geometry.a;

  const Vector mu_x = basis.qx.transpose() * x * params.beta;
  const Matrix qw_w = basis.qw.transpose() * w;
  const Vector mu_w = qw_w * params.gamma;
  Vector y_base = Vector::Constant(n, params.alpha);
  y_base.noalias() += x * params.beta;
  y_base.noalias() += w * params.gamma;
  const double sigma = std::sqrt(params.sigma2);
  const Index s = n - m - 1;

  // w in perp coordinates: the qw block stacked over zeros.
  Matrix w_perp = Matrix::Zero(s, k);
  w_perp.topRows(k) = qw_w;

  std::vector<double> lhs(static_cast<std::size_t>(reps));
  std::vector<double> rhs(static_cast<std::size_t>(reps));
  const int n_threads = resolve_threads(threads);
#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (std::int64_t r = 0; r < reps; ++r) {
    rng::NormalStream stream(seed, rng::StreamDomain::kDecomposition,
                             static_cast<std::uint64_t>(r));
    Vector y = y_base;
    for (Index i = 0; i < n; ++i) y(i) += sigma * stream.normal();

    Vector y_perp(s);
    y_perp.head(k) = basis.qw.transpose() * y;
    y_perp.tail(s - k) = basis.qr.transpose() * y;
    const Vector y_star_x = basis.qx.transpose() * y;

    const Vector gamma_hat = first_stage_gamma(spec.spec, y_perp, w_perp);
    const Vector mu_w_hat = qw_w * gamma_hat;

    lhs[static_cast<std::size_t>(r)] = (y_star_x - a * mu_w_hat - mu_x).squaredNorm();
    rhs[static_cast<std::size_t>(r)] =
        static_cast<double>(m) * params.sigma2 + (a * (mu_w_hat - mu_w)).squaredNorm();
  }

  std::vector<double> diff(static_cast<std::size_t>(reps));
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = lhs[i] - rhs[i];
  const MeanSe d = mean_se(diff);
  const MeanSe l = mean_se(lhs);
  const MeanSe rr = mean_se(rhs);
  const double dev = std::abs(d.mean);
  const bool passed = d.se > 0.0 ? dev <= 4.0 * d.se : dev <= 1e-12;
  std::ostringstream os;
  os << spec.name << ": E||mu_x_hat - mu_x||^2 = " << l.mean << " vs m*sigma2 + seminorm = "
     << rr.mean << ", paired |diff| = " << format_ratio(dev, d.se);
  return CheckReport{"decomposition", passed, os.str()};
}

CheckReport invariance_check(const DgpConfig& config, const std::vector<NamedSpec>& specs,
                             int instances) {
  config.validate();
  const Dgp dgp(config);
  const Index m = config.m, k = config.k;
  const Index s = config.n - m - 1;
  constexpr double kDataTol = 1e-9;
  constexpr double kGroupTol = 1e-10;

  double worst_data = 0.0;
  double worst_group = 0.0;
  bool passed = true;

  for (int i = 0; i < instances; ++i) {
    const RegressionData data = dgp.simulate(static_cast<std::uint64_t>(i));
    rng::NormalStream stream(config.seed, rng::StreamDomain::kInvariance,
                             static_cast<std::uint64_t>(i));

    const Matrix rot = random_orthogonal(k, stream);
    Vector shift_c(m);
    for (Index j = 0; j < m; ++j) shift_c(j) = stream.normal();
    const double shift_c0 = stream.normal();
    const double lambda = std::exp(stream.normal());

    for (const auto& named : specs) {
      const EstimateResult base = estimate(data, named.spec);

      // Control rotation: w -> w R (gbayes with sigma_w conjugated).
      RegressionData rotated = data;
      rotated.w = data.w * rot;
      EstimatorSpec rotated_spec = named.spec;
      if (named.spec.kind == EstimatorKind::kGeneralizedBayes) {
        const Matrix sw =
            named.spec.sigma_w ? *named.spec.sigma_w : Matrix(Matrix::Identity(k, k));
        rotated_spec.sigma_w = Matrix(rot.transpose() * sw * rot);
      }
      const EstimateResult rot_res = estimate(rotated, rotated_spec);
      double dev = (rot_res.beta_hat - base.beta_hat).cwiseAbs().maxCoeff();
      worst_data = std::max(worst_data, dev);
      if (dev > kDataTol) passed = false;

      // Translation: y -> y + 1 c0 + x c shifts beta by exactly c.
      RegressionData shifted = data;
      shifted.y = data.y + Vector::Constant(data.n(), shift_c0) + data.x * shift_c;
      const EstimateResult shift_res = estimate(shifted, named.spec);
      dev = (shift_res.beta_hat - base.beta_hat - shift_c).cwiseAbs().maxCoeff();
      worst_data = std::max(worst_data, dev);
      if (dev > kDataTol) passed = false;

      // Scale: y -> lambda y maps beta to lambda beta for the scale-free rules.
      if (named.spec.kind != EstimatorKind::kGeneralizedBayes) {
        RegressionData scaled = data;
        scaled.y = lambda * data.y;
        const EstimateResult scale_res = estimate(scaled, named.spec);
        dev = (scale_res.beta_hat - lambda * base.beta_hat).cwiseAbs().maxCoeff() /
              std::max(1.0, lambda * base.beta_hat.cwiseAbs().maxCoeff());
        worst_data = std::max(worst_data, dev);
        if (dev > kDataTol) passed = false;
      }
    }

    // Group-level checks: homomorphism, model-mean commutation, loss
    // invariance, covariance preservation.
    const Matrix& sigma_w = config.covariates.sigma_w;
    auto random_element = [&](rng::NormalStream& st) {
      GroupElement g;
      g.g_mu.resize(m);
      for (Index j = 0; j < m; ++j) g.g_mu(j) = st.normal();
      g.g_x = random_orthogonal(m, st);
      g.g_w = random_orthogonal(k, st);
      g.g_perp = random_orthogonal(s, st);
      return g;
    };
    const GroupElement g1 = random_element(stream);
    const GroupElement g2 = random_element(stream);

    CanonicalTheta theta;
    theta.mu_x.resize(m);
    for (Index j = 0; j < m; ++j) theta.mu_x(j) = stream.normal();
    theta.gamma.resize(k);
    for (Index j = 0; j < k; ++j) theta.gamma(j) = stream.normal();
    Vector action(m);
    for (Index j = 0; j < m; ++j) action(j) = stream.normal();

    const CanonicalBasis basis = build_basis(data.x, data.w);
    const CanonicalSample sample = to_canonical_sample(basis, data.y, data.w);

    const CanonicalSample two_step =
        apply_group_data(g2, apply_group_data(g1, sample, sigma_w), sigma_w);
    const CanonicalSample composed = apply_group_data(compose(g2, g1), sample, sigma_w);
    double gdev = std::max({(two_step.y_x - composed.y_x).cwiseAbs().maxCoeff(),
                            (two_step.y_perp - composed.y_perp).cwiseAbs().maxCoeff(),
                            (two_step.w_x - composed.w_x).cwiseAbs().maxCoeff(),
                            (two_step.w_perp - composed.w_perp).cwiseAbs().maxCoeff()});
    worst_group = std::max(worst_group, gdev);
    if (gdev > kGroupTol) passed = false;

    const CanonicalTheta theta_two =
        apply_group_params(g2, apply_group_params(g1, theta, sigma_w), sigma_w);
    const CanonicalTheta theta_comp = apply_group_params(compose(g2, g1), theta, sigma_w);
    gdev = std::max((theta_two.mu_x - theta_comp.mu_x).cwiseAbs().maxCoeff(),
                    (theta_two.gamma - theta_comp.gamma).cwiseAbs().maxCoeff());
    worst_group = std::max(worst_group, gdev);
    if (gdev > kGroupTol) passed = false;

    // Model invariance at the level of Gaussian means.
    const CanonicalSample mean_sample = canonical_mean_sample(theta, k, s);
    const CanonicalSample mean_mapped = apply_group_data(g1, mean_sample, sigma_w);
    const CanonicalTheta theta_mapped = apply_group_params(g1, theta, sigma_w);
    const CanonicalSample mean_target = canonical_mean_sample(theta_mapped, k, s);
    gdev = std::max({(mean_mapped.y_x - mean_target.y_x).cwiseAbs().maxCoeff(),
                     (mean_mapped.y_perp - mean_target.y_perp).cwiseAbs().maxCoeff(),
                     (mean_mapped.w_x - mean_target.w_x).cwiseAbs().maxCoeff(),
                     (mean_mapped.w_perp - mean_target.w_perp).cwiseAbs().maxCoeff()});
    worst_group = std::max(worst_group, gdev);
    if (gdev > kGroupTol) passed = false;

    // Row covariance of the control blocks is preserved by the column map.
    const Matrix root = symmetric_sqrt(sigma_w);
    const Matrix t = root.llt().solve(g1.g_w.transpose() * root);
    gdev = (t.transpose() * sigma_w * t - sigma_w).cwiseAbs().maxCoeff() /
           sigma_w.cwiseAbs().maxCoeff();
    worst_group = std::max(worst_group, gdev);
    if (gdev > kGroupTol) passed = false;

    // Loss invariance.
    const Vector mu_mapped = apply_group_params(g1, theta, sigma_w).mu_x;
    const Vector action_mapped = g1.g_x * action + g1.g_mu;
    const double loss_before = (theta.mu_x - action).squaredNorm();
    const double loss_after = (mu_mapped - action_mapped).squaredNorm();
    gdev = std::abs(loss_after - loss_before) / std::max(1.0, loss_before);
    worst_group = std::max(worst_group, gdev);
    if (gdev > kGroupTol) passed = false;
  }

  std::ostringstream os;
  os << "worst data-level deviation " << worst_data << " (tol 1e-9), worst group deviation "
     << worst_group << " (tol 1e-10) over " << instances << " instances";
  return CheckReport{"invariance", passed, os.str()};
}

CheckReport dominance_check(const RiskReport& report, const std::string& shrink_name,
                            const std::string& baseline_name, double min_z) {
  double diff = 0.0, se = 0.0;
  bool found = false;
  for (const auto& pair : report.pairs) {
    if (pair.estimator_a == shrink_name && pair.estimator_b == baseline_name) {
      diff = pair.loss_diff_mean;
      se = pair.loss_diff_se;
      found = true;
    } else if (pair.estimator_a == baseline_name && pair.estimator_b == shrink_name) {
      diff = -pair.loss_diff_mean;
      se = pair.loss_diff_se;
      found = true;
    }
  }
  if (!found)
    throw ConfigError("dominance_check: pair (" + shrink_name + ", " + baseline_name +
                      ") not present in the report");
  const bool passed = diff < 0.0 && (se == 0.0 || std::abs(diff) >= min_z * se);
  std::ostringstream os;
  os << shrink_name << " - " << baseline_name << ": paired diff " << diff << " (se " << se
     << ", |z| " << (se > 0.0 ? std::abs(diff) / se : 0.0) << ", need >= " << min_z << ")";
  return CheckReport{"dominance", passed, os.str()};
}

CheckReport unbiasedness_check(const RiskReport& report) {
  bool passed = true;
  double worst_z = 0.0;
  std::string worst_name;
  for (const auto& rec : report.estimators) {
    for (Index j = 0; j < rec.bias.size(); ++j) {
      const double dev = std::abs(rec.bias(j));
      if (rec.bias_se(j) > 0.0) {
        const double z = dev / rec.bias_se(j);
        if (z > worst_z) {
          worst_z = z;
          worst_name = rec.estimator;
        }
        if (z > 4.0) passed = false;
      } else if (dev > 1e-12) {
        passed = false;
      }
    }
  }
  std::ostringstream os;
  os << "worst |bias|/se = " << worst_z;
  if (!worst_name.empty()) os << " (" << worst_name << ")";
  os << ", need <= 4";
  return CheckReport{"unbiasedness", passed, os.str()};
}

}  // namespace shrinkreg
