#include "bsbm/concentration.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bsbm/errors.hpp"
#include "bsbm/estimators.hpp"
#include "bsbm/parallel.hpp"

namespace bsbm::bench {

namespace {

// Stream for Monte Carlo sample s, derived from the caller's key.
RngStream sample_stream(const RngStream& base, std::size_t s) {
  return RngStream(base.master_seed(),
                   StreamId{base.id().grid, s, 0x9e3779b9u + base.id().substream});
}

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  const double n = static_cast<double>(xs.size());
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

struct FixedLabels {
  LabelVector eta1;
  LabelVector eta2;
};

FixedLabels draw_labels(const BsbmParams& params, RngStream& rng) {
  params.validate(/*allow_zero_rate=*/true);
  FixedLabels f;
  f.eta1 = sample_labels(params.n1(), params.n1_plus, rng);
  f.eta2 = sample_labels(params.n2(), params.n2_plus, rng);
  return f;
}

void check_dense_size(std::size_t n) {
  if (n > kDenseCap) {
    throw InvalidArgument("dense bench is capped at n1 = " + std::to_string(kDenseCap));
  }
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(10);
  ss << x;
  return ss.str();
}

}  // namespace

double spectral_norm_dense(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("spectral_norm_dense needs a square matrix");
  check_dense_size(static_cast<std::size_t>(m.rows()));
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

Eigen::MatrixXd noise_gram(const Biadjacency& a, const BsbmParams& params,
                           const LabelVector& eta1, const LabelVector& eta2) {
  const std::size_t n1 = a.n1();
  const std::size_t n2 = a.n2();
  if (eta1.size() != n1 || eta2.size() != n2) {
    throw InvalidArgument("labels do not match the matrix dimensions");
  }
  check_dense_size(n1);
  const double p = params.p;
  const double g = (params.delta - 1.0) * p;  // E(A) = p 1 1^T + g eta1 eta2^T

  // A A^T through the column incidence lists.
  std::vector<std::vector<std::uint32_t>> by_col(n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (auto j : a.row(i)) by_col[j].push_back(static_cast<std::uint32_t>(i));
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(Eigen::Index(n1), Eigen::Index(n1));
  for (const auto& rows : by_col) {
    for (auto i : rows) {
      for (auto k : rows) gram(i, k) += 1.0;
    }
  }

  // (A E^T)_ik = p deg_i + g eta1_k s_i with s_i = sum_{j in row i} eta2_j.
  std::vector<double> deg(n1), s(n1);
  for (std::size_t i = 0; i < n1; ++i) {
    deg[i] = static_cast<double>(a.degree(i));
    double acc = 0.0;
    for (auto j : a.row(i)) acc += eta2[j];
    s[i] = acc;
  }
  double eta2_sum = 0.0;
  for (int v : eta2.values()) eta2_sum += v;
  const double n2d = static_cast<double>(n2);

  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t k = 0; k < n1; ++k) {
      const double ae_ik = p * deg[i] + g * eta1[k] * s[i];
      const double ae_ki = p * deg[k] + g * eta1[i] * s[k];
      const double ee = n2d * p * p + g * p * (eta1[i] + eta1[k]) * eta2_sum +
                        g * g * eta1[i] * eta1[k] * n2d;
      gram(Eigen::Index(i), Eigen::Index(k)) += ee - ae_ik - ae_ki;
    }
  }
  return gram;
}

Eigen::MatrixXd hollow(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd h = m;
  h.diagonal().setZero();
  return h;
}

double hoeffding_slack(std::size_t samples, double confidence) {
  if (samples == 0) throw InvalidArgument("samples must be positive");
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(samples)));
}

double bernstein_bound(std::size_t n1, std::size_t n2, double p, double t) {
  const double n1d = static_cast<double>(n1);
  const double variance = 8.0 * n1d * static_cast<double>(n2) * p * p;
  const double range = 6.0 * (1.0 + 2.0 * n1d * p) * t;
  if (t <= 0.0) return n1d;
  return n1d * std::exp(-(t * t) / (variance + range));
}

std::vector<TailEstimate> bernstein_tail_check(const BsbmParams& params,
                                               std::span<const double> t_grid,
                                               std::size_t samples, RngStream& rng,
                                               std::size_t threads) {
  if (samples < 1000) throw InvalidArgument("bernstein_tail_check needs at least 1000 samples");
  check_dense_size(params.n1());
  const auto labels = draw_labels(params, rng);

  std::vector<double> norms(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    auto stream = sample_stream(rng, s);
    const auto a = sample_adjacency(params, labels.eta1, labels.eta2, stream, true);
    norms[s] = spectral_norm_dense(hollow(noise_gram(a, params, labels.eta1, labels.eta2)));
  });

  const double slack = hoeffding_slack(samples);
  std::vector<TailEstimate> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (t < 0.0) throw InvalidArgument("t must be non-negative");
    TailEstimate e;
    e.t = t;
    e.samples = samples;
    std::size_t hits = 0;
    for (double x : norms) hits += x >= t;
    e.empirical_prob = static_cast<double>(hits) / static_cast<double>(samples);
    e.bound = bernstein_bound(params.n1(), params.n2(), params.p, t);
    e.slack = slack;
    e.pass = e.empirical_prob <= e.bound + slack;
    out.push_back(e);
  }
  return out;
}

SecondMoment hollow_second_moment(const BsbmParams& params, std::size_t samples,
                                  RngStream& rng, double precondition_c, std::size_t threads) {
  if (samples == 0) throw InvalidArgument("samples must be positive");
  check_dense_size(params.n1());
  const double n1 = static_cast<double>(params.n1());
  const double n2 = static_cast<double>(params.n2());
  const double ln1 = std::log(n1);
  const double floor = precondition_c * std::max(std::sqrt(ln1 / (n1 * n2)), ln1 / n2);
  if (params.p < floor) {
    throw InvalidArgument("p is below C * max(sqrt(ln n1 / (n1 n2)), ln n1 / n2)");
  }
  const auto labels = draw_labels(params, rng);
  std::vector<double> sq(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    auto stream = sample_stream(rng, s);
    const auto a = sample_adjacency(params, labels.eta1, labels.eta2, stream, true);
    const double norm =
        spectral_norm_dense(hollow(noise_gram(a, params, labels.eta1, labels.eta2)));
    sq[s] = norm * norm;
  });
  const auto m = moments(sq);
  SecondMoment out;
  out.empirical = m.mean;
  out.std_error = m.std_error;
  out.reference = (1.0 + n1 * ln1 / n2) * n1 * n2 * params.p * params.p * ln1;
  out.ratio = out.reference > 0.0 ? out.empirical / out.reference : 0.0;
  return out;
}

HollowVsDebias hollow_vs_debias(const BsbmParams& params, std::size_t samples,
                                RngStream& rng, std::size_t threads) {
  if (samples == 0) throw InvalidArgument("samples must be positive");
  check_dense_size(params.n1());
  const auto labels = draw_labels(params, rng);
  const auto expected_diag = expected_gram_diag(params, labels.eta1, labels.eta2);
  const auto row_var = row_sqnorm_variance(params, labels.eta1, labels.eta2);

  HollowVsDebias out;
  out.samples = samples;
  out.row = static_cast<std::size_t>(
      std::max_element(row_var.begin(), row_var.end()) - row_var.begin());
  out.row_variance = row_var[out.row];
  out.per_row_variance_lower = 0.45 * static_cast<double>(params.n2()) * params.p;

  std::vector<double> hollow_sq(samples), debias_sq(samples), row_dev(samples);
  const Eigen::VectorXd ediag =
      Eigen::Map<const Eigen::VectorXd>(expected_diag.data(), Eigen::Index(expected_diag.size()));
  parallel_for(samples, threads, [&](std::size_t s) {
    auto stream = sample_stream(rng, s);
    const auto a = sample_adjacency(params, labels.eta1, labels.eta2, stream, true);
    Eigen::MatrixXd gram = noise_gram(a, params, labels.eta1, labels.eta2);
    const double h = spectral_norm_dense(hollow(gram));
    const double dev = gram(Eigen::Index(out.row), Eigen::Index(out.row)) -
                       expected_diag[out.row];
    gram.diagonal() -= ediag;
    const double d = spectral_norm_dense(gram);
    hollow_sq[s] = h * h;
    debias_sq[s] = d * d;
    row_dev[s] = dev * dev;
  });
  const auto hm = moments(hollow_sq);
  const auto dm = moments(debias_sq);
  const auto rm = moments(row_dev);
  out.hollow_moment = hm.mean;
  out.hollow_se = hm.std_error;
  out.debias_moment = dm.mean;
  out.debias_se = dm.std_error;
  out.row_variance_empirical = rm.mean;
  out.row_variance_se = rm.std_error;
  return out;
}

BinomialTail binomial_tail_lower(std::size_t n, double p, double t) {
  const double nd = static_cast<double>(n);
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0, 1)");
  if (!(nd * p < t && t < nd)) throw InvalidArgument("need n p < t < n");
  const auto k0 = static_cast<std::size_t>(std::ceil(t));
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_nfact = std::lgamma(nd + 1.0);
  double tail = 0.0;
  for (std::size_t k = k0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    const double log_pmf = log_nfact - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
                           kd * log_p + (nd - kd) * log_q;
    tail += std::exp(log_pmf);
  }
  BinomialTail out;
  out.exact_tail = tail;
  out.lower_bound = std::exp(-1.0 / 6.0) / std::sqrt(2.0 * M_PI * (t + 1.0)) *
                    std::exp(-(t + 1.0) * std::log((t + 1.0) / (nd * p)));
  return out;
}

double oracle_constant(double delta) {
  if (!(delta > 0.0 && delta < 2.0)) throw InvalidArgument("delta must lie in (0, 2)");
  return 1.0 / (50.0 * std::log(300.0 / (delta * (2.0 - delta))));
}

std::vector<OracleErrorPoint> oracle_impossibility_sweep(std::span<const std::size_t> n1_list,
                                                         double delta, std::size_t samples,
                                                         RngStream& rng, double p_multiplier,
                                                         std::size_t threads) {
  if (samples == 0) throw InvalidArgument("samples must be positive");
  const double c_delta = oracle_constant(delta);
  std::vector<OracleErrorPoint> out;
  for (std::size_t idx = 0; idx < n1_list.size(); ++idx) {
    const std::size_t n1 = n1_list[idx];
    if (n1 < 2) throw InvalidArgument("n1 must be at least 2");
    const double n1d = static_cast<double>(n1);
    const auto n2 = static_cast<std::size_t>(std::llround(n1d * std::log(n1d)));
    BsbmParams params;
    params.n1_plus = (n1 + 1) / 2;
    params.n1_minus = n1 - params.n1_plus;
    params.n2_plus = (n2 + 1) / 2;
    params.n2_minus = n2 - params.n2_plus;
    params.delta = delta;
    params.p = p_multiplier *
               std::sqrt(c_delta * std::log(n1d) / (n1d * static_cast<double>(n2)));
    params.validate();

    std::vector<double> errors(samples);
    const RngStream base(rng.master_seed(), StreamId{idx, 0, rng.id().substream});
    parallel_for(samples, threads, [&](std::size_t s) {
      auto stream = sample_stream(base, s);
      const auto inst = sample_bsbm(params, stream);
      const auto est = oracle_estimator(inst.adjacency, params.p, inst.eta1);
      std::size_t wrong = 0;
      for (std::size_t i = 0; i < n1; ++i) wrong += est.eta_hat[i] != inst.eta1[i];
      errors[s] = static_cast<double>(wrong);
    });
    const auto m = moments(errors);
    OracleErrorPoint pt;
    pt.n1 = n1;
    pt.n2 = n2;
    pt.p = params.p;
    pt.expected_errors = m.mean;
    pt.std_error = m.std_error;
    pt.samples = samples;
    out.push_back(pt);
  }
  return out;
}

void write_check_csv(std::ostream& out, std::span<const CheckRow> rows) {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  out << "check_name,config_json,t_or_n1,empirical,bound_or_reference,slack,verdict\n";
  for (const auto& r : rows) {
    out << r.check_name << ',' << quote(r.config_json) << ',' << fmt(r.t_or_n1) << ','
        << fmt(r.empirical) << ',' << fmt(r.bound_or_reference) << ',' << fmt(r.slack) << ','
        << r.verdict << '\n';
  }
}

}  // namespace bsbm::bench
