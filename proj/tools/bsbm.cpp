// Command-line front end: generate, recover, experiment, concentration, plot.
//
// Exit codes: 0 ok, 2 usage or invalid parameters, 3 I/O or malformed input
// files, 4 degenerate input. Errors go to stderr as one JSON line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bsbm/concentration.hpp"
#include "bsbm/errors.hpp"
#include "bsbm/estimators.hpp"
#include "bsbm/experiment.hpp"
#include "bsbm/io.hpp"
#include "bsbm/metrics.hpp"
#include "bsbm/model.hpp"
#include "bsbm/plot.hpp"

using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kIo = 3, kDegenerate = 4 };

int fail(Exit code, const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"exit", static_cast<int>(code)}, {"message", message}}.dump()
            << '\n';
  return code;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bsbm::IoError("cannot open '" + path + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw bsbm::IoError("failed writing '" + path + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bsbm::IoError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw bsbm::InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
}

// --threads, then BSBM_THREADS, then the fallback.
std::size_t resolve_threads(const std::optional<std::size_t>& flag, std::size_t fallback) {
  if (flag) {
    if (*flag < 1) throw bsbm::InvalidArgument("--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("BSBM_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw bsbm::InvalidArgument("BSBM_THREADS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  return fallback;
}

// ---- generate ----

struct GenerateArgs {
  std::size_t n1 = 0, n2 = 0;
  double gamma1 = 0.0, gamma2 = 0.0, delta = 0.0, p = 0.0;
  std::uint64_t seed = 0;
  std::string out_matrix, out_labels1, out_labels2;
};

void run_generate(const GenerateArgs& g) {
  const auto params = bsbm::params_from_sizes(g.n1, g.n2, g.gamma1, g.gamma2, g.delta, g.p);
  bsbm::RngStream rng(g.seed);
  const auto s = bsbm::sample_bsbm(params, rng);
  bsbm::io::write_matrix_market(g.out_matrix, s.adjacency);
  bsbm::io::write_labels(g.out_labels1, s.eta1);
  bsbm::io::write_labels(g.out_labels2, s.eta2);
}

// ---- recover ----

struct RecoverArgs {
  std::string matrix, method, out;
  std::optional<std::string> labels1, labels2, truth;
  std::optional<double> p, delta;
  std::uint64_t seed = 0;
};

void run_recover(const RecoverArgs& r) {
  const bsbm::Method method = bsbm::parse_method(r.method);
  const bool needs_truth = bsbm::uses_ground_truth(method);
  const bool is_ds = method == bsbm::Method::DebiasedSpectral;
  if (needs_truth) {
    if (!r.labels1 || !r.p)
      throw bsbm::InvalidArgument(std::string(bsbm::method_name(method)) +
                                  " requires --labels1 and --p");
    if (is_ds && (!r.labels2 || !r.delta))
      throw bsbm::InvalidArgument("DS also requires --labels2 and --delta");
    if (!is_ds && (r.labels2 || r.delta))
      throw bsbm::InvalidArgument("--labels2/--delta are only accepted with DS");
  } else if (r.labels1 || r.labels2 || r.p || r.delta) {
    throw bsbm::InvalidArgument(std::string(bsbm::method_name(method)) +
                                " does not accept --labels1/--labels2/--p/--delta");
  }

  const auto a = bsbm::io::read_matrix_market(r.matrix);
  std::optional<bsbm::GroundTruth> truth;
  if (needs_truth) {
    bsbm::GroundTruth t;
    t.eta1 = bsbm::io::read_labels(*r.labels1);
    if (t.eta1.size() != a.n1()) throw bsbm::InvalidArgument("--labels1 length does not match n1");
    if (is_ds) {
      t.eta2 = bsbm::io::read_labels(*r.labels2);
      if (t.eta2.size() != a.n2())
        throw bsbm::InvalidArgument("--labels2 length does not match n2");
    } else {
      t.eta2 = bsbm::LabelVector(std::vector<int>(a.n2(), 1));
    }
    t.params.n1_plus = t.eta1.plus_count();
    t.params.n1_minus = a.n1() - t.params.n1_plus;
    t.params.n2_plus = t.eta2.plus_count();
    t.params.n2_minus = a.n2() - t.params.n2_plus;
    t.params.delta = r.delta.value_or(1.0);
    t.params.p = *r.p;
    if (is_ds) {
      t.params.validate();
    } else if (!(*r.p >= 0.0 && *r.p < 0.5)) {
      throw bsbm::InvalidArgument("--p must lie in [0, 1/2)");
    }
    truth = std::move(t);
  }
  std::optional<bsbm::LabelVector> score_labels;
  if (r.truth) {
    score_labels = bsbm::io::read_labels(*r.truth);
    if (score_labels->size() != a.n1()) throw bsbm::InvalidArgument("--truth length does not match n1");
  } else if (truth) {
    score_labels = truth->eta1;
  }

  bsbm::EstimatorConfig cfg;
  cfg.method = method;
  bsbm::RngStream rng(r.seed);
  auto outcome = bsbm::run_method(a, cfg, truth ? &*truth : nullptr, rng);
  bsbm::io::write_labels(r.out, outcome.eta_hat);

  json summary{{"method", bsbm::method_name(method)},
               {"n1", a.n1()},
               {"n2", a.n2()},
               {"nnz", a.nnz()},
               {"p_hat", bsbm::estimate_p(a)},
               {"lloyd_iters", outcome.lloyd_trace.size()},
               {"degenerate_gap", outcome.degenerate_gap},
               {"out", r.out}};
  if (score_labels) {
    bsbm::score(outcome, *score_labels);
    summary["loss_r"] = *outcome.loss_r;
    summary["exact"] = outcome.exact;
  }
  std::cout << summary.dump() << '\n';
}

// ---- experiment ----

void run_experiment(const std::string& config, const std::string& out_path,
                    const std::optional<std::size_t>& threads) {
  auto grid = bsbm::load_grid(config);
  grid.threads = resolve_threads(threads, grid.threads);
  const auto rows = bsbm::run_grid(grid);

  auto out = open_out(out_path);
  bsbm::write_results_csv(out, rows);
  close_out(out, out_path);

  json truth_channel = json::array();
  for (auto m : grid.methods)
    if (bsbm::uses_ground_truth(m)) truth_channel.push_back(bsbm::method_name(m));
  json degenerate = json::array();
  std::size_t total_degenerate = 0;
  for (const auto& r : rows) {
    if (!r.degenerate) continue;
    total_degenerate += r.degenerate;
    degenerate.push_back(json{{"b", r.b}, {"a", r.a}, {"method", bsbm::method_name(r.method)},
                              {"count", r.degenerate}});
  }
  json brackets = json::array();
  for (double b : grid.b_values) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& r : rows)
      if (r.b == b) {
        lo = first ? r.a : std::min(lo, r.a);
        hi = first ? r.a : std::max(hi, r.a);
        first = false;
      }
    brackets.push_back(json{{"b", b}, {"a_min", lo}, {"a_max", hi}});
  }
  json meta{{"master_seed", grid.master_seed},
            {"replications", grid.replications},
            {"truth_channel", truth_channel},
            {"a_ranges", brackets},
            {"degenerate", degenerate}};
  const std::string meta_path = out_path + ".meta.json";
  auto meta_out = open_out(meta_path);
  meta_out << meta.dump(2) << '\n';
  close_out(meta_out, meta_path);
  if (total_degenerate)
    std::cerr << json{{"warning", "degenerate_input"}, {"count", total_degenerate}}.dump() << '\n';
}

// ---- concentration ----

template <class T>
T value_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

bsbm::BsbmParams bench_params(const json& c) {
  return bsbm::params_from_sizes(c.at("n1").get<std::size_t>(), c.at("n2").get<std::size_t>(),
                                 value_or(c, "gamma1", 0.0), value_or(c, "gamma2", 0.0),
                                 c.at("delta").get<double>(), c.at("p").get<double>());
}

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

std::vector<bsbm::bench::CheckRow> run_concentration_mode(const std::string& mode, const json& c,
                                                          std::size_t threads) {
  using bsbm::bench::CheckRow;
  std::vector<CheckRow> rows;
  const std::uint64_t seed = value_or<std::uint64_t>(c, "seed", 0);
  bsbm::RngStream rng(seed);
  if (mode == "bernstein") {
    const auto params = bench_params(c);
    std::vector<double> ts;
    if (c.contains("t_grid")) {
      ts = c.at("t_grid").get<std::vector<double>>();
    } else {
      const double t_max = c.at("t_max").get<double>();
      const auto points = value_or<std::size_t>(c, "t_points", 10);
      if (points < 2) throw bsbm::InvalidArgument("t_points must be at least 2");
      for (std::size_t k = 0; k < points; ++k) ts.push_back(t_max * k / double(points - 1));
    }
    const auto samples = value_or<std::size_t>(c, "samples", 2000);
    const std::string cfg = json{{"n1", params.n1()}, {"n2", params.n2()}, {"p", params.p},
                                 {"delta", params.delta}, {"samples", samples}}.dump();
    for (const auto& e : bsbm::bench::bernstein_tail_check(params, ts, samples, rng, threads))
      rows.push_back({"bernstein_tail", cfg, e.t, e.empirical_prob, e.bound, e.slack,
                      verdict(e.pass)});
  } else if (mode == "hollow-vs-debias") {
    const auto params = bench_params(c);
    const auto samples = value_or<std::size_t>(c, "samples", 300);
    const auto r = bsbm::bench::hollow_vs_debias(params, samples, rng, threads);
    const std::string cfg = json{{"n1", params.n1()}, {"n2", params.n2()}, {"p", params.p},
                                 {"delta", params.delta}, {"samples", samples}}.dump();
    const double n1 = static_cast<double>(params.n1());
    const double gap_slack = 3.0 * std::hypot(r.hollow_se, r.debias_se);
    rows.push_back({"hollow_below_debias", cfg, n1, r.hollow_moment, r.debias_moment, gap_slack,
                    verdict(r.hollow_moment < r.debias_moment)});
    const double chain_ref = 0.5 * r.row_variance_empirical - r.hollow_moment;
    const double chain_slack =
        3.0 * std::sqrt(r.debias_se * r.debias_se + 0.25 * r.row_variance_se * r.row_variance_se +
                        r.hollow_se * r.hollow_se);
    rows.push_back({"proof_chain", cfg, n1, r.debias_moment, chain_ref, chain_slack,
                    verdict(r.debias_moment >= chain_ref - chain_slack)});
    rows.push_back({"row_variance", cfg, n1, r.row_variance_empirical, r.row_variance,
                    3.0 * r.row_variance_se,
                    verdict(std::abs(r.row_variance_empirical - r.row_variance) <=
                            3.0 * r.row_variance_se)});
    rows.push_back({"row_variance_lower", cfg, n1, r.row_variance, r.per_row_variance_lower, 0.0,
                    verdict(r.row_variance >= r.per_row_variance_lower)});
  } else if (mode == "binomial-tail") {
    for (const auto& tc : c.at("cases")) {
      const auto n = tc.at(0).get<std::size_t>();
      const double p = tc.at(1).get<double>(), t = tc.at(2).get<double>();
      const auto b = bsbm::bench::binomial_tail_lower(n, p, t);
      rows.push_back({"binomial_tail", json{{"n", n}, {"p", p}}.dump(), t, b.exact_tail,
                      b.lower_bound, 0.0, verdict(b.lower_bound <= b.exact_tail)});
    }
  } else if (mode == "oracle-impossibility") {
    const auto n1s = c.at("n1_list").get<std::vector<std::size_t>>();
    const double delta = c.at("delta").get<double>();
    const auto samples = value_or<std::size_t>(c, "samples", 400);
    const auto multipliers = value_or<std::vector<double>>(c, "p_multipliers", {1.0});
    std::vector<std::vector<bsbm::bench::OracleErrorPoint>> sweeps;
    for (double m : multipliers) {
      bsbm::RngStream sweep_rng(seed);
      sweeps.push_back(bsbm::bench::oracle_impossibility_sweep(n1s, delta, samples, sweep_rng, m,
                                                               threads));
    }
    std::optional<std::size_t> base;
    for (std::size_t k = 0; k < multipliers.size(); ++k)
      if (multipliers[k] == 1.0) base = k;
    for (std::size_t k = 0; k < multipliers.size(); ++k) {
      for (std::size_t i = 0; i < n1s.size(); ++i) {
        const auto& e = sweeps[k][i];
        const std::string cfg = json{{"n1", e.n1}, {"n2", e.n2}, {"p", e.p}, {"delta", delta},
                                     {"p_multiplier", multipliers[k]}, {"samples", e.samples}}
                                    .dump();
        if (k == base) {
          rows.push_back({"oracle_errors_positive", cfg, double(e.n1), e.expected_errors, 0.0,
                          3.0 * e.std_error, verdict(e.expected_errors > 0.0)});
        } else if (base) {
          const double ref = sweeps[*base][i].expected_errors / 5.0;
          rows.push_back({"oracle_contrast_5x", cfg, double(e.n1), e.expected_errors, ref,
                          3.0 * e.std_error, verdict(e.expected_errors <= ref)});
        } else {
          rows.push_back({"oracle_errors", cfg, double(e.n1), e.expected_errors, 0.0,
                          3.0 * e.std_error, "INFO"});
        }
      }
    }
  } else {
    throw bsbm::InvalidArgument("unknown concentration mode '" + mode + "'");
  }
  return rows;
}

void run_concentration(const std::string& mode, const std::string& config,
                       const std::string& out_path, const std::optional<std::size_t>& threads) {
  const json c = read_json_file(config);
  if (!c.is_object()) throw bsbm::InvalidArgument("config must be a JSON object");
  std::vector<bsbm::bench::CheckRow> rows;
  try {
    rows = run_concentration_mode(mode, c, resolve_threads(threads, value_or<std::size_t>(c, "threads", 1)));
  } catch (const json::exception& e) {
    throw bsbm::InvalidArgument(std::string("bad config value: ") + e.what());
  }
  auto out = open_out(out_path);
  bsbm::bench::write_check_csv(out, rows);
  close_out(out, out_path);
}

// ---- plot ----

void run_plot(const std::string& in_path, const std::string& out_path,
              const bsbm::plot::PlotSpec& spec) {
  std::ifstream in(in_path);
  if (!in) throw bsbm::IoError("cannot open '" + in_path + "'");
  const auto table = bsbm::plot::read_csv(in);
  const std::string svg = bsbm::plot::render_svg(table, spec);
  auto out = open_out(out_path);
  out << svg;
  close_out(out, out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bipartite stochastic block model: simulation, recovery and benches"};
  app.require_subcommand(1, 1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample an instance and write it to disk");
  generate->add_option("--n1", gen.n1)->required();
  generate->add_option("--n2", gen.n2)->required();
  generate->add_option("--gamma1", gen.gamma1)->default_val(0.0);
  generate->add_option("--gamma2", gen.gamma2)->default_val(0.0);
  generate->add_option("--delta", gen.delta)->required();
  generate->add_option("--p", gen.p)->required();
  generate->add_option("--seed", gen.seed)->default_val(0);
  generate->add_option("--out-matrix", gen.out_matrix)->required();
  generate->add_option("--out-labels1", gen.out_labels1)->required();
  generate->add_option("--out-labels2", gen.out_labels2)->required();

  RecoverArgs rec;
  auto* recover = app.add_subcommand("recover", "Estimate the labels of the first vertex set");
  recover->add_option("--matrix", rec.matrix)->required();
  recover->add_option("--method", rec.method)->required();
  recover->add_option("--labels1", rec.labels1, "true labels (O, DS)");
  recover->add_option("--labels2", rec.labels2, "true second-set labels (DS)");
  recover->add_option("--p", rec.p, "true edge scale (O, DS)");
  recover->add_option("--delta", rec.delta, "true contrast (DS)");
  recover->add_option("--truth", rec.truth, "labels used only to score the output");
  recover->add_option("--seed", rec.seed)->default_val(0);
  recover->add_option("--out", rec.out)->required();

  std::string config, out_path, mode, in_path;
  std::optional<std::size_t> threads;
  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo grid");
  experiment->add_option("--config", config)->required();
  experiment->add_option("--out", out_path)->required();
  experiment->add_option("--threads", threads);

  auto* concentration = app.add_subcommand("concentration", "Concentration and tail checks");
  concentration->add_option("--mode", mode)
      ->required()
      ->check(CLI::IsMember({"bernstein", "hollow-vs-debias", "binomial-tail",
                             "oracle-impossibility"}));
  concentration->add_option("--config", config)->required();
  concentration->add_option("--out", out_path)->required();
  concentration->add_option("--threads", threads);

  bsbm::plot::PlotSpec spec;
  auto* plot = app.add_subcommand("plot", "Render a results CSV as SVG line charts");
  plot->add_option("--in", in_path)->required();
  plot->add_option("--out", out_path)->required();
  plot->add_option("--x", spec.x)->default_val("a");
  plot->add_option("--y", spec.y)->default_val("exact_rate");
  plot->add_option("--series", spec.series)->default_val("method");
  plot->add_option("--facet", spec.facet)->default_val("b");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  try {
    if (*generate) run_generate(gen);
    else if (*recover) run_recover(rec);
    else if (*experiment) run_experiment(config, out_path, threads);
    else if (*concentration) run_concentration(mode, config, out_path, threads);
    else if (*plot) run_plot(in_path, out_path, spec);
  } catch (const bsbm::InvalidArgument& e) {
    return fail(kUsage, "invalid_argument", e.what());
  } catch (const bsbm::IoError& e) {
    return fail(kIo, "io", e.what());
  } catch (const bsbm::ParseError& e) {
    return fail(kIo, "parse", e.what());
  } catch (const bsbm::DegenerateInput& e) {
    return fail(kDegenerate, "degenerate_input", e.what());
  } catch (const bsbm::NoTransitionFound& e) {
    return fail(kDegenerate, "no_transition", e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
  return kOk;
}
