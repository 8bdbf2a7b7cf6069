#include "bsbm/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bsbm/errors.hpp"
#include "bsbm/metrics.hpp"
#include "bsbm/parallel.hpp"

namespace bsbm {

namespace {

// Pilot scans use their own grid keys so they never reuse a main-run stream.
constexpr std::uint64_t kPilotGridBase = std::uint64_t{1} << 40;

double pick(const std::vector<double>& v, std::size_t i) {
  return v.size() == 1 ? v[0] : v[i];
}

struct MethodResult {
  bool exact = false;
  bool degenerate = false;
  double fraction = 0.5;
  std::size_t lloyd_iters = 0;
  double ms = 0.0;
};

// One replication: sample an instance and run every method on it.
void run_replication(const BsbmParams& params, std::span<const Method> methods,
                     std::uint64_t seed, std::uint64_t grid_index, std::uint64_t rep,
                     bool timed, MethodResult* out) {
  RngStream instance_rng(seed, {grid_index, rep, 0});
  BsbmSample s = sample_bsbm(params, instance_rng);
  const GroundTruth truth{params, s.eta1, s.eta2};
  for (std::size_t k = 0; k < methods.size(); ++k) {
    RngStream solver_rng(seed, {grid_index, rep, 1 + static_cast<std::uint64_t>(methods[k])});
    EstimatorConfig cfg;
    cfg.method = methods[k];
    MethodResult& r = out[k];
    const auto start = std::chrono::steady_clock::now();
    try {
      RecoveryOutcome o = run_method(s.adjacency, cfg, &truth, solver_rng);
      const RecoveryClass c = recovery_class(s.eta1, o.eta_hat);
      r.exact = c.exact;
      r.fraction = c.fraction;
      r.lloyd_iters = o.lloyd_trace.size();
    } catch (const DegenerateInput&) {
      r = MethodResult{};
      r.degenerate = true;
    }
    if (timed) {
      r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                 .count();
    }
  }
}

// Success rates per method at one (a, b) point; used by the pilot scan.
std::vector<double> success_rates(const BsbmParams& params, std::span<const Method> methods,
                                  std::size_t reps, std::uint64_t seed,
                                  std::uint64_t grid_index, std::size_t threads) {
  std::vector<MethodResult> slots(reps * methods.size());
  parallel_for(reps, threads, [&](std::size_t r) {
    run_replication(params, methods, seed, grid_index, r, false, &slots[r * methods.size()]);
  });
  std::vector<double> rates(methods.size(), 0.0);
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t k = 0; k < methods.size(); ++k)
      rates[k] += slots[r * methods.size() + k].exact ? 1.0 : 0.0;
  for (double& x : rates) x /= static_cast<double>(reps);
  return rates;
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::vector<double> scalar_or_array(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

}  // namespace

void ExperimentGrid::validate() const {
  if (n1 < 2) throw InvalidArgument("n1 must be at least 2");
  if (b_values.empty()) throw InvalidArgument("b_values must not be empty");
  for (double b : b_values)
    if (!(b > 0.0) || !std::isfinite(b)) throw InvalidArgument("b values must be positive");
  if (a_min.empty() != a_max.empty())
    throw InvalidArgument("a_min and a_max must be given together");
  for (const auto* v : {&a_min, &a_max})
    if (!v->empty() && v->size() != 1 && v->size() != b_values.size())
      throw InvalidArgument("a_min/a_max need one value or one per b value");
  if (a_points < 2) throw InvalidArgument("a_points must be at least 2");
  if (replications < 1) throw InvalidArgument("replications must be at least 1");
  if (threads < 1) throw InvalidArgument("threads must be at least 1");
  if (methods.empty()) throw InvalidArgument("methods must not be empty");
  std::set<Method> seen(methods.begin(), methods.end());
  if (seen.size() != methods.size()) throw InvalidArgument("methods contain duplicates");
  if (a_min.empty()) {
    if (pilot_replications < 1) throw InvalidArgument("pilot_replications must be at least 1");
    return;
  }
  for (std::size_t bi = 0; bi < b_values.size(); ++bi) {
    const double lo = pick(a_min, bi), hi = pick(a_max, bi);
    if (!(lo > 0.0)) throw InvalidArgument("a_min must be positive");
    if (!(lo < hi)) throw InvalidArgument("a_min must be smaller than a_max");
    for (double a : a_grid(bi)) params_from_experiment(n1, gamma1, gamma2, delta, a, b_values[bi]);
  }
}

std::vector<double> ExperimentGrid::a_grid(std::size_t b_index) const {
  const double lo = pick(a_min, b_index), hi = pick(a_max, b_index);
  std::vector<double> out(a_points);
  for (std::size_t k = 0; k < a_points; ++k)
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(a_points - 1);
  out.back() = hi;
  return out;
}

ExperimentGrid grid_from_json(const std::string& text) {
  static const std::set<std::string> known{
      "n1",          "gamma1",     "gamma2",  "delta",       "b_values",
      "a_min",       "a_max",      "a_points", "replications", "methods",
      "master_seed", "threads",    "record_wall_time", "pilot_replications"};
  static const char* required[] = {"n1",       "gamma1",       "gamma2",  "delta",
                                   "b_values", "replications", "methods", "master_seed"};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw InvalidArgument("unknown config key '" + key + "'");
  for (const char* key : required)
    if (!j.contains(key)) throw InvalidArgument(std::string("missing config key '") + key + "'");

  ExperimentGrid g;
  try {
    g.n1 = j.at("n1").get<std::size_t>();
    g.gamma1 = j.at("gamma1").get<double>();
    g.gamma2 = j.at("gamma2").get<double>();
    g.delta = j.at("delta").get<double>();
    g.b_values = j.at("b_values").get<std::vector<double>>();
    g.a_min = scalar_or_array(j, "a_min");
    g.a_max = scalar_or_array(j, "a_max");
    g.a_points = get_or<std::size_t>(j, "a_points", g.a_points);
    g.replications = j.at("replications").get<std::size_t>();
    g.methods.clear();
    for (const auto& m : j.at("methods")) g.methods.push_back(parse_method(m.get<std::string>()));
    g.master_seed = j.at("master_seed").get<std::uint64_t>();
    g.threads = get_or<std::size_t>(j, "threads", 1);
    g.record_wall_time = get_or<bool>(j, "record_wall_time", false);
    g.pilot_replications = get_or<std::size_t>(j, "pilot_replications", g.pilot_replications);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  g.validate();
  return g;
}

ExperimentGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return grid_from_json(ss.str());
}

std::pair<double, double> scan_bracket(double center, std::size_t methods,
                                       const RateProbe& probe) {
  if (methods == 0) throw InvalidArgument("pilot needs at least one method");
  constexpr int kSteps = 24;  // six decades in quarter-decade steps
  constexpr int kRefine = 4;  // sub-steps per quarter decade near the ends

  std::vector<double> as;
  std::vector<std::vector<double>> rates;
  std::vector<bool> done(methods, false);
  for (int k = 0; k <= kSteps; ++k) {
    const double a = center * std::pow(10.0, -3.0 + 0.25 * k);
    auto r = probe(a);
    if (!r) {
      if (as.empty()) continue;  // too sparse for the model: keep scanning up
      break;                     // p too large: nothing left to scan
    }
    if (r->size() != methods) throw InvalidArgument("probe returned the wrong number of rates");
    as.push_back(a);
    rates.push_back(std::move(*r));
    for (std::size_t m = 0; m < methods; ++m) done[m] = done[m] || rates.back()[m] >= 0.95;
    if (std::all_of(done.begin(), done.end(), [](bool d) { return d; })) break;
  }

  // Methods whose success actually moves across the scan.
  std::vector<std::size_t> active;
  for (std::size_t m = 0; m < methods; ++m) {
    const bool low = std::all_of(rates.begin(), rates.end(),
                                 [m](const auto& r) { return r[m] <= 0.05; });
    const bool high = std::all_of(rates.begin(), rates.end(),
                                  [m](const auto& r) { return r[m] >= 0.95; });
    if (!rates.empty() && !low && !high) active.push_back(m);
  }
  if (active.empty()) throw NoTransitionFound("success rate is flat over six decades of a");
  auto all_low = [&](const std::vector<double>& r) {
    return std::all_of(active.begin(), active.end(), [&](std::size_t m) { return r[m] <= 0.05; });
  };
  auto all_high = [&](const std::vector<double>& r) {
    return std::all_of(active.begin(), active.end(), [&](std::size_t m) { return r[m] >= 0.95; });
  };

  // Coarse ends: last scan point where every active method fails, first
  // point where every active method succeeds.
  std::size_t lo_i = 0, hi_i = as.size() - 1;
  bool has_lo = false, has_hi = false;
  for (std::size_t i = 0; i < as.size(); ++i) {
    if (all_high(rates[i])) {
      hi_i = i;
      has_hi = true;
      break;
    }
  }
  for (std::size_t i = 0; i <= hi_i; ++i) {
    if (all_low(rates[i])) {
      lo_i = i;
      has_lo = true;
    }
  }
  double lo = as[lo_i], hi = as[hi_i];

  const double step = std::pow(10.0, 0.25 / kRefine);
  if (has_lo && lo_i + 1 < as.size()) {
    for (int s = 1; s < kRefine; ++s) {
      const double a = as[lo_i] * std::pow(step, s);
      const auto r = probe(a);
      if (!r || !all_low(*r)) break;
      lo = a;
    }
  }
  if (has_hi && hi_i > 0) {
    for (int s = 1; s < kRefine; ++s) {
      const double a = as[hi_i] / std::pow(step, s);
      if (a <= lo) break;
      const auto r = probe(a);
      if (!r || !all_high(*r)) break;
      hi = a;
    }
  }
  return {lo / 1.2, hi * 1.2};
}

std::pair<double, double> pilot_bracket(std::size_t n1, double gamma1, double gamma2,
                                        double delta, double b, std::size_t replications,
                                        const PilotOptions& opts) {
  if (replications < 1) throw InvalidArgument("pilot needs at least one replication");
  std::uint64_t next_key = kPilotGridBase;
  auto params_at = [&](double a) -> std::optional<BsbmParams> {
    try {
      return params_from_experiment(n1, gamma1, gamma2, delta, a, b);
    } catch (const InvalidArgument&) {
      return std::nullopt;
    }
  };
  const RateProbe probe = [&](double a) -> std::optional<std::vector<double>> {
    const auto params = params_at(a);
    if (!params) return std::nullopt;
    return success_rates(*params, opts.methods, replications, opts.seed, next_key++,
                         opts.threads);
  };
  std::pair<double, double> bracket;
  try {
    bracket = scan_bracket(std::max(b, b * b), opts.methods.size(), probe);
  } catch (const NoTransitionFound&) {
    throw NoTransitionFound("success rate is flat over six decades of a at b = " +
                            format_number(b));
  }
  // The upper margin must not leave the model's domain.
  if (!params_at(bracket.second)) bracket.second /= 1.2;
  return bracket;
}

std::vector<ResultRow> run_grid(ExperimentGrid grid) {
  grid.validate();
  if (grid.a_min.empty()) {
    PilotOptions opts{grid.methods, grid.master_seed, grid.threads};
    for (double b : grid.b_values) {
      auto [lo, hi] = pilot_bracket(grid.n1, grid.gamma1, grid.gamma2, grid.delta, b,
                                    grid.pilot_replications, opts);
      grid.a_min.push_back(lo);
      grid.a_max.push_back(hi);
    }
    grid.validate();
  }

  const std::size_t nm = grid.methods.size();
  const std::size_t points = grid.b_values.size() * grid.a_points;
  std::vector<BsbmParams> params(points);
  std::vector<double> a_values(points);
  for (std::size_t bi = 0; bi < grid.b_values.size(); ++bi) {
    const auto as = grid.a_grid(bi);
    for (std::size_t ai = 0; ai < grid.a_points; ++ai) {
      const std::size_t g = bi * grid.a_points + ai;
      a_values[g] = as[ai];
      params[g] = params_from_experiment(grid.n1, grid.gamma1, grid.gamma2, grid.delta, as[ai],
                                         grid.b_values[bi]);
    }
  }

  const std::size_t reps = grid.replications;
  std::vector<MethodResult> slots(points * reps * nm);
  parallel_for(points * reps, grid.threads, [&](std::size_t task) {
    const std::size_t g = task / reps, r = task % reps;
    run_replication(params[g], grid.methods, grid.master_seed, g, r, grid.record_wall_time,
                    &slots[task * nm]);
  });

  std::vector<ResultRow> rows;
  rows.reserve(points * nm);
  for (std::size_t g = 0; g < points; ++g) {
    for (std::size_t k = 0; k < nm; ++k) {
      ResultRow row;
      row.b = grid.b_values[g / grid.a_points];
      row.a = a_values[g];
      row.p = params[g].p;
      row.n2 = params[g].n2();
      row.method = grid.methods[k];
      row.replications = reps;
      std::size_t exact = 0, iters = 0;
      double fraction = 0.0, ms = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const MethodResult& m = slots[(g * reps + r) * nm + k];
        exact += m.exact;
        fraction += m.fraction;
        iters += m.lloyd_iters;
        ms += m.ms;
        row.degenerate += m.degenerate;
      }
      const double n = static_cast<double>(reps);
      row.exact_rate = static_cast<double>(exact) / n;
      row.mean_fraction = fraction / n;
      row.mean_lloyd_iters = static_cast<double>(iters) / n;
      row.wall_ms = ms;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << kResultCsvHeader << '\n';
  for (const auto& r : rows) {
    out << format_number(r.b) << ',' << format_number(r.a) << ',' << format_number(r.p) << ','
        << r.n2 << ',' << method_name(r.method) << ',' << r.replications << ','
        << format_number(r.exact_rate) << ',' << format_number(r.mean_fraction) << ','
        << format_number(r.mean_lloyd_iters) << ',' << format_number(r.wall_ms) << '\n';
  }
}

}  // namespace bsbm
