#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bsbm/estimators.hpp"

namespace bsbm {

/// Monte Carlo sweep over the (b, a) grid with p = sqrt(a)/n1 and
/// n2 = round(n1 ln(n1) / b).
struct ExperimentGrid {
  std::size_t n1 = 300;
  double gamma1 = 0.0;
  double gamma2 = 0.5;
  double delta = 0.5;
  std::vector<double> b_values;
  // One entry per b value, or a single entry shared by all. Empty means
  // "bracket automatically with pilot_bracket".
  std::vector<double> a_min;
  std::vector<double> a_max;
  std::size_t a_points = 20;
  std::size_t replications = 1000;
  std::vector<Method> methods;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
  // Optional extras.
  bool record_wall_time = false;  // wall_ms is 0 unless set
  std::size_t pilot_replications = 40;

  // Throws InvalidArgument on violated invariants.
  void validate() const;
  std::vector<double> a_grid(std::size_t b_index) const;
};

// Parses the JSON config; unknown keys are rejected.
ExperimentGrid grid_from_json(const std::string& text);
ExperimentGrid load_grid(const std::string& path);

struct ResultRow {
  double b = 0.0;
  double a = 0.0;
  double p = 0.0;
  std::size_t n2 = 0;
  Method method = Method::HollowedLloyd;
  std::size_t replications = 0;
  double exact_rate = 0.0;
  double mean_fraction = 0.0;
  double mean_lloyd_iters = 0.0;
  double wall_ms = 0.0;
  // Not part of the CSV: replications where the method hit DegenerateInput
  // (scored as not exact with fraction 1/2).
  std::size_t degenerate = 0;
};

/// Runs every selected method on each sampled instance. Instance and solver
/// streams are keyed by (seed, grid index, replication), so the rows do not
/// depend on grid.threads. Fills in pilot brackets when a_min/a_max are empty.
std::vector<ResultRow> run_grid(ExperimentGrid grid);

inline constexpr const char* kResultCsvHeader =
    "b,a,p,n2,method,replications,exact_rate,mean_fraction,mean_lloyd_iters,wall_ms";

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);

struct PilotOptions {
  std::vector<Method> methods{Method::HollowedLloyd};
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Geometric scan of a over six decades around max(b, b^2) in quarter-decade
/// steps, refined near both ends. The bracket runs from the last a where every
/// non-flat method has success <= 0.05 to the first a where all of them reach
/// 0.95, widened by 20% on each side. Throws NoTransitionFound when every
/// method is flat.
std::pair<double, double> pilot_bracket(std::size_t n1, double gamma1, double gamma2,
                                        double delta, double b, std::size_t replications,
                                        const PilotOptions& opts = {});

// Success rate per method at a, or nullopt when a is outside the model.
using RateProbe = std::function<std::optional<std::vector<double>>(double a)>;

/// The search behind pilot_bracket, driven by an arbitrary probe.
std::pair<double, double> scan_bracket(double center, std::size_t methods,
                                       const RateProbe& probe);

// Number formatting shared by the CSV writers (locale-independent).
std::string format_number(double x);

}  // namespace bsbm
