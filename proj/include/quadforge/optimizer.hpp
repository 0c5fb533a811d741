#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadforge/polyspace.hpp"
#include "quadforge/quadrature.hpp"

namespace quadforge {

/// Hyperparameters of the restarted gradient search.
struct SearchConfig {
  double learning_rate = 1e-2;
  long max_inner_iterations = 1'000'000;
  long max_restarts_per_q = 500;
  /// Threshold on L^2 (not L); see README.
  double convergence_threshold = 1e-22;
  long stagnation_window = 100;
  double stagnation_epsilon = 1e-23;
  double yogi_beta1 = 0.9;
  double yogi_beta2 = 0.999;
  double yogi_epsilon = 1e-3;
  std::uint64_t base_seed = 0;
  bool enforce_feasibility = true;

  /// Starting q; the dimension-counting lower bound when unset.
  std::optional<long> start_q;
  /// Number of q increments allowed after the starting q.
  long max_q_increments = 8;
  /// OpenMP worker count; 0 uses the runtime default.
  int threads = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct OptimizerState {
  std::vector<double> parameters;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step_count = 0;

  static OptimizerState fresh(std::vector<double> parameters);
};

/// Counter-based uniform(0,1) stream: the value at `counter` depends only on
/// (seed, counter).
double uniform_open01(std::uint64_t seed, std::uint64_t counter);

/// Uniform random coordinates and weights, weights normalised to sum to one.
QuadratureRule initialize_rule(int dim, long q, std::uint64_t seed);

/// One Yogi update in place. Returns false (state untouched) when the gradient
/// has a non-finite component.
bool yogi_step(OptimizerState& state, std::span<const double> gradient, const SearchConfig& config);

enum class RestartOutcome { converged, stagnated, iteration_cap, infeasible, diverged, cancelled };

std::string to_string(RestartOutcome o);

struct RestartResult {
  RestartOutcome outcome;
  QuadratureRule rule;
  double best_L_squared = 0.0;
  double final_L_squared = 0.0;
  long iterations_used = 0;
};

/// Optional hooks for run_restart: external cancellation and a per-iteration
/// observer of the best-so-far L^2 (used by tests).
struct RestartControl {
  /// Abort once *cancel_below drops below restart_index.
  const std::atomic<long>* cancel_below = nullptr;
  long restart_index = 0;
  std::vector<double>* best_history = nullptr;
};

/// Gradient descent from an explicit starting rule.
RestartResult run_restart_from(const SpaceBasis& basis, QuadratureRule start, const SearchConfig& config,
                               const RestartControl& control = {});

/// Gradient descent from initialize_rule(dim, q, seed).
RestartResult run_restart(const SpaceBasis& basis, long q, std::uint64_t seed, const SearchConfig& config,
                          const RestartControl& control = {});

struct OutcomeCounts {
  long converged = 0;
  long stagnated = 0;
  long iteration_cap = 0;
  long infeasible = 0;
  long diverged = 0;

  void add(RestartOutcome o);
  long total() const { return converged + stagnated + iteration_cap + infeasible + diverged; }
};

struct QLevelSummary {
  long q = 0;
  long restarts = 0;
  OutcomeCounts outcomes;
  double best_L_squared = 0.0;
};

struct SearchReport {
  int dim = 0;
  int p = 0;
  long q_attempted = 0;  // starting q
  long q_final = 0;      // q of the returned rule, or the last q tried
  long restarts_used = 0;
  long restarts_at_final_q = 0;
  bool converged = false;
  std::optional<QuadratureRule> rule;
  std::uint64_t rule_seed = 0;
  double final_L = 0.0;
  double final_L_squared = 0.0;
  OutcomeCounts outcomes;
  std::vector<QLevelSummary> levels;
  double wall_time = 0.0;
  std::uint64_t base_seed = 0;
  double convergence_threshold = 0.0;
};

/// Seed for the k-th restart at a given q level.
std::uint64_t restart_seed(const SearchConfig& config, long level, long k);

/// Restarts run on an OpenMP pool of config.threads workers. The lowest
/// converged restart index wins, so the result is independent of the pool width.
SearchReport search(int dim, int p, const SearchConfig& config);

/// Single-threaded reference of search(); same results bit for bit.
SearchReport search_serial(int dim, int p, const SearchConfig& config);

}  // namespace quadforge
