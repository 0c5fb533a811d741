#include "quadforge/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <omp.h>

namespace quadforge {

void SearchConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(max_inner_iterations > 0, "max_inner_iterations must be positive");
  require(max_restarts_per_q > 0, "max_restarts_per_q must be positive");
  require(convergence_threshold > 0.0, "convergence_threshold must be positive");
  require(stagnation_window >= 2, "stagnation_window must be >= 2");
  require(stagnation_epsilon > 0.0, "stagnation_epsilon must be positive");
  require(yogi_beta1 > 0.0 && yogi_beta1 < 1.0, "yogi_beta1 must lie in (0,1)");
  require(yogi_beta2 > 0.0 && yogi_beta2 < 1.0, "yogi_beta2 must lie in (0,1)");
  require(yogi_epsilon > 0.0, "yogi_epsilon must be positive");
  require(!start_q || *start_q >= 1, "start_q must be >= 1");
  require(max_q_increments >= 0, "max_q_increments must be non-negative");
  require(threads >= 0, "threads must be non-negative");
}

OptimizerState OptimizerState::fresh(std::vector<double> parameters) {
  OptimizerState s;
  s.first_moment.assign(parameters.size(), 0.0);
  s.second_moment.assign(parameters.size(), 0.0);
  s.parameters = std::move(parameters);
  return s;
}

double uniform_open01(std::uint64_t seed, std::uint64_t counter) {
  // SplitMix64 output number `counter`; 53 mantissa bits, offset by half an
  // ulp so 0 and 1 are never produced.
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

QuadratureRule initialize_rule(int dim, long q, std::uint64_t seed) {
  if (q < 1) throw std::invalid_argument("point count must be >= 1");
  const std::size_t stride = static_cast<std::size_t>(dim) + 1;
  std::vector<double> params(static_cast<std::size_t>(q) * stride);
  for (std::size_t k = 0; k < params.size(); ++k) params[k] = uniform_open01(seed, k);
  double sum = 0.0;
  for (std::size_t j = 0; j < static_cast<std::size_t>(q); ++j) sum += params[j * stride + stride - 1];
  for (std::size_t j = 0; j < static_cast<std::size_t>(q); ++j) params[j * stride + stride - 1] /= sum;
  return QuadratureRule(dim, std::move(params));
}

bool yogi_step(OptimizerState& state, std::span<const double> gradient, const SearchConfig& config) {
  const std::size_t n = state.parameters.size();
  if (gradient.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
    throw std::invalid_argument("optimizer state and gradient shapes disagree");
  }
  for (double g : gradient) {
    if (!std::isfinite(g)) return false;
  }
  const long t = ++state.step_count;
  const double b1 = config.yogi_beta1;
  const double b2 = config.yogi_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t k = 0; k < n; ++k) {
    const double g = gradient[k];
    const double g2 = g * g;
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    m = b1 * m + (1.0 - b1) * g;
    const double diff = v - g2;
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    v -= (1.0 - b2) * sign * g2;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    state.parameters[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.yogi_epsilon);
  }
  return true;
}

std::string to_string(RestartOutcome o) {
  switch (o) {
    case RestartOutcome::converged: return "converged";
    case RestartOutcome::stagnated: return "stagnated";
    case RestartOutcome::iteration_cap: return "iteration_cap";
    case RestartOutcome::infeasible: return "infeasible";
    case RestartOutcome::diverged: return "diverged";
    case RestartOutcome::cancelled: return "cancelled";
  }
  return "unknown";
}

namespace {

// Rescales weights to sum to one. Every non-constant basis function has zero
// exact integral, so its error is only scaled by ~1 while the constant-mode
// error vanishes.
std::vector<double> normalised_weights(std::span<const double> params, int dim) {
  std::vector<double> out(params.begin(), params.end());
  const std::size_t stride = static_cast<std::size_t>(dim) + 1;
  double sum = 0.0;
  for (std::size_t j = 0; j < out.size() / stride; ++j) sum += out[j * stride + stride - 1];
  for (std::size_t j = 0; j < out.size() / stride; ++j) out[j * stride + stride - 1] /= sum;
  return out;
}

}  // namespace

RestartResult run_restart_from(const SpaceBasis& basis, QuadratureRule start, const SearchConfig& config,
                               const RestartControl& control) {
  if (start.dim() != basis.dim()) throw std::invalid_argument("rule and basis dimensions differ");
  const int dim = start.dim();
  LossKernel kernel(basis);
  OptimizerState state = OptimizerState::fresh(std::vector<double>(start.params().begin(), start.params().end()));
  std::vector<double> grad(state.parameters.size());

  const auto window = static_cast<std::size_t>(config.stagnation_window);
  std::vector<double> best_ring(window, std::numeric_limits<double>::infinity());
  double best = std::numeric_limits<double>::infinity();
  double l2 = best;

  auto finish = [&](RestartOutcome outcome, long it) {
    return RestartResult{outcome, QuadratureRule(dim, state.parameters), best, l2, it};
  };

  for (long it = 1; it <= config.max_inner_iterations; ++it) {
    if (control.cancel_below != nullptr && (it & 255) == 0 &&
        control.cancel_below->load(std::memory_order_relaxed) < control.restart_index) {
      return finish(RestartOutcome::cancelled, it - 1);
    }
    l2 = kernel.evaluate(state.parameters, grad);
    if (!std::isfinite(l2)) return finish(RestartOutcome::diverged, it);
    best = std::min(best, l2);
    if (control.best_history != nullptr) control.best_history->push_back(best);

    if (l2 < config.convergence_threshold) {
      auto polished = normalised_weights(state.parameters, dim);
      const double l2_polished = kernel.evaluate(polished, {});
      if (l2_polished < config.convergence_threshold) {
        state.parameters = std::move(polished);
        l2 = l2_polished;
        best = std::min(best, l2);
      }
      QuadratureRule rule(dim, state.parameters);
      const bool ok = !config.enforce_feasibility || rule.is_feasible();
      return RestartResult{ok ? RestartOutcome::converged : RestartOutcome::infeasible, std::move(rule), best,
                           l2, it};
    }

    const std::size_t slot = static_cast<std::size_t>(it) % window;
    if (it > config.stagnation_window && best_ring[slot] - best < config.stagnation_epsilon) {
      return finish(RestartOutcome::stagnated, it);
    }
    best_ring[slot] = best;

    if (!yogi_step(state, grad, config)) return finish(RestartOutcome::diverged, it);
  }
  l2 = kernel.evaluate(state.parameters, {});
  best = std::min(best, l2);
  return finish(RestartOutcome::iteration_cap, config.max_inner_iterations);
}

RestartResult run_restart(const SpaceBasis& basis, long q, std::uint64_t seed, const SearchConfig& config,
                          const RestartControl& control) {
  return run_restart_from(basis, initialize_rule(basis.dim(), q, seed), config, control);
}

void OutcomeCounts::add(RestartOutcome o) {
  switch (o) {
    case RestartOutcome::converged: ++converged; break;
    case RestartOutcome::stagnated: ++stagnated; break;
    case RestartOutcome::iteration_cap: ++iteration_cap; break;
    case RestartOutcome::infeasible: ++infeasible; break;
    case RestartOutcome::diverged: ++diverged; break;
    case RestartOutcome::cancelled: break;
  }
}

std::uint64_t restart_seed(const SearchConfig& config, long level, long k) {
  return config.base_seed + static_cast<std::uint64_t>(level) * static_cast<std::uint64_t>(config.max_restarts_per_q) +
         static_cast<std::uint64_t>(k);
}

namespace {

struct LevelResult {
  long winner = -1;  // lowest converged restart index, or -1
  std::vector<std::optional<RestartResult>> results;
};

using LevelRunner = LevelResult (*)(const SpaceBasis&, long q, long level, const SearchConfig&);

LevelResult run_level_serial(const SpaceBasis& basis, long q, long level, const SearchConfig& config) {
  LevelResult out;
  out.results.resize(static_cast<std::size_t>(config.max_restarts_per_q));
  for (long k = 0; k < config.max_restarts_per_q; ++k) {
    auto r = run_restart(basis, q, restart_seed(config, level, k), config);
    const bool won = r.outcome == RestartOutcome::converged;
    out.results[static_cast<std::size_t>(k)] = std::move(r);
    if (won) {
      out.winner = k;
      break;
    }
  }
  return out;
}

LevelResult run_level_parallel(const SpaceBasis& basis, long q, long level, const SearchConfig& config) {
  const long count = config.max_restarts_per_q;
  LevelResult out;
  out.results.resize(static_cast<std::size_t>(count));
  std::atomic<long> winner{count};
  const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long k = 0; k < count; ++k) {
    if (k > winner.load(std::memory_order_relaxed)) continue;
    RestartControl control;
    control.cancel_below = &winner;
    control.restart_index = k;
    auto r = run_restart(basis, q, restart_seed(config, level, k), config, control);
    if (r.outcome == RestartOutcome::converged) {
      long current = winner.load();
      while (k < current && !winner.compare_exchange_weak(current, k)) {
      }
    }
    out.results[static_cast<std::size_t>(k)] = std::move(r);
  }
  out.winner = winner.load() < count ? winner.load() : -1;
  return out;
}

SearchReport run_search(int dim, int p, const SearchConfig& config, LevelRunner runner) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const SpaceBasis basis = product_space_basis(dim, p);

  SearchReport report;
  report.dim = dim;
  report.p = p;
  report.base_seed = config.base_seed;
  report.convergence_threshold = config.convergence_threshold;
  report.q_attempted = config.start_q.value_or(q_lower_bound(dim, p));
  report.final_L_squared = std::numeric_limits<double>::infinity();

  long q = report.q_attempted;
  for (long level = 0; level <= config.max_q_increments; ++level, ++q) {
    LevelResult lr = runner(basis, q, level, config);
    const long tallied = lr.winner >= 0 ? lr.winner + 1 : config.max_restarts_per_q;

    QLevelSummary summary;
    summary.q = q;
    summary.restarts = tallied;
    summary.best_L_squared = std::numeric_limits<double>::infinity();
    for (long k = 0; k < tallied; ++k) {
      const auto& r = lr.results[static_cast<std::size_t>(k)];
      summary.outcomes.add(r->outcome);
      summary.best_L_squared = std::min(summary.best_L_squared, r->best_L_squared);
    }
    report.levels.push_back(summary);
    report.restarts_used += tallied;
    report.outcomes.converged += summary.outcomes.converged;
    report.outcomes.stagnated += summary.outcomes.stagnated;
    report.outcomes.iteration_cap += summary.outcomes.iteration_cap;
    report.outcomes.infeasible += summary.outcomes.infeasible;
    report.outcomes.diverged += summary.outcomes.diverged;
    report.q_final = q;
    report.restarts_at_final_q = tallied;

    if (lr.winner >= 0) {
      const auto& r = *lr.results[static_cast<std::size_t>(lr.winner)];
      report.converged = true;
      report.rule = r.rule;
      report.rule_seed = restart_seed(config, level, lr.winner);
      report.final_L_squared = r.final_L_squared;
      break;
    }
    report.final_L_squared = std::min(report.final_L_squared, summary.best_L_squared);
  }
  report.final_L = std::sqrt(report.final_L_squared);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace

SearchReport search(int dim, int p, const SearchConfig& config) {
  return run_search(dim, p, config, &run_level_parallel);
}

SearchReport search_serial(int dim, int p, const SearchConfig& config) {
  return run_search(dim, p, config, &run_level_serial);
}

}  // namespace quadforge
