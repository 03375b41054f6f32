#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "arep/common.hpp"
#include "arep/constraints.hpp"
#include "arep/vector_space.hpp"

namespace arep {

// Margins, regularization, batching and AdaGrad settings for specialization.
// Defaults: delta_syn 0.6, delta_ant 0.0, lambda_reg 1e-9, k1 = k2 = 50,
// 5 epochs.
struct Hyperparameters {
  double delta_syn = 0.6;
  double delta_ant = 0.0;
  double lambda_reg = 1e-9;
  std::size_t k1 = 50;
  std::size_t k2 = 50;
  double learning_rate = 0.05;
  std::size_t epochs = 5;
  double adagrad_epsilon = 1e-8;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(delta_syn >= 0.0) || !std::isfinite(delta_syn)) {
      throw ConfigError("delta-syn must be finite and >= 0");
    }
    if (!(delta_ant >= 0.0) || !std::isfinite(delta_ant)) {
      throw ConfigError("delta-ant must be finite and >= 0");
    }
    if (!(lambda_reg >= 0.0) || !std::isfinite(lambda_reg)) {
      throw ConfigError("lambda-reg must be finite and >= 0");
    }
    if (k1 == 0) throw ConfigError("k1 must be >= 1");
    if (k2 == 0) throw ConfigError("k2 must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning-rate must be finite and > 0");
    }
    if (epochs == 0) throw ConfigError("epochs must be >= 1");
    if (!(adagrad_epsilon > 0.0) || !std::isfinite(adagrad_epsilon)) {
      throw ConfigError("adagrad-epsilon must be finite and > 0");
    }
  }
};

// Per-coordinate running sums of squared gradients.
struct AdaGradState {
  std::vector<double> accumulators;

  explicit AdaGradState(const VectorSpace& space)
      : accumulators(space.size() * space.dim(), 0.0) {}
};

struct CostBreakdown {
  double attract = 0.0;
  double repel = 0.0;
  double reg = 0.0;
  double total = 0.0;
};

inline double hinge(double x) { return x > 0.0 ? x : 0.0; }

// Attract term over a batch's synonym pairs:
//   hinge(delta_syn + x_l.t_l - x_l.x_r) + hinge(delta_syn + x_r.t_r - x_l.x_r)
// Pairs without negatives contribute nothing.
inline double attract_cost(const MiniBatch& batch, const VectorSpace& space,
                           const Hyperparameters& h) {
  double cost = 0.0;
  for (std::size_t i = 0; i < batch.syn_pairs.size(); ++i) {
    const auto& neg = batch.syn_negatives[i];
    if (!neg) continue;
    const auto& p = batch.syn_pairs[i];
    const auto xl = space.row(p.l);
    const auto xr = space.row(p.r);
    const double lr = dot(xl, xr);
    cost += hinge(h.delta_syn + dot(xl, space.row(neg->l)) - lr);
    cost += hinge(h.delta_syn + dot(xr, space.row(neg->r)) - lr);
  }
  return cost;
}

// Repel term over a batch's antonym pairs:
//   hinge(delta_ant + x_l.x_r - x_l.t_l) + hinge(delta_ant + x_l.x_r - x_r.t_r)
inline double repel_cost(const MiniBatch& batch, const VectorSpace& space,
                         const Hyperparameters& h) {
  double cost = 0.0;
  for (std::size_t i = 0; i < batch.ant_pairs.size(); ++i) {
    const auto& neg = batch.ant_negatives[i];
    if (!neg) continue;
    const auto& p = batch.ant_pairs[i];
    const auto xl = space.row(p.l);
    const auto xr = space.row(p.r);
    const double lr = dot(xl, xr);
    cost += hinge(h.delta_ant + lr - dot(xl, space.row(neg->l)));
    cost += hinge(h.delta_ant + lr - dot(xr, space.row(neg->r)));
  }
  return cost;
}

// Squared-L2 pull of each batch word toward its distributional original:
//   sum over distinct batch words of lambda_reg * ||x_hat - x||^2.
inline double reg_cost(const MiniBatch& batch, const VectorSpace& space,
                       const Hyperparameters& h) {
  if (h.lambda_reg == 0.0) return 0.0;
  double cost = 0.0;
  for (std::uint32_t w : batch.words) {
    const auto cur = space.row(w);
    const auto orig = space.original_row(w);
    double d2 = 0.0;
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const double d = orig[j] - cur[j];
      d2 += d * d;
    }
    cost += h.lambda_reg * d2;
  }
  return cost;
}

inline CostBreakdown cost_breakdown(const MiniBatch& batch,
                                    const VectorSpace& space,
                                    const Hyperparameters& h) {
  CostBreakdown c;
  c.attract = attract_cost(batch, space, h);
  c.repel = repel_cost(batch, space, h);
  c.reg = reg_cost(batch, space, h);
  c.total = c.attract + c.repel + c.reg;
  return c;
}

// Accumulates per-word gradient vectors; words in several roles add up.
class SparseGradient {
 public:
  explicit SparseGradient(std::size_t dim) : dim_(dim) {}

  void add(std::uint32_t word, std::span<const double> values, double scale) {
    auto& g = slot(word);
    for (std::size_t j = 0; j < dim_; ++j) g[j] += scale * values[j];
  }

  const std::unordered_map<std::uint32_t, std::vector<double>>& entries()
      const {
    return map_;
  }

  bool empty() const { return map_.empty(); }
  std::size_t dim() const { return dim_; }

 private:
  std::vector<double>& slot(std::uint32_t word) {
    auto [it, inserted] = map_.try_emplace(word);
    if (inserted) it->second.assign(dim_, 0.0);
    return it->second;
  }

  std::size_t dim_ = 0;
  std::unordered_map<std::uint32_t, std::vector<double>> map_;
};

// Exact subgradient of attract + repel + reg for one batch. Hinge terms at
// or below zero contribute nothing (zero subgradient at the kink).
inline SparseGradient batch_gradients(const MiniBatch& batch,
                                      const VectorSpace& space,
                                      const Hyperparameters& h) {
  SparseGradient grads(space.dim());

  for (std::size_t i = 0; i < batch.syn_pairs.size(); ++i) {
    const auto& neg = batch.syn_negatives[i];
    if (!neg) continue;
    const auto& p = batch.syn_pairs[i];
    const auto xl = space.row(p.l);
    const auto xr = space.row(p.r);
    const double lr = dot(xl, xr);
    const auto tl = space.row(neg->l);
    const auto tr = space.row(neg->r);
    if (h.delta_syn + dot(xl, tl) - lr > 0.0) {
      grads.add(p.l, tl, 1.0);
      grads.add(p.l, xr, -1.0);
      grads.add(p.r, xl, -1.0);
      grads.add(neg->l, xl, 1.0);
    }
    if (h.delta_syn + dot(xr, tr) - lr > 0.0) {
      grads.add(p.r, tr, 1.0);
      grads.add(p.r, xl, -1.0);
      grads.add(p.l, xr, -1.0);
      grads.add(neg->r, xr, 1.0);
    }
  }

  for (std::size_t i = 0; i < batch.ant_pairs.size(); ++i) {
    const auto& neg = batch.ant_negatives[i];
    if (!neg) continue;
    const auto& p = batch.ant_pairs[i];
    const auto xl = space.row(p.l);
    const auto xr = space.row(p.r);
    const double lr = dot(xl, xr);
    const auto tl = space.row(neg->l);
    const auto tr = space.row(neg->r);
    if (h.delta_ant + lr - dot(xl, tl) > 0.0) {
      grads.add(p.l, xr, 1.0);
      grads.add(p.l, tl, -1.0);
      grads.add(p.r, xl, 1.0);
      grads.add(neg->l, xl, -1.0);
    }
    if (h.delta_ant + lr - dot(xr, tr) > 0.0) {
      grads.add(p.l, xr, 1.0);
      grads.add(p.r, xl, 1.0);
      grads.add(p.r, tr, -1.0);
      grads.add(neg->r, xr, -1.0);
    }
  }

  if (h.lambda_reg != 0.0) {
    std::vector<double> diff(space.dim());
    for (std::uint32_t w : batch.words) {
      const auto cur = space.row(w);
      const auto orig = space.original_row(w);
      for (std::size_t j = 0; j < diff.size(); ++j) {
        diff[j] = cur[j] - orig[j];
      }
      grads.add(w, diff, 2.0 * h.lambda_reg);
    }
  }
  return grads;
}

// One AdaGrad update: acc += g*g, x -= lr * g / sqrt(acc + eps), per word.
inline void adagrad_step(VectorSpace& space, AdaGradState& state,
                         const SparseGradient& grads, double learning_rate,
                         double epsilon) {
  const std::size_t dim = space.dim();
  for (const auto& [word, g] : grads.entries()) {
    auto x = space.row(word);
    double* acc = state.accumulators.data() + word * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      if (!std::isfinite(g[j])) {
        throw Error("non-finite gradient for word '" + space.word(word) + "'");
      }
      acc[j] += g[j] * g[j];
      x[j] -= learning_rate * g[j] / std::sqrt(acc[j] + epsilon);
    }
  }
}

inline void adagrad_step(VectorSpace& space, AdaGradState& state,
                         const SparseGradient& grads,
                         const Hyperparameters& h) {
  adagrad_step(space, state, grads, h.learning_rate, h.adagrad_epsilon);
}

struct EpochStats {
  std::size_t epoch = 0;
  CostBreakdown mean_cost;       // mean per-batch cost over the epoch
  std::optional<double> vsp;     // counter-fitting only
  double syn_satisfaction = 1.0; // fraction of synonym slots with no active hinge
  double ant_satisfaction = 1.0;
  double seconds = 0.0;
};

struct TrainingReport {
  std::vector<EpochStats> epochs;
  double total_seconds = 0.0;
};

inline std::string format_epoch_line(const EpochStats& s) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << "epoch=" << s.epoch << " attract=" << s.mean_cost.attract
      << " repel=" << s.mean_cost.repel << " reg=" << s.mean_cost.reg;
  if (s.vsp) out << " vsp=" << *s.vsp;
  out << " syn_sat=" << s.syn_satisfaction << " ant_sat=" << s.ant_satisfaction
      << " secs=" << s.seconds;
  return out.str();
}

using ProgressFn = std::function<void(const EpochStats&)>;

namespace detail {

inline void check_constraints(const ConstraintSet& constraints,
                              const VectorSpace& space) {
  auto check = [&](const std::vector<WordPair>& pairs) {
    for (const auto& p : pairs) {
      if (p.l >= space.size() || p.r >= space.size()) {
        throw ConfigError("constraint refers to a word outside the space");
      }
    }
  };
  check(constraints.synonyms);
  check(constraints.antonyms);
}

// Post-epoch satisfaction: re-batch deterministically, select fresh
// negatives against the updated vectors, and count the fraction of pair
// slots whose hinge terms are all inactive.
struct Satisfaction {
  double syn = 1.0;
  double ant = 1.0;
};

inline Satisfaction measure_satisfaction(const VectorSpace& space,
                                         const ConstraintSet& constraints,
                                         const Hyperparameters& h,
                                         std::size_t epoch,
                                         std::size_t threads) {
  std::size_t syn_total = 0, syn_ok = 0, ant_total = 0, ant_ok = 0;
  for (const auto& slices : make_batches(constraints, h.k1, h.k2, h.seed,
                                         epoch)) {
    MiniBatch batch = select_negatives(slices, space, threads);
    for (std::size_t i = 0; i < batch.syn_pairs.size(); ++i) {
      ++syn_total;
      const auto& neg = batch.syn_negatives[i];
      if (!neg) {
        ++syn_ok;
        continue;
      }
      const auto& p = batch.syn_pairs[i];
      const auto xl = space.row(p.l);
      const auto xr = space.row(p.r);
      const double lr = dot(xl, xr);
      if (h.delta_syn + dot(xl, space.row(neg->l)) - lr <= 0.0 &&
          h.delta_syn + dot(xr, space.row(neg->r)) - lr <= 0.0) {
        ++syn_ok;
      }
    }
    for (std::size_t i = 0; i < batch.ant_pairs.size(); ++i) {
      ++ant_total;
      const auto& neg = batch.ant_negatives[i];
      if (!neg) {
        ++ant_ok;
        continue;
      }
      const auto& p = batch.ant_pairs[i];
      const auto xl = space.row(p.l);
      const auto xr = space.row(p.r);
      const double lr = dot(xl, xr);
      if (h.delta_ant + lr - dot(xl, space.row(neg->l)) <= 0.0 &&
          h.delta_ant + lr - dot(xr, space.row(neg->r)) <= 0.0) {
        ++ant_ok;
      }
    }
  }
  Satisfaction s;
  if (syn_total) s.syn = static_cast<double>(syn_ok) / syn_total;
  if (ant_total) s.ant = static_cast<double>(ant_ok) / ant_total;
  return s;
}

}  // namespace detail

// Runs the full specialization loop: for every epoch, shuffle and batch the
// constraints, and per batch select negatives, differentiate the batch cost
// and apply one AdaGrad step. No early stopping; fully deterministic in
// the seed (independent of the thread count, which only parallelizes
// negative selection within a batch).
inline TrainingReport specialize(VectorSpace& space,
                                 const ConstraintSet& constraints,
                                 const Hyperparameters& h,
                                 const ProgressFn& progress = {},
                                 std::size_t threads = 1) {
  h.validate();
  detail::check_constraints(constraints, space);
  if (constraints.synonyms.empty() && constraints.antonyms.empty()) {
    throw ConfigError("no constraints given");
  }

  TrainingReport report;
  AdaGradState state(space);
  const auto run_start = std::chrono::steady_clock::now();
  for (std::size_t epoch = 0; epoch < h.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    CostBreakdown sum;
    std::size_t batches = 0;
    for (const auto& slices :
         make_batches(constraints, h.k1, h.k2, h.seed, epoch)) {
      MiniBatch batch = select_negatives(slices, space, threads);
      const CostBreakdown c = cost_breakdown(batch, space, h);
      sum.attract += c.attract;
      sum.repel += c.repel;
      sum.reg += c.reg;
      sum.total += c.total;
      ++batches;
      adagrad_step(space, state, batch_gradients(batch, space, h), h);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_cost = {sum.attract / batches, sum.repel / batches,
                       sum.reg / batches, sum.total / batches};
    const auto sat =
        detail::measure_satisfaction(space, constraints, h, epoch, threads);
    stats.syn_satisfaction = sat.syn;
    stats.ant_satisfaction = sat.ant;
    stats.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - epoch_start)
                        .count();
    report.epochs.push_back(stats);
    if (progress) progress(stats);
  }
  report.total_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - run_start)
                             .count();
  return report;
}

}  // namespace arep
