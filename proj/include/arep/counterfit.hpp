#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "arep/attract_repel.hpp"
#include "arep/common.hpp"
#include "arep/constraints.hpp"
#include "arep/parallel.hpp"
#include "arep/vector_space.hpp"

namespace arep {

// Settings for the counter-fitting baseline: context-insensitive attract
// and repel terms plus a neighborhood distance-preservation (VSP) term.
struct CounterfitConfig {
  double delta_syn = 0.6;   // minimum dot product enforced between synonyms
  double delta_ant = 0.0;   // maximum dot product allowed between antonyms
  double vsp_radius = 0.2;  // cosine-distance radius of preserved pairs
  double attract_weight = 1.0;
  double repel_weight = 1.0;
  double vsp_weight = 1.0;
  std::size_t k1 = 50;
  std::size_t k2 = 50;
  double learning_rate = 0.05;
  std::size_t epochs = 5;
  double adagrad_epsilon = 1e-8;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const {
    if (!std::isfinite(delta_syn) || !std::isfinite(delta_ant)) {
      throw ConfigError("margins must be finite");
    }
    if (!(vsp_radius >= 0.0) || !std::isfinite(vsp_radius)) {
      throw ConfigError("vsp-radius must be finite and >= 0");
    }
    if (!(attract_weight >= 0.0) || !(repel_weight >= 0.0) ||
        !(vsp_weight >= 0.0) || !std::isfinite(attract_weight) ||
        !std::isfinite(repel_weight) || !std::isfinite(vsp_weight)) {
      throw ConfigError("term weights must be finite and >= 0");
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

// Attract term: sum over synonym pairs of hinge(delta_syn - x_l.x_r).
// No negative examples; every pair is pushed to the margin directly.
inline double counterfit_attract_cost(std::span<const WordPair> synonyms,
                                      const VectorSpace& space,
                                      const CounterfitConfig& cfg) {
  double cost = 0.0;
  for (const auto& p : synonyms) {
    cost += hinge(cfg.delta_syn - dot(space.row(p.l), space.row(p.r)));
  }
  return cost;
}

// Repel term: sum over antonym pairs of hinge(x_l.x_r - delta_ant).
inline double counterfit_repel_cost(std::span<const WordPair> antonyms,
                                    const VectorSpace& space,
                                    const CounterfitConfig& cfg) {
  double cost = 0.0;
  for (const auto& p : antonyms) {
    cost += hinge(dot(space.row(p.l), space.row(p.r)) - cfg.delta_ant);
  }
  return cost;
}

// A vocabulary pair whose original cosine distance fell inside the VSP
// radius, plus that frozen distance.
struct VspPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double original_distance = 0.0;
};

// Scans all vocabulary pairs of the original vectors and keeps those with
// cosine distance below the radius. Quadratic in |V|; large spaces should
// be guarded by the caller.
inline std::vector<VspPair> build_vsp_pairs(const VectorSpace& space,
                                            const CounterfitConfig& cfg) {
  const std::size_t n = space.size();
  if (cfg.vsp_radius <= 0.0 || cfg.vsp_weight == 0.0 || n < 2) return {};

  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = norm(space.original_row(i));

  std::vector<std::vector<VspPair>> found(n);
  parallel_for(n, cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (norms[i] == 0.0) continue;
      const auto a = space.original_row(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        if (norms[j] == 0.0) continue;
        const double distance =
            1.0 - dot(a, space.original_row(j)) / (norms[i] * norms[j]);
        if (distance < cfg.vsp_radius) {
          found[i].push_back({static_cast<std::uint32_t>(i),
                              static_cast<std::uint32_t>(j), distance});
        }
      }
    }
  });
  std::vector<VspPair> pairs;
  for (auto& row : found) {
    pairs.insert(pairs.end(), row.begin(), row.end());
  }
  return pairs;
}

// VSP term over a cached pair set: hinge of how much further apart (in
// cosine distance, current vectors) each preserved pair has drifted.
inline double counterfit_vsp_cost(const VectorSpace& space,
                                  std::span<const VspPair> pairs) {
  double cost = 0.0;
  for (const auto& p : pairs) {
    const double current = 1.0 - cosine(space.row(p.i), space.row(p.j));
    cost += hinge(current - p.original_distance);
  }
  return cost;
}

inline double counterfit_vsp_cost(const VectorSpace& space,
                                  const CounterfitConfig& cfg) {
  const auto pairs = build_vsp_pairs(space, cfg);
  return counterfit_vsp_cost(space, pairs);
}

namespace detail {

// d/du of cos(u, v); zero for zero-norm inputs.
inline void add_cosine_gradient(SparseGradient& grads, std::uint32_t u_word,
                                std::span<const double> u,
                                std::span<const double> v, double scale) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) return;
  const double c = dot(u, v) / (nu * nv);
  std::vector<double> g(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    g[j] = v[j] / (nu * nv) - c * u[j] / (nu * nu);
  }
  grads.add(u_word, g, scale);
}

inline SparseGradient counterfit_gradients(std::span<const WordPair> synonyms,
                                           std::span<const WordPair> antonyms,
                                           std::span<const VspPair> vsp,
                                           const VectorSpace& space,
                                           const CounterfitConfig& cfg) {
  SparseGradient grads(space.dim());
  if (cfg.attract_weight > 0.0) {
    for (const auto& p : synonyms) {
      const auto xl = space.row(p.l);
      const auto xr = space.row(p.r);
      if (cfg.delta_syn - dot(xl, xr) > 0.0) {
        grads.add(p.l, xr, -cfg.attract_weight);
        grads.add(p.r, xl, -cfg.attract_weight);
      }
    }
  }
  if (cfg.repel_weight > 0.0) {
    for (const auto& p : antonyms) {
      const auto xl = space.row(p.l);
      const auto xr = space.row(p.r);
      if (dot(xl, xr) - cfg.delta_ant > 0.0) {
        grads.add(p.l, xr, cfg.repel_weight);
        grads.add(p.r, xl, cfg.repel_weight);
      }
    }
  }
  if (cfg.vsp_weight > 0.0) {
    for (const auto& p : vsp) {
      const auto xi = space.row(p.i);
      const auto xj = space.row(p.j);
      const double current = 1.0 - cosine(xi, xj);
      if (current - p.original_distance > 0.0) {
        // d(1 - cos)/dx = -dcos/dx on both endpoints.
        add_cosine_gradient(grads, p.i, xi, xj, -cfg.vsp_weight);
        add_cosine_gradient(grads, p.j, xj, xi, -cfg.vsp_weight);
      }
    }
  }
  return grads;
}

}  // namespace detail

// Counter-fitting baseline: minimizes the weighted attract/repel/VSP
// objective with the same AdaGrad batching machinery as specialize. The
// VSP pair set is computed once from the original vectors; each epoch it
// is shuffled and spread across that epoch's batches.
inline TrainingReport counterfit(VectorSpace& space,
                                 const ConstraintSet& constraints,
                                 const CounterfitConfig& cfg,
                                 const ProgressFn& progress = {}) {
  cfg.validate();
  detail::check_constraints(constraints, space);
  if (constraints.synonyms.empty() && constraints.antonyms.empty()) {
    throw ConfigError("no constraints given");
  }

  const std::vector<VspPair> vsp_pairs = build_vsp_pairs(space, cfg);

  TrainingReport report;
  AdaGradState state(space);
  const auto run_start = std::chrono::steady_clock::now();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    const auto batches =
        make_batches(constraints, cfg.k1, cfg.k2, cfg.seed, epoch);
    const std::size_t nb = batches.size();

    std::vector<VspPair> vsp = vsp_pairs;
    Rng vsp_rng(derive_seed(cfg.seed, epoch, 2));
    vsp_rng.shuffle(vsp);

    CostBreakdown sum;
    double vsp_sum = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t vsp_lo = b * vsp.size() / nb;
      const std::size_t vsp_hi = (b + 1) * vsp.size() / nb;
      std::span<const VspPair> vsp_slice(vsp.data() + vsp_lo, vsp_hi - vsp_lo);

      sum.attract += counterfit_attract_cost(batches[b].synonyms, space, cfg);
      sum.repel += counterfit_repel_cost(batches[b].antonyms, space, cfg);
      vsp_sum += counterfit_vsp_cost(space, vsp_slice);

      adagrad_step(space, state,
                   detail::counterfit_gradients(batches[b].synonyms,
                                                batches[b].antonyms, vsp_slice,
                                                space, cfg),
                   cfg.learning_rate, cfg.adagrad_epsilon);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_cost = {sum.attract / nb, sum.repel / nb, 0.0, 0.0};
    stats.vsp = vsp_sum / nb;
    stats.mean_cost.total = stats.mean_cost.attract + stats.mean_cost.repel +
                            *stats.vsp;

    std::size_t syn_ok = 0, ant_ok = 0;
    for (const auto& p : constraints.synonyms) {
      if (dot(space.row(p.l), space.row(p.r)) >= cfg.delta_syn) ++syn_ok;
    }
    for (const auto& p : constraints.antonyms) {
      if (dot(space.row(p.l), space.row(p.r)) <= cfg.delta_ant) ++ant_ok;
    }
    stats.syn_satisfaction =
        constraints.synonyms.empty()
            ? 1.0
            : static_cast<double>(syn_ok) / constraints.synonyms.size();
    stats.ant_satisfaction =
        constraints.antonyms.empty()
            ? 1.0
            : static_cast<double>(ant_ok) / constraints.antonyms.size();
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
