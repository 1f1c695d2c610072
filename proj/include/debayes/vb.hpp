#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debayes/dataset.hpp"
#include "debayes/posterior.hpp"

namespace debayes {

// Spike-and-slab prior: each coefficient is a point mass at zero with
// probability 1-r and a Laplace(slab_lambda) slab otherwise; the mixing
// weight r carries a Beta(1, p^u) hyper-prior, entered through its implied
// prior log-odds -u log p.
struct SpikeSlabPrior {
  double slab_lambda = 1.0;
  double u = 1.0;
  double noise_variance = 1.0;
};

struct VbConfig {
  int max_sweeps = 500;
  double tolerance = 1e-6;  // max change across (mu, gamma) per sweep
  bool ridge_init = true;   // mu from a ridge fit; otherwise zero start
  // visit coordinates in this order instead of 0..p-1 (must be a permutation)
  std::optional<std::vector<std::size_t>> update_order;
};

struct VariationalState {
  Vector mu;
  Vector sigma2;
  Vector gamma;
  Vector elbo_trace;  // evidence lower bound after each full sweep
  bool converged = false;
  int sweeps_used = 0;
  bool elbo_decreased = false;  // any decrease beyond slack (bug indicator)
};

// Coordinate-ascent mean-field fit: factor j is gamma_j N(mu_j, sigma2_j) +
// (1-gamma_j) delta_0.  Deterministic given data, prior, and config.
VariationalState fit_vb(const Dataset& d, const SpikeSlabPrior& prior,
                        const VbConfig& cfg = {});

// B independent draws; coordinate j is 0 w.p. 1-gamma_j, else
// N(mu_j, sigma2_j).  Row b comes from its own counter stream, so any
// thread partition yields the same matrix.
PosteriorDrawSet sample_vb(const VariationalState& state, int b_draws,
                           std::uint64_t seed, int threads = 0);

// Residual variance of a preliminary lasso fit at the default penalty.
double plugin_noise_variance(const Dataset& d);

void export_state_json(const VariationalState& state, const std::string& path);

}  // namespace debayes
