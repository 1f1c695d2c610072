#pragma once

#include <cstdint>
#include <optional>

#include "debayes/dataset.hpp"
#include "debayes/lasso.hpp"
#include "debayes/posterior.hpp"
#include "debayes/precision.hpp"

namespace debayes {

// Bayesian bootstrap weights: normalized i.i.d. unit exponentials, a point
// on the n-simplex with strictly positive coordinates.
struct WeightVector {
  Vector weights;
};

struct DebiasedDrawSet {
  Matrix draws;  // B x p
  PriorTag source_prior = PriorTag::spike_slab_vb;
  PrecisionMethod precision_method = PrecisionMethod::nodewise;
  std::optional<Vector> center_estimate;  // debiased-lasso point when computed
  std::uint64_t seed = 0;
};

// B weight vectors; vector b comes from counter stream (seed, b), so the
// sequence is reproducible and independent of every other RNG consumer.
std::vector<WeightVector> draw_weights(int n, int b_draws, std::uint64_t seed);

// One debiasing step: beta + Theta X' (w . (y - X beta)), evaluated as two
// matrix-vector passes.
Vector debias_draw(const Vector& beta, const WeightVector& w,
                   const PrecisionEstimate& theta, const Dataset& d);

// Applies a fresh weight draw to every row of the initial posterior.
DebiasedDrawSet run_algorithm1(const Dataset& d, const PosteriorDrawSet& initial,
                               const PrecisionEstimate& theta, std::uint64_t seed,
                               int threads = 0);

// Frequentist benchmark: lasso pilot plus the uniform-weight correction.
Vector debiased_lasso(const Dataset& d, const PrecisionEstimate& theta,
                      const LassoConfig& lasso_cfg);

// Equal-tailed interval between the alpha/2 and 1-alpha/2 empirical
// quantiles of column j.
CredibleInterval credible_interval(const DebiasedDrawSet& draws, std::size_t j,
                                   double alpha);
CredibleInterval credible_interval(const Matrix& draws, std::size_t j, double alpha);

// Plug-in sandwich variances sigma_j^2 = r_j' [(1/n) sum_i X_i X_i' e_i^2] r_j
// with r_j = row j of Theta and e_i the residuals at `residual_source`.
Vector estimate_sandwich_variance(const Dataset& d, const PrecisionEstimate& theta,
                                  const Vector& residual_source);

void export_interval_table_csv(const std::vector<CredibleInterval>& intervals,
                               const Vector& means,
                               const std::vector<std::string>& names,
                               const std::string& path);

}  // namespace debayes
