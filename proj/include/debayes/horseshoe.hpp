#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "debayes/dataset.hpp"
#include "debayes/posterior.hpp"

namespace debayes {

// Gibbs sampler for the horseshoe hierarchy
//   beta_j | lambda_j ~ N(0, lambda_j^2)
//   lambda_j | tau    ~ C+(0, tau)
//   tau | sigma       ~ C+(0, sigma)
//   sigma             ~ C+(0, sigma_scale)
// with sigma doubling as the noise scale of y | beta ~ N(X beta, sigma^2 I).
// Every half-Cauchy is decomposed through an inverse-gamma auxiliary so all
// conditionals are Gaussian or inverse-gamma.
struct HorseshoeConfig {
  int n_draws = 8000;
  int burn_in = 8000;
  std::uint64_t seed = 0;
  double sigma_scale = 10.0;
  // fixed-sigma mode: hold the noise scale at this value instead of
  // sampling it (the scale-mixture variant with sigma_0 known)
  std::optional<double> fixed_sigma;
};

struct HorseshoeDiagnostics {
  int jitter_events = 0;  // Cholesky retries with added jitter
  // smallest sampled scales over the retained iterations; all must stay
  // strictly positive
  double min_lambda_sq = 0.0;
  double min_tau_sq = 0.0;
  double min_sigma_sq = 0.0;
};

PosteriorDrawSet sample_horseshoe(const Dataset& d, const HorseshoeConfig& cfg,
                                  HorseshoeDiagnostics* diag = nullptr);

// Forward draws of a single coefficient from the prior alone (no data);
// used to audit the heavy-tail behavior.
Vector horseshoe_prior_beta_draws(std::size_t count, std::uint64_t seed,
                                  double sigma_scale = 10.0);

// Split-chain potential scale reduction across chains of equal length.
double potential_scale_reduction(const std::vector<Vector>& chains);

void export_draws_csv(const Matrix& draws, const std::string& path);

}  // namespace debayes
