#pragma once

#include <cstdint>

#include "debayes/matrix.hpp"

namespace debayes {

enum class PriorTag { spike_slab_vb, horseshoe_mcmc };

const char* prior_tag_name(PriorTag tag);

// B x p matrix of coefficient draws from an initial (not yet debiased)
// posterior.
struct PosteriorDrawSet {
  Matrix draws;
  PriorTag prior_tag = PriorTag::spike_slab_vb;
  bool debiased = false;
  std::uint64_t seed = 0;
};

}  // namespace debayes
