#pragma once

#include <array>
#include <cstdint>

namespace debayes::rng {

// Philox4x32-10 block cipher evaluated at a 128-bit counter under a 64-bit
// key.  Streams are cheap: any (seed, stream) pair yields an independent
// sequence, which is what makes draws reproducible regardless of how work is
// split across threads.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

// Stable 64-bit mixer for deriving per-replication / per-stage seeds.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

// Stream id layout: high byte names the consumer domain, the rest indexes
// replications or draws within it.  Keeps every RNG consumer on a disjoint
// counter range for the same user-facing seed.
enum class Domain : std::uint8_t {
  weights = 1,
  vb_sample = 2,
  horseshoe = 3,
  sim_design = 4,
  sim_noise = 5,
  cv_folds = 6,
  generic = 7,
};

inline std::uint64_t stream_id(Domain d, std::uint64_t index = 0) {
  return (static_cast<std::uint64_t>(d) << 56) | (index & 0x00ffffffffffffffULL);
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint64_t next_u64();
  // uniform in [0, 1) with 53 random bits
  double next_double();
  // uniform in (0, 1]; safe under log()
  double next_open();
  double next_normal();
  double next_exponential();               // unit rate
  double next_gamma(double shape);         // rate 1, shape > 0
  double next_inverse_gamma(double shape, double rate);
  double next_chi_squared(int dof);
  double next_half_cauchy(double scale);

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;  // 32-bit words left in buffer_
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace debayes::rng
