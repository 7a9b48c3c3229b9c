#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

namespace tnops {

// splitmix64 stream. Substreams are derived by hashing a name into the seed,
// so each component can be rerun independently with the same top-level seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double normal();                        // Box-Muller, standard normal
  std::complex<double> complex_uniform(); // re, im uniform in [-1, 1]

  Rng substream(std::string_view name) const;
  std::uint64_t seed_state() const { return state_; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);

}  // namespace tnops
