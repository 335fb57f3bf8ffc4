#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace metacure::numkit {

// Deterministic random source. All draws go through our own uniform/normal
// code so that sequences depend only on the seed, not on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Derives an independent stream from a master seed and a purpose label,
  // plus up to three numeric ids (task index, iteration, ...). The same
  // arguments always yield the same stream.
  static Rng stream(std::uint64_t seed, std::string_view purpose,
                    std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0);

  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  double normal();                         // standard normal
  double normal(double mean, double stddev);
  std::size_t index(std::size_t n);        // uniform over {0, ..., n-1}

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace metacure::numkit
