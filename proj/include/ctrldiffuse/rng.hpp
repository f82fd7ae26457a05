#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>

namespace ctrldiffuse {

/// Derives the seed for stream (tag, index) from the master seed.
/// Recipe (documented in FORMATS.md so other implementations can reproduce
/// streams count-for-count): h = fnv1a64(tag), then two rounds of splitmix64
/// folding in h and index * golden gamma.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view tag,
                                 std::uint64_t index);

/// mt19937_64 with fixed word consumption per draw: uniform01 eats one 64-bit
/// word, a Box-Muller pair eats two. std::normal_distribution is not used
/// because its word consumption is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on the open interval (0,1): (word >> 11 + 0.5) / 2^53.
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  /// Standard normal via Box-Muller; the second member of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Per-run stream bookkeeping. Issues streams derived from the master seed and
/// refuses to hand out the same (tag, index) twice within one run.
class StreamRegistry {
 public:
  explicit StreamRegistry(std::uint64_t master_seed) : master_(master_seed) {}

  RngStream stream(std::string_view tag, std::uint64_t index);

  std::uint64_t master_seed() const { return master_; }

 private:
  std::uint64_t master_;
  std::unordered_set<std::string> issued_;
};

}  // namespace ctrldiffuse
