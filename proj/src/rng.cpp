#include "ctrldiffuse/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ctrldiffuse {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view tag,
                                 std::uint64_t index) {
  std::uint64_t s = splitmix64(master_seed ^ fnv1a64(tag));
  return splitmix64(s ^ (index * 0x9E3779B97F4A7C15ull));
}

RngStream StreamRegistry::stream(std::string_view tag, std::uint64_t index) {
  std::string key = std::string(tag) + "#" + std::to_string(index);
  if (!issued_.insert(key).second) {
    throw std::logic_error("rng stream (" + std::string(tag) + ", " +
                           std::to_string(index) + ") issued twice in one run");
  }
  return RngStream(derive_stream_seed(master_, tag, index));
}

}  // namespace ctrldiffuse
