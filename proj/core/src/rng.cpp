#include "fmh/rng.hpp"

namespace fmh::num {
namespace {

// splitmix64 finaliser; decorrelates nearby integer seeds.
std::uint64_t finalise(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a over the purpose label.
std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return finalise(a ^ finalise(b));
}

std::uint64_t stream_seed(std::uint64_t run_seed, std::string_view purpose,
                          std::uint64_t index) {
  return mix_seed(mix_seed(run_seed, hash_label(purpose)), index);
}

std::mt19937_64 make_stream(std::uint64_t run_seed, std::string_view purpose,
                            std::uint64_t index) {
  return std::mt19937_64(stream_seed(run_seed, purpose, index));
}

}  // namespace fmh::num
