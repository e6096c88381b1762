#pragma once

#include <cstdint>
#include <string_view>

namespace snm {

// Incremental 64-bit FNV-1a over the bytes of a key string. The seed is
// folded into the offset basis so that different seeds give unrelated hash
// families while keeping the value platform independent. Weight-table
// indices are always this hash reduced modulo a power of two; any change
// here invalidates existing model files.
class KeyHasher {
public:
  static constexpr uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
  static constexpr uint64_t kPrime = 0x00000100000001b3ULL;

  explicit KeyHasher(uint64_t seed)
      : state_(kOffsetBasis ^ (seed * 0x9e3779b97f4a7c15ULL)) {}

  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= kPrime;
    }
  }

  void update(char c) {
    state_ ^= static_cast<unsigned char>(c);
    state_ *= kPrime;
  }

  uint64_t value() const { return state_; }

  void reset_to(uint64_t state) { state_ = state; }

private:
  uint64_t state_;
};

inline uint64_t hash_key(std::string_view key, uint64_t seed) {
  KeyHasher h(seed);
  h.update(key);
  return h.value();
}

}  // namespace snm
