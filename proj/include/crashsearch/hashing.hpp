#ifndef CRASHSEARCH_HASHING_HPP
#define CRASHSEARCH_HASHING_HPP

#include <cstdint>
#include <cstring>
#include <string_view>

namespace crashsearch {

/// FNV-1a accumulator used for state hashes and output-directory hashes.
/// Doubles are hashed by bit pattern, so equality is bit-exactness.
class Fnv1a {
 public:
  void add_bytes(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }

  void add_u64(uint64_t v) { add_bytes(&v, sizeof(v)); }
  void add_i64(int64_t v) { add_bytes(&v, sizeof(v)); }
  void add_double(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    add_u64(bits);
  }
  void add_string(std::string_view s) {
    add_u64(s.size());
    add_bytes(s.data(), s.size());
  }

  uint64_t value() const { return hash_; }

 private:
  uint64_t hash_ = 0xcbf29ce484222325ULL;
};

} // namespace crashsearch

#endif // CRASHSEARCH_HASHING_HPP
