#pragma once

#include <cmath>
#include <cstdint>

namespace gbergomi {

// Philox 4x32-10 counter generator. Each (seed, stream) pair is an
// independent substream, so path p can be generated on any thread, in any
// order, and still produce the same draws. See Salmon et al., "Parallel
// random numbers: as easy as 1, 2, 3".
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream) : key0_(static_cast<std::uint32_t>(seed)), key1_(static_cast<std::uint32_t>(seed >> 32)) {
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
  }

  // Uniform on (0, 1), strictly open on both sides.
  double uniform() {
    std::uint64_t u = next64();
    return ((u >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform()); }

  // Box-Muller with a cached spare.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b, std::uint32_t* lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    *lo = static_cast<std::uint32_t>(p);
    return static_cast<std::uint32_t>(p >> 32);
  }

  void bump() {
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  std::uint64_t next64() {
    std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t lo0, lo1;
      std::uint32_t hi0 = mulhi(0xD2511F53u, c0, &lo0);
      std::uint32_t hi1 = mulhi(0xCD9E8D57u, c2, &lo1);
      std::uint32_t n0 = hi1 ^ c1 ^ k0;
      std::uint32_t n1 = lo1;
      std::uint32_t n2 = hi0 ^ c3 ^ k1;
      std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    bump();
    return (static_cast<std::uint64_t>(c0) << 32) | c1;
  }

  std::uint32_t key0_, key1_;
  std::uint32_t ctr_[4] = {0, 0, 0, 0};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gbergomi
