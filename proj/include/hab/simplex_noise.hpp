#pragma once

#include <array>
#include <cstdint>

namespace hab {

/// Seeded 4-D simplex noise (Gustavson's formulation). Output lies in [-1, 1].
class SimplexNoise4 {
 public:
  explicit SimplexNoise4(std::uint64_t seed);

  double operator()(double x, double y, double z, double w) const;

 private:
  std::array<std::uint8_t, 512> perm_{};
};

}  // namespace hab
