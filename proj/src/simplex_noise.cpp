#include "hab/simplex_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hab/seeding.hpp"

namespace hab {

namespace {

constexpr std::array<std::array<signed char, 4>, 32> kGrad4{{
    {0, 1, 1, 1},   {0, 1, 1, -1},   {0, 1, -1, 1},   {0, 1, -1, -1},
    {0, -1, 1, 1},  {0, -1, 1, -1},  {0, -1, -1, 1},  {0, -1, -1, -1},
    {1, 0, 1, 1},   {1, 0, 1, -1},   {1, 0, -1, 1},   {1, 0, -1, -1},
    {-1, 0, 1, 1},  {-1, 0, 1, -1},  {-1, 0, -1, 1},  {-1, 0, -1, -1},
    {1, 1, 0, 1},   {1, 1, 0, -1},   {1, -1, 0, 1},   {1, -1, 0, -1},
    {-1, 1, 0, 1},  {-1, 1, 0, -1},  {-1, -1, 0, 1},  {-1, -1, 0, -1},
    {1, 1, 1, 0},   {1, 1, -1, 0},   {1, -1, 1, 0},   {1, -1, -1, 0},
    {-1, 1, 1, 0},  {-1, 1, -1, 0},  {-1, -1, 1, 0},  {-1, -1, -1, 0},
}};

double corner(int gradient, double x, double y, double z, double w) {
  double t = 0.6 - x * x - y * y - z * z - w * w;
  if (t < 0.0) return 0.0;
  t *= t;
  const auto& g = kGrad4[gradient];
  return t * t * (g[0] * x + g[1] * y + g[2] * z + g[3] * w);
}

}  // namespace

SimplexNoise4::SimplexNoise4(std::uint64_t seed) {
  std::array<std::uint8_t, 256> base{};
  std::iota(base.begin(), base.end(), 0);
  std::uint64_t state = seed;
  for (std::size_t i = base.size() - 1; i > 0; --i) {
    const std::size_t j = splitmix64(state) % (i + 1);
    std::swap(base[i], base[j]);
  }
  for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = base[i & 255];
}

double SimplexNoise4::operator()(double x, double y, double z, double w) const {
  static const double kSkew = (std::sqrt(5.0) - 1.0) / 4.0;
  static const double kUnskew = (5.0 - std::sqrt(5.0)) / 20.0;

  const double s = (x + y + z + w) * kSkew;
  const int i = static_cast<int>(std::floor(x + s));
  const int j = static_cast<int>(std::floor(y + s));
  const int k = static_cast<int>(std::floor(z + s));
  const int l = static_cast<int>(std::floor(w + s));
  const double t = (i + j + k + l) * kUnskew;
  const double x0 = x - (i - t);
  const double y0 = y - (j - t);
  const double z0 = z - (k - t);
  const double w0 = w - (l - t);

  // Rank the offsets to find which of the 24 simplices contains the point.
  int rx = 0, ry = 0, rz = 0, rw = 0;
  (x0 > y0 ? rx : ry)++;
  (x0 > z0 ? rx : rz)++;
  (x0 > w0 ? rx : rw)++;
  (y0 > z0 ? ry : rz)++;
  (y0 > w0 ? ry : rw)++;
  (z0 > w0 ? rz : rw)++;

  const int ii = i & 255;
  const int jj = j & 255;
  const int kk = k & 255;
  const int ll = l & 255;
  const auto hash = [&](int di, int dj, int dk, int dl) {
    return perm_[ii + di + perm_[jj + dj + perm_[kk + dk + perm_[ll + dl]]]] % 32;
  };

  double total = corner(hash(0, 0, 0, 0), x0, y0, z0, w0);
  for (int rank = 3; rank >= 1; --rank) {
    const int di = rx >= rank, dj = ry >= rank, dk = rz >= rank, dl = rw >= rank;
    const double offset = (4 - rank) * kUnskew;
    total += corner(hash(di, dj, dk, dl), x0 - di + offset, y0 - dj + offset, z0 - dk + offset,
                    w0 - dl + offset);
  }
  const double offset = 4.0 * kUnskew;
  total += corner(hash(1, 1, 1, 1), x0 - 1.0 + offset, y0 - 1.0 + offset, z0 - 1.0 + offset,
                  w0 - 1.0 + offset);
  return std::clamp(27.0 * total, -1.0, 1.0);
}

}  // namespace hab
