// Synthetic sample sets shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mfd/domain.hpp"
#include "mfd/handle.hpp"
#include "mfd/io.hpp"

namespace fixture {

using mfd::Vec3;

inline std::vector<Vec3> line(int n, double spacing = 1.0) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(i * spacing, 0.0, 0.0);
  return pts;
}

// Jittered grid clipped to the annulus r_in <= |p| <= 1 (r_in = 0 gives a
// disk), aiming at roughly `target` samples.
inline std::vector<Vec3> annulus(std::size_t target, double r_in, std::uint64_t seed, double jitter = 0.35) {
  const double area = M_PI * (1.0 - r_in * r_in);
  const double h = std::sqrt(area / static_cast<double>(target));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-jitter * h, jitter * h);
  std::vector<Vec3> pts;
  const int n = static_cast<int>(std::ceil(1.0 / h)) + 1;
  for (int i = -n; i <= n; ++i) {
    for (int j = -n; j <= n; ++j) {
      const Vec3 p(i * h + u(rng), j * h + u(rng), 0.0);
      const double r = p.head<2>().norm();
      if (r <= 1.0 && r >= r_in) pts.push_back(p);
    }
  }
  return pts;
}

// Regular grid symmetric about x = 0.
inline std::vector<Vec3> mirrored_grid(int half_width, int height, double spacing = 0.1) {
  std::vector<Vec3> pts;
  for (int j = 0; j < height; ++j) {
    for (int i = -half_width; i <= half_width; ++i) pts.emplace_back(i * spacing, j * spacing, 0.0);
  }
  return pts;
}

// 3D bar along x with nx x ny x nz lattice samples.
inline std::vector<Vec3> bar(int nx, int ny, int nz, double spacing) {
  std::vector<Vec3> pts;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < nz; ++k) pts.emplace_back(i * spacing, (j - (ny - 1) / 2.0) * spacing, (k - (nz - 1) / 2.0) * spacing);
    }
  }
  return pts;
}

// `count` distinct samples, each at least `min_gap` (Euclidean) from the others.
inline std::vector<std::size_t> spread_samples(const std::vector<Vec3>& pts, std::size_t count, double min_gap,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  std::vector<std::size_t> out;
  for (int attempt = 0; out.size() < count && attempt < 100000; ++attempt) {
    const std::size_t s = pick(rng);
    bool ok = true;
    for (std::size_t o : out) ok = ok && (pts[o] - pts[s]).norm() >= min_gap;
    if (ok) out.push_back(s);
  }
  return out;
}

inline std::vector<mfd::Handle> point_handles(const std::vector<std::size_t>& samples) {
  std::vector<mfd::Handle> hs;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    mfd::Handle h;
    h.id = static_cast<mfd::HandleId>(i);
    h.samples = {samples[i]};
    hs.push_back(h);
  }
  return hs;
}

inline mfd::Json domain_json(const std::vector<Vec3>& pts, int dim, int k) {
  return mfd::to_json(mfd::DomainFile{dim, pts, k});
}

}  // namespace fixture
