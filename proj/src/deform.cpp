#include "mfd/deform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <queue>
#include <string>

#include "mfd/error.hpp"

namespace mfd {

std::uint64_t handle_set_hash(std::span<const Handle> handles) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const Handle& handle : handles) {
    mix(static_cast<std::uint64_t>(handle.id));
    mix(static_cast<std::uint64_t>(handle.kind));
    mix(handle.samples.size());
    for (std::size_t s : handle.samples) mix(s);
  }
  return h;
}

std::vector<Vec3> blend_positions(std::span<const Vec3> positions, const WeightField& field,
                                  const TransformMap& transforms) {
  if (positions.size() != field.sample_count()) {
    throw Error(ErrorCode::InvalidArgument, "weight field does not match the sample count");
  }
  std::vector<Eigen::Matrix<double, 3, 4>> affine(field.handle_count());
  for (std::size_t slot = 0; slot < field.handle_count(); ++slot) {
    const HandleId id = field.handle_ids()[slot];
    const auto it = transforms.find(id);
    if (it == transforms.end()) {
      throw Error(ErrorCode::MissingTransform, "no transform for handle " + std::to_string(id));
    }
    affine[slot] = it->second.matrix().topRows<3>();
  }
  std::vector<Vec3> out(positions.size());
  for (std::size_t p = 0; p < positions.size(); ++p) {
    const Eigen::Vector4d hp = positions[p].homogeneous();
    Vec3 acc = Vec3::Zero();
    for (const WeightEntry& e : field.row(p)) acc += e.weight * (affine[e.slot] * hp);
    out[p] = acc;
  }
  return out;
}

DeformationResult deform(const SampleDomain& domain, const WeightField& field, const TransformMap& transforms,
                         std::span<const Handle> handles) {
  DeformationResult result;
  result.positions = blend_positions(domain.positions(), field, transforms);
  result.regime = field.regime();
  result.mixed_bases = field.mixed_bases();
  if (!handles.empty()) {
    result.handle_set_hash = handle_set_hash(handles);
    return result;
  }
  std::uint64_t h = 1469598103934665603ull;
  for (HandleId id : field.handle_ids()) {
    h ^= static_cast<std::uint64_t>(id);
    h *= 1099511628211ull;
  }
  result.handle_set_hash = h;
  return result;
}

Mat4 ProgressiveTarget::at(double fraction) const {
  const double angle = fraction * angle_deg * std::numbers::pi / 180.0;
  Mat4 m = Mat4::Identity();
  const Eigen::Matrix3d rotation =
      axis.norm() > 0.0 ? Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix()
                        : Eigen::Matrix3d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = pivot - rotation * pivot + fraction * translation;
  return m;
}

std::size_t progressive_pass_count(const std::map<HandleId, ProgressiveTarget>& targets, double step_deg) {
  if (!(step_deg > 0.0)) throw Error(ErrorCode::InvalidArgument, "step angle must be positive");
  std::size_t passes = 1;
  for (const auto& [id, target] : targets) {
    const double ratio = std::abs(target.angle_deg) / step_deg;
    passes = std::max(passes, static_cast<std::size_t>(std::ceil(ratio - 1e-9)));
  }
  return passes;
}

DeformationResult deform_progressive(const SampleDomain& domain, const WeightProvider& provider,
                                     const std::map<HandleId, ProgressiveTarget>& targets,
                                     const ProgressiveOptions& options) {
  const std::size_t passes = progressive_pass_count(targets, options.step_deg);

  auto cumulative = [&](std::size_t pass) {
    const double fraction = static_cast<double>(pass) / static_cast<double>(passes);
    TransformMap real;
    for (const auto& [id, target] : targets) {
      real.emplace(id, HandleTransform::from_matrix(target.at(fraction)));
    }
    return options.harmonic ? propagate_transforms(*options.harmonic, real) : real;
  };

  SampleDomain current = domain;
  WeightField field = provider(current);
  TransformMap previous = cumulative(0);
  std::vector<Vec3> positions(domain.positions().begin(), domain.positions().end());
  for (std::size_t pass = 1; pass <= passes; ++pass) {
    if (options.policy == WeightPolicy::Recompute && pass > 1) {
      current = build_domain(positions, domain.dim(), domain.k());
      field = provider(current);
    }
    const TransformMap now = cumulative(pass);
    TransformMap step;
    for (const auto& [id, t] : now) {
      const auto prev = previous.find(id);
      if (prev == previous.end()) continue;
      step.emplace(id, HandleTransform::from_matrix(t.matrix() * prev->second.matrix().inverse()));
    }
    positions = blend_positions(positions, field, step);
    previous = now;
    if (options.observer) options.observer(pass, passes, positions, now);
  }

  DeformationResult result;
  result.positions = std::move(positions);
  result.regime = field.regime();
  result.mixed_bases = field.mixed_bases();
  return result;
}

std::size_t LocalMaximaReport::total() const {
  std::size_t n = 0;
  for (const auto& list : offending) n += list.size();
  return n;
}

bool is_strict_local_max(const SampleDomain& domain, std::span<const double> values, std::size_t sample) {
  const auto nbs = domain.neighbors(sample);
  if (nbs.empty()) return false;
  return std::all_of(nbs.begin(), nbs.end(),
                     [&](const Neighbor& nb) { return values[sample] > values[nb.index]; });
}

LocalMaximaReport scan_local_maxima(const SampleDomain& domain, const WeightField& field,
                                    std::span<const Handle> handles) {
  const std::size_t n = domain.size();
  LocalMaximaReport report;
  report.handle_ids.assign(field.handle_ids().begin(), field.handle_ids().end());
  report.offending.resize(field.handle_count());

  for (std::size_t slot = 0; slot < field.handle_count(); ++slot) {
    const std::vector<double> w = field.column(slot);
    std::vector<bool> excluded(n, false);
    const HandleId id = field.handle_ids()[slot];
    for (const Handle& h : handles) {
      if (h.id != id) continue;
      for (std::size_t s : h.samples) excluded[s] = true;
    }
    for (std::size_t p = 0; p < n; ++p) {
      if (w[p] == 0.0 || w[p] == 1.0) excluded[p] = true;
    }

    std::vector<bool> visited(n, false);
    auto& flagged = report.offending[slot];
    for (std::size_t p = 0; p < n; ++p) {
      if (excluded[p] || visited[p]) continue;
      const auto nbs = domain.neighbors(p);
      bool has_greater = false;
      bool has_equal = false;
      for (const Neighbor& nb : nbs) {
        has_greater |= w[nb.index] > w[p];
        has_equal |= w[nb.index] == w[p];
      }
      if (has_greater || nbs.empty()) continue;
      if (!has_equal) {
        flagged.push_back(p);
        continue;
      }
      // Plateau: flood the equal-valued region and inspect its border.
      std::vector<std::size_t> plateau{p};
      std::queue<std::size_t> frontier;
      frontier.push(p);
      visited[p] = true;
      bool maximal = true;
      bool has_border = false;
      while (!frontier.empty()) {
        const std::size_t u = frontier.front();
        frontier.pop();
        if (excluded[u]) maximal = false;
        for (const Neighbor& nb : domain.neighbors(u)) {
          const std::size_t v = nb.index;
          if (w[v] == w[p]) {
            if (!visited[v]) {
              visited[v] = true;
              plateau.push_back(v);
              frontier.push(v);
            }
          } else {
            has_border = true;
            if (w[v] > w[p]) maximal = false;
          }
        }
      }
      if (maximal && has_border) flagged.insert(flagged.end(), plateau.begin(), plateau.end());
    }
    std::sort(flagged.begin(), flagged.end());
  }
  return report;
}

void write_ppm(std::ostream& out, std::span<const Vec3> positions, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "raster size must be positive");
  std::vector<unsigned char> pixels(static_cast<std::size_t>(width) * height * 3, 0);
  if (!positions.empty()) {
    Eigen::Vector2d lo = positions.front().head<2>();
    Eigen::Vector2d hi = lo;
    for (const Vec3& p : positions) {
      lo = lo.cwiseMin(p.head<2>());
      hi = hi.cwiseMax(p.head<2>());
    }
    const Eigen::Vector2d extent = (hi - lo).cwiseMax(1e-12);
    const Eigen::Vector2d margin = 0.05 * extent;
    lo -= margin;
    const Eigen::Vector2d span = extent + 2.0 * margin;
    const double scale = std::min((width - 1) / span.x(), (height - 1) / span.y());
    const double ox = 0.5 * ((width - 1) - scale * span.x());
    const double oy = 0.5 * ((height - 1) - scale * span.y());
    for (const Vec3& p : positions) {
      const auto x = static_cast<long>(std::lround(ox + (p.x() - lo.x()) * scale));
      const auto y = static_cast<long>(std::lround(oy + (p.y() - lo.y()) * scale));
      if (x < 0 || y < 0 || x >= width || y >= height) continue;
      // Image rows run top to bottom; model y runs up.
      const std::size_t idx = (static_cast<std::size_t>(height - 1 - y) * width + x) * 3;
      pixels[idx] = pixels[idx + 1] = pixels[idx + 2] = 255;
    }
  }
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace mfd
