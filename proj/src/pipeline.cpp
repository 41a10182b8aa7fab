#include "mfd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfd/error.hpp"

namespace mfd {

double typical_spacing(const SampleDomain& domain) {
  std::vector<double> lengths;
  lengths.reserve(domain.edges().size());
  for (const Edge& e : domain.edges()) lengths.push_back(e.length);
  if (lengths.empty()) return 1.0;
  auto mid = lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2);
  std::nth_element(lengths.begin(), mid, lengths.end());
  return *mid;
}

std::vector<Vec3> sample_polyline(std::span<const Vec3> vertices, double spacing) {
  std::vector<Vec3> out;
  if (vertices.empty()) return out;
  out.push_back(vertices.front());
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const Vec3 a = vertices[i - 1];
    const Vec3 b = vertices[i];
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a).norm() / spacing)));
    for (std::size_t s = 1; s <= pieces; ++s) {
      out.push_back(a + (b - a) * (static_cast<double>(s) / static_cast<double>(pieces)));
    }
  }
  return out;
}

BoundHandles bind_handles(const SampleDomain& domain, std::span<const HandleSpec> specs,
                          const Basis& default_basis) {
  const double spacing = typical_spacing(domain);
  std::vector<Vec3> to_insert;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // into to_insert, per handle
  for (const HandleSpec& spec : specs) {
    const std::size_t begin = to_insert.size();
    if (spec.kind == HandleKind::Segment) {
      const auto pts = sample_polyline(spec.points, spacing);
      to_insert.insert(to_insert.end(), pts.begin(), pts.end());
    } else if (!spec.sample) {
      if (spec.points.size() != 1) throw Error(ErrorCode::InvalidArgument, "point handle needs one position");
      to_insert.push_back(spec.points.front());
    }
    ranges.emplace_back(begin, to_insert.size());
  }

  BoundHandles out;
  InsertResult inserted = insert_points(domain, to_insert, domain.k());
  out.domain = std::move(inserted.domain);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const HandleSpec& spec = specs[i];
    Handle h;
    h.id = static_cast<HandleId>(i);
    h.kind = spec.kind;
    h.basis = spec.basis.value_or(default_basis);
    if (spec.sample) {
      if (*spec.sample >= domain.size()) {
        throw Error(ErrorCode::InvalidArgument, "handle sample " + std::to_string(*spec.sample) + " out of range");
      }
      h.samples = {*spec.sample};
    } else {
      for (std::size_t s = ranges[i].first; s < ranges[i].second; ++s) {
        const std::size_t idx = inserted.indices[s];
        if (std::find(h.samples.begin(), h.samples.end(), idx) == h.samples.end()) h.samples.push_back(idx);
      }
    }
    out.handles.push_back(std::move(h));
  }
  return out;
}

std::optional<HarmonicFields> harmonic_for_layout(const HandleLayout& layout, std::size_t real_count) {
  if (layout.handles.size() <= real_count) return std::nullopt;
  std::vector<HandleId> real_ids(real_count);
  for (std::size_t i = 0; i < real_count; ++i) real_ids[i] = static_cast<HandleId>(i);
  return solve_harmonic_fields(delaunay_graph(layout.partition), real_ids);
}

namespace {

bool all_compact(std::span<const Handle> handles) {
  return std::all_of(handles.begin(), handles.end(), [](const Handle& h) { return is_compact(h.basis); });
}

}  // namespace

Rig solve_rig(SampleDomain domain, std::vector<Handle> real_handles, const RigOptions& options) {
  Rig rig;
  rig.real_count = real_handles.size();
  rig.layout = make_layout(domain, std::move(real_handles));
  if (options.insert_virtual && all_compact(rig.layout.handles)) {
    rig.trace = insert_virtual_handles(domain, rig.layout, options.insertion);
  } else {
    rig.trace.final_handles = rig.layout.handles;
  }
  assign_support_radii(rig.layout.handles, rig.layout.partition, options.alpha);
  rig.weights = compute_weights(domain, rig.layout.handles, rig.layout.fields, rig.layout.partition);
  rig.harmonic = harmonic_for_layout(rig.layout, rig.real_count);
  rig.domain = std::move(domain);
  return rig;
}

Rig restore_rig(SampleDomain domain, std::vector<Handle> real_handles,
                std::span<const std::size_t> virtual_sites, const RigOptions& options) {
  Rig rig;
  rig.real_count = real_handles.size();
  for (std::size_t site : virtual_sites) {
    Handle v;
    v.id = static_cast<HandleId>(real_handles.size());
    v.kind = HandleKind::Virtual;
    v.samples = {site};
    v.basis = options.insertion.virtual_basis;
    real_handles.push_back(std::move(v));
  }
  rig.layout = make_layout(domain, std::move(real_handles));
  rig.trace.final_handles = rig.layout.handles;
  assign_support_radii(rig.layout.handles, rig.layout.partition, options.alpha);
  rig.harmonic = harmonic_for_layout(rig.layout, rig.real_count);
  rig.domain = std::move(domain);
  return rig;
}

TransformMap expand_transforms(const Rig& rig, const TransformMap& real_transforms) {
  TransformMap real;
  for (std::size_t i = 0; i < rig.real_count; ++i) {
    const auto id = static_cast<HandleId>(i);
    const auto it = real_transforms.find(id);
    real.emplace(id, it != real_transforms.end() ? it->second : HandleTransform{});
  }
  for (const auto& [id, t] : real_transforms) {
    if (id < 0 || static_cast<std::size_t>(id) >= rig.real_count) {
      throw Error(ErrorCode::InvalidArgument, "pose for unknown real handle " + std::to_string(id));
    }
  }
  if (!rig.harmonic) return real;
  return propagate_transforms(*rig.harmonic, real);
}

}  // namespace mfd
