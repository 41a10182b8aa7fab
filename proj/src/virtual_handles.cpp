#include "mfd/virtual_handles.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "mfd/error.hpp"

namespace mfd {
namespace {

std::size_t farthest_count(const HandleLayout& layout, std::size_t h) {
  const VoronoiPartition& part = layout.partition;
  const std::vector<double>& dist = layout.fields[h].distance;
  std::size_t count = 0;
  for (std::size_t p = 0; p < part.cell_of.size(); ++p) {
    count += part.cell_of[p] == static_cast<HandleId>(h) && dist[p] == part.r_d[h];
  }
  return count;
}

}  // namespace

std::size_t default_insertion_budget(std::size_t handle_count) { return 10 * handle_count + 100; }

HandleLayout make_layout(const SampleDomain& domain, std::vector<Handle> handles) {
  if (handles.empty()) throw Error(ErrorCode::InvalidArgument, "no handles");
  validate_handles(handles, domain.size());
  HandleLayout layout;
  layout.fields = handle_distance_fields(domain, handles);
  layout.partition = voronoi_from_fields(domain, handles, layout.fields);
  layout.handles = std::move(handles);
  return layout;
}

InsertionTrace insert_virtual_handles(const SampleDomain& domain, HandleLayout& layout,
                                      const InsertionOptions& options) {
  const std::size_t budget =
      options.max_insertions.value_or(default_insertion_budget(layout.handles.size()));
  InsertionTrace trace;
  double previous_score = kInfinity;
  for (;;) {
    const VoronoiPartition& part = layout.partition;
    std::optional<std::size_t> chosen;
    double score = -kInfinity;
    for (std::size_t h = 0; h < part.handle_count(); ++h) {
      if (!(part.r_d[h] > 0.0) || part.delta(h) < 0.0) continue;
      const double s = part.delta(h) / part.r_d[h];
      if (!chosen || s > score) {
        chosen = h;
        score = s;
      }
    }
    if (!chosen) break;
    if (trace.steps.size() >= budget) {
      throw Error(ErrorCode::InsertionBudgetExceeded,
                  "virtual handle insertion exceeded its budget of " + std::to_string(budget));
    }

    const std::size_t m = *chosen;
    const std::size_t site = part.farthest_sample[m];
    InsertionStep step{static_cast<HandleId>(m), site, score, part.r_d[m], 0.0, part.r_h[m], 0.0,
                       farthest_count(layout, m), 0};

    Handle added;
    added.id = static_cast<HandleId>(layout.handles.size());
    added.kind = HandleKind::Virtual;
    added.samples = {site};
    added.basis = options.virtual_basis;
    const std::size_t one = 1;
    layout.fields.push_back(multi_source_distances(domain, std::span(&site, one)));
    layout.handles.push_back(std::move(added));
    layout.partition = voronoi_from_fields(domain, layout.handles, layout.fields);

    step.rd_after = layout.partition.r_d[m];
    step.rh_after = layout.partition.r_h[m];
    step.farthest_after = farthest_count(layout, m);
    if (score > previous_score) ++trace.score_increases;
    previous_score = score;
    trace.steps.push_back(step);
  }
  trace.final_handles = layout.handles;
  return trace;
}

InsertionTrace insert_virtual_handles(const SampleDomain& domain, std::span<const Handle> handles,
                                      const InsertionOptions& options) {
  HandleLayout layout = make_layout(domain, std::vector<Handle>(handles.begin(), handles.end()));
  return insert_virtual_handles(domain, layout, options);
}

HarmonicFields solve_harmonic_fields(const HandleGraph& graph, std::span<const HandleId> real_ids,
                                     const HarmonicOptions& options) {
  const std::size_t n = graph.node_count;
  HarmonicFields out;
  out.real_ids.assign(real_ids.begin(), real_ids.end());
  std::sort(out.real_ids.begin(), out.real_ids.end());
  if (out.real_ids.empty()) throw Error(ErrorCode::InvalidArgument, "no real handles");

  std::vector<bool> pinned(n, false);
  for (HandleId id : out.real_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= n) {
      throw Error(ErrorCode::InvalidArgument, "real handle " + std::to_string(id) + " is not a graph node");
    }
    pinned[static_cast<std::size_t>(id)] = true;
  }

  std::vector<bool> reached(pinned);
  std::queue<std::size_t> frontier;
  for (HandleId id : out.real_ids) frontier.push(static_cast<std::size_t>(id));
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (int v : graph.neighbors[u]) {
      if (!reached[static_cast<std::size_t>(v)]) {
        reached[static_cast<std::size_t>(v)] = true;
        frontier.push(static_cast<std::size_t>(v));
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!reached[v]) {
      throw Error(ErrorCode::IsolatedVirtualHandle,
                  "virtual handle " + std::to_string(v) + " is not connected to any real handle");
    }
  }

  out.values.resize(out.real_ids.size());
  for (std::size_t r = 0; r < out.real_ids.size(); ++r) {
    auto& value = out.values[r];
    value.assign(n, 0.0);
    value[static_cast<std::size_t>(out.real_ids[r])] = 1.0;
    std::size_t iter = 0;
    for (;; ++iter) {
      double change = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        if (pinned[v]) continue;
        double acc = 0.0;
        for (int u : graph.neighbors[v]) acc += value[static_cast<std::size_t>(u)];
        const double next = acc / static_cast<double>(graph.neighbors[v].size());
        change = std::max(change, std::abs(next - value[v]));
        value[v] = next;
      }
      if (change < options.tolerance) break;
      if (iter + 1 >= options.max_iterations) {
        throw Error(ErrorCode::NonConvergence, "harmonic field did not converge");
      }
    }
    out.iterations = std::max(out.iterations, iter + 1);
  }

  out.sum.assign(n, 0.0);
  for (const auto& value : out.values) {
    for (std::size_t v = 0; v < n; ++v) out.sum[v] += value[v];
  }
  return out;
}

TransformMap propagate_transforms(const HarmonicFields& fields, const TransformMap& real_transforms) {
  std::vector<RigidMotion> motions;
  motions.reserve(fields.real_ids.size());
  for (HandleId id : fields.real_ids) {
    const auto it = real_transforms.find(id);
    if (it == real_transforms.end()) {
      throw Error(ErrorCode::MissingTransform, "no transform for real handle " + std::to_string(id));
    }
    if (!it->second.rigid()) {
      throw Error(ErrorCode::NonRigidRealTransform,
                  "real handle " + std::to_string(id) + " has a non-rigid transform");
    }
    motions.push_back(*it->second.rigid());
  }
  const Eigen::Vector4d reference = motions.front().rotation.coeffs();
  for (RigidMotion& m : motions) {
    if (m.rotation.coeffs().dot(reference) < 0.0) m.rotation.coeffs() *= -1.0;
  }

  TransformMap out;
  std::vector<bool> is_real(fields.node_count(), false);
  for (std::size_t r = 0; r < fields.real_ids.size(); ++r) {
    const HandleId id = fields.real_ids[r];
    is_real[static_cast<std::size_t>(id)] = true;
    out.emplace(id, real_transforms.at(id));
  }
  for (std::size_t v = 0; v < fields.node_count(); ++v) {
    if (is_real[v]) continue;
    const double total = fields.sum[v];
    if (!(total > 1e-12)) {
      throw Error(ErrorCode::DegenerateBlend, "harmonic weights vanish at handle " + std::to_string(v));
    }
    Eigen::Vector4d q = Eigen::Vector4d::Zero();
    Vec3 t = Vec3::Zero();
    for (std::size_t r = 0; r < motions.size(); ++r) {
      const double w = fields.values[r][v];
      q += w * motions[r].rotation.coeffs();
      t += w * motions[r].translation;
    }
    q /= total;
    t /= total;
    if (q.norm() < 1e-6) {
      throw Error(ErrorCode::DegenerateBlend, "rotations cancel at handle " + std::to_string(v));
    }
    RigidMotion blended;
    blended.rotation.coeffs() = q.normalized();
    blended.translation = t;
    out.emplace(static_cast<HandleId>(v), HandleTransform::from_rigid(blended));
  }
  return out;
}

}  // namespace mfd
