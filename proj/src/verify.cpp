#include "mfd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>

#include "mfd/error.hpp"
#include "mfd/kdtree.hpp"

namespace mfd {
namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

CheckRow row(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok ? CheckStatus::Pass : CheckStatus::Fail, std::move(detail)};
}

CheckRow skip(std::string name, std::string detail) { return {std::move(name), CheckStatus::Skip, std::move(detail)}; }

Mat4 random_rigid(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RigidMotion m;
  if (dim == 2) {
    m.rotation = Eigen::AngleAxisd(M_PI * u(rng), Vec3::UnitZ());
    m.translation = Vec3(u(rng), u(rng), 0.0);
  } else {
    m.rotation = Eigen::Quaterniond(u(rng), u(rng), u(rng), u(rng)).normalized();
    m.translation = Vec3(u(rng), u(rng), u(rng));
  }
  return compose(m);
}

Mat4 random_affine(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat4 m = Mat4::Identity();
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) m(r, c) = (r == c ? 1.0 : 0.0) + 0.5 * u(rng);
    m(r, 3) = u(rng);
  }
  return m;
}

CheckRow check_partition(const Rig& rig) {
  const WeightField& w = rig.weights;
  double worst = 0.0;
  for (std::size_t p = 0; p < w.sample_count(); ++p) {
    double sum = 0.0;
    for (const WeightEntry& e : w.row(p)) sum += e.weight;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return row("partition_of_unity", worst <= 1e-9, "max |sum - 1| = " + fmt(worst));
}

CheckRow check_nonnegative(const Rig& rig) {
  const WeightField& w = rig.weights;
  double lowest = 0.0;
  for (std::size_t p = 0; p < w.sample_count(); ++p) {
    for (const WeightEntry& e : w.row(p)) lowest = std::min(lowest, e.weight);
  }
  return row("non_negativity", lowest >= 0.0, "min weight = " + fmt(lowest));
}

CheckRow check_interpolation(const Rig& rig, std::mt19937_64& rng) {
  if (!rig.interpolating()) return skip("interpolation", "approximating regime");
  const WeightField& w = rig.weights;
  std::size_t bad = 0;
  for (const Handle& h : rig.handles()) {
    for (std::size_t s : h.samples) {
      for (std::size_t slot = 0; slot < w.handle_count(); ++slot) {
        bad += w.weight(s, slot) != (static_cast<HandleId>(slot) == h.id ? 1.0 : 0.0);
      }
    }
  }
  TransformMap real;
  for (std::size_t i = 0; i < rig.real_count; ++i) {
    real[static_cast<HandleId>(i)] = HandleTransform::from_matrix(random_rigid(rng, rig.domain.dim()));
  }
  const TransformMap all = expand_transforms(rig, real);
  const DeformationResult result = deform(rig.domain, w, all);
  double worst = 0.0;
  for (std::size_t i = 0; i < rig.real_count; ++i) {
    for (std::size_t s : rig.handles()[i].samples) {
      const Vec3 expect = all.at(static_cast<HandleId>(i)).apply(rig.domain.position(s));
      worst = std::max(worst, (result.positions[s] - expect).norm());
    }
  }
  return row("interpolation", bad == 0 && worst <= 1e-9,
             std::to_string(bad) + " non-delta weights at handle samples, max origin error " + fmt(worst));
}

CheckRow check_consistency(const Rig& rig, std::mt19937_64& rng, std::size_t count) {
  const auto positions = rig.domain.positions();
  double worst = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    const Mat4 m = t % 2 == 0 ? random_rigid(rng, rig.domain.dim()) : random_affine(rng, rig.domain.dim());
    const HandleTransform transform = HandleTransform::from_matrix(m);
    TransformMap all;
    for (const Handle& h : rig.handles()) all[h.id] = transform;
    const std::vector<Vec3> out = blend_positions(positions, rig.weights, all);
    for (std::size_t p = 0; p < out.size(); ++p) {
      const double err = (out[p] - transform.apply(positions[p])).norm() / (1.0 + positions[p].norm());
      worst = std::max(worst, err);
    }
  }
  return row("consistency", worst <= 1e-9,
             std::to_string(count) + " uniform transforms, max relative error " + fmt(worst));
}

CheckRow check_local_maxima(const Rig& rig) {
  const LocalMaximaReport report = scan_local_maxima(rig.domain, rig.weights, rig.handles());
  std::string detail = std::to_string(report.total()) + " local maxima";
  for (std::size_t i = 0; i < report.offending.size(); ++i) {
    if (!report.offending[i].empty()) {
      detail += "; handle " + std::to_string(report.handle_ids[i]) + " at sample " +
                std::to_string(report.offending[i].front());
      break;
    }
  }
  return row("no_local_maxima", report.empty(), detail);
}

CheckRow check_insertion(const Rig& rig) {
  const VoronoiPartition& part = rig.layout.partition;
  double worst_delta = -kInfinity;
  for (std::size_t h = 0; h < part.handle_count(); ++h) {
    if (std::isfinite(part.r_h[h])) worst_delta = std::max(worst_delta, part.delta(h));
  }
  std::size_t bad_steps = 0;
  for (const InsertionStep& s : rig.trace.steps) {
    const bool reduced = s.rd_after < s.rd_before ||
                         (s.rd_after == s.rd_before && s.farthest_after < s.farthest_before);
    bad_steps += !(s.rh_after == s.rh_before && reduced);
  }
  const bool resolved = !rig.interpolating() || worst_delta < 0.0 || part.handle_count() == 1;
  std::string detail = std::to_string(rig.trace.steps.size()) + " insertions, " + std::to_string(bad_steps) +
                       " steps violating r_h-invariance or r_d reduction, " +
                       std::to_string(rig.trace.score_increases) + " score increases";
  if (std::isfinite(worst_delta)) detail += ", final max delta " + fmt(worst_delta);
  return row("virtual_insertion", resolved && bad_steps == 0, detail);
}

CheckRow check_harmonic(const Rig& rig) {
  if (!rig.harmonic) return skip("harmonic_fields", "no virtual handles");
  const HarmonicFields& f = *rig.harmonic;
  const HandleGraph graph = delaunay_graph(rig.layout.partition);
  double range_violation = 0.0;
  double mean_violation = 0.0;
  std::vector<bool> pinned(f.node_count(), false);
  for (HandleId id : f.real_ids) pinned[static_cast<std::size_t>(id)] = true;
  for (std::size_t r = 0; r < f.values.size(); ++r) {
    for (std::size_t v = 0; v < f.node_count(); ++v) {
      const double x = f.values[r][v];
      range_violation = std::max({range_violation, -x, x - 1.0});
      if (pinned[v]) {
        const double expect = f.real_ids[r] == static_cast<HandleId>(v) ? 1.0 : 0.0;
        range_violation = std::max(range_violation, std::abs(x - expect));
        continue;
      }
      double mean = 0.0;
      for (int u : graph.neighbors[v]) mean += f.values[r][static_cast<std::size_t>(u)];
      mean /= static_cast<double>(graph.neighbors[v].size());
      mean_violation = std::max(mean_violation, std::abs(mean - x));
    }
  }
  return row("harmonic_fields", range_violation == 0.0 && mean_violation <= 1e-8,
             "boundary/range error " + fmt(range_violation) + ", mean-value error " + fmt(mean_violation));
}

CheckRow check_dijkstra(const Rig& rig, std::mt19937_64& rng, std::size_t graphs, std::size_t nodes) {
  const SampleDomain& domain = rig.domain;
  if (domain.size() == 0) return skip("dijkstra_oracle", "empty domain");
  std::uniform_int_distribution<std::size_t> pick(0, domain.size() - 1);
  double worst = 0.0;
  for (std::size_t g = 0; g < graphs; ++g) {
    // Breadth-first ball around a random sample, then its induced subgraph.
    std::vector<std::size_t> members;
    std::vector<int> local(domain.size(), -1);
    std::queue<std::size_t> frontier;
    const std::size_t start = pick(rng);
    local[start] = 0;
    members.push_back(start);
    frontier.push(start);
    while (!frontier.empty() && members.size() < nodes) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (const Neighbor& n : domain.neighbors(u)) {
        if (local[n.index] >= 0 || members.size() >= nodes) continue;
        local[n.index] = static_cast<int>(members.size());
        members.push_back(n.index);
        frontier.push(n.index);
      }
    }
    std::vector<Vec3> points;
    for (std::size_t m : members) points.push_back(domain.position(m));
    std::vector<Edge> edges;
    for (const Edge& e : domain.edges()) {
      if (local[e.a] >= 0 && local[e.b] >= 0) {
        const auto a = static_cast<std::size_t>(local[e.a]);
        const auto b = static_cast<std::size_t>(local[e.b]);
        edges.push_back({std::min(a, b), std::max(a, b), e.length});
      }
    }
    const SampleDomain sub = assemble_domain(domain.dim(), domain.k(), points, edges);
    const std::size_t source = 0;
    const DistanceField fast = multi_source_distances(sub, std::span(&source, 1));
    const std::vector<double> slow = bellman_ford(sub.size(), sub.edges(), source);
    for (std::size_t i = 0; i < slow.size(); ++i) {
      if (std::isinf(slow[i]) != std::isinf(fast.distance[i])) {
        worst = kInfinity;
      } else if (std::isfinite(slow[i])) {
        worst = std::max(worst, std::abs(slow[i] - fast.distance[i]) / std::max(1.0, slow[i]));
      }
    }
  }
  return row("dijkstra_oracle", worst <= 1e-12,
             std::to_string(graphs) + " subgraphs of <= " + std::to_string(nodes) + " nodes, max relative error " +
                 fmt(worst));
}

CheckRow check_symmetry(const Rig& rig, int axis) {
  const auto sigma = mirror_permutation(rig.domain, axis);
  if (!sigma) return skip("symmetry", "sample set is not mirror-symmetric");
  const auto handles = rig.handles();
  std::vector<std::size_t> handle_map(handles.size());
  for (const Handle& h : handles) {
    std::vector<std::size_t> mirrored;
    for (std::size_t s : h.samples) mirrored.push_back((*sigma)[s]);
    std::sort(mirrored.begin(), mirrored.end());
    const auto match = std::find_if(handles.begin(), handles.end(), [&](const Handle& other) {
      std::vector<std::size_t> own = other.samples;
      std::sort(own.begin(), own.end());
      return own == mirrored && to_json(other.basis) == to_json(h.basis);
    });
    if (match == handles.end()) {
      return skip("symmetry", "handle " + std::to_string(h.id) + " has no mirrored counterpart");
    }
    handle_map[static_cast<std::size_t>(h.id)] = static_cast<std::size_t>(match->id);
  }
  double worst = 0.0;
  for (std::size_t p = 0; p < rig.domain.size(); ++p) {
    for (std::size_t i = 0; i < handles.size(); ++i) {
      worst = std::max(worst, std::abs(rig.weights.weight(p, i) - rig.weights.weight((*sigma)[p], handle_map[i])));
    }
  }
  return row("symmetry", worst <= 1e-9, "max |w_i(p) - w_s(i)(s(p))| = " + fmt(worst));
}

}  // namespace

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skip: return "skip";
  }
  return "?";
}

std::vector<double> bellman_ford(std::size_t node_count, std::span<const Edge> edges, std::size_t source) {
  std::vector<double> dist(node_count, kInfinity);
  dist.at(source) = 0.0;
  for (std::size_t round = 0; round + 1 < std::max<std::size_t>(node_count, 2); ++round) {
    bool changed = false;
    for (const Edge& e : edges) {
      if (dist[e.a] + e.length < dist[e.b]) {
        dist[e.b] = dist[e.a] + e.length;
        changed = true;
      }
      if (dist[e.b] + e.length < dist[e.a]) {
        dist[e.a] = dist[e.b] + e.length;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

std::optional<std::vector<std::size_t>> mirror_permutation(const SampleDomain& domain, int axis) {
  if (axis < 0 || axis >= domain.dim()) throw Error(ErrorCode::InvalidArgument, "mirror axis out of range");
  const auto positions = domain.positions();
  if (positions.empty()) return std::nullopt;
  Vec3 lo = positions.front();
  Vec3 hi = positions.front();
  for (const Vec3& p : positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double centre = 0.5 * (lo[axis] + hi[axis]);
  const double tol = 1e-9 * std::max(1.0, (hi - lo).norm());
  const KdTree tree(positions, domain.dim());
  std::vector<std::size_t> sigma(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Vec3 q = positions[i];
    q[axis] = 2.0 * centre - q[axis];
    const auto hit = tree.nearest(q, 1);
    if (hit.empty() || hit.front().squared_distance > tol * tol) return std::nullopt;
    sigma[i] = hit.front().index;
  }
  return sigma;
}

std::vector<CheckRow> run_checks(const Rig& rig, const CheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::vector<CheckRow> rows;
  rows.push_back(check_partition(rig));
  rows.push_back(check_nonnegative(rig));
  rows.push_back(check_interpolation(rig, rng));
  rows.push_back(check_consistency(rig, rng, options.random_transforms));
  rows.push_back(check_local_maxima(rig));
  rows.push_back(check_insertion(rig));
  rows.push_back(check_harmonic(rig));
  rows.push_back(check_dijkstra(rig, rng, options.oracle_graphs, options.oracle_nodes));
  if (options.mirror_axis) {
    rows.push_back(check_symmetry(rig, *options.mirror_axis));
  } else {
    rows.push_back(skip("symmetry", "no mirror given"));
  }
  return rows;
}

}  // namespace mfd
