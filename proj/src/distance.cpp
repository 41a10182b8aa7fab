#include "mfd/distance.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <string>

#include "mfd/error.hpp"
#include "mfd/parallel.hpp"

namespace mfd {
namespace {

using QueueEntry = std::pair<double, std::uint32_t>;
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

void run_dijkstra(const SampleDomain& domain, std::vector<double>& dist, MinQueue& queue) {
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const Neighbor& nb : domain.neighbors(u)) {
      const double nd = d + nb.length;
      if (nd < dist[nb.index]) {
        dist[nb.index] = nd;
        queue.emplace(nd, nb.index);
      }
    }
  }
}

}  // namespace

DistanceField multi_source_distances(const SampleDomain& domain, std::span<const std::size_t> sources) {
  if (sources.empty()) throw Error(ErrorCode::EmptySources, "distance field needs at least one source");
  DistanceField field;
  field.sources.assign(sources.begin(), sources.end());
  std::sort(field.sources.begin(), field.sources.end());
  field.sources.erase(std::unique(field.sources.begin(), field.sources.end()), field.sources.end());
  if (field.sources.back() >= domain.size()) {
    throw Error(ErrorCode::InvalidArgument, "source " + std::to_string(field.sources.back()) +
                                                " is not a sample");
  }
  field.distance.assign(domain.size(), kInfinity);
  MinQueue queue;
  for (std::size_t s : field.sources) {
    field.distance[s] = 0.0;
    queue.emplace(0.0, static_cast<std::uint32_t>(s));
  }
  run_dijkstra(domain, field.distance, queue);
  return field;
}

void extend_distance_field(DistanceField& field, const SampleDomain& domain, std::size_t old_size) {
  auto& dist = field.distance;
  dist.resize(domain.size(), kInfinity);
  MinQueue queue;
  // Any improvement must route through a new sample, so seeding the new
  // samples with their best one-edge labels and relaxing is exact.
  for (std::size_t v = old_size; v < domain.size(); ++v) {
    for (const Neighbor& nb : domain.neighbors(v)) {
      dist[v] = std::min(dist[v], dist[nb.index] + nb.length);
    }
    if (dist[v] < kInfinity) queue.emplace(dist[v], static_cast<std::uint32_t>(v));
  }
  run_dijkstra(domain, dist, queue);
}

std::vector<DistanceField> handle_distance_fields(const SampleDomain& domain,
                                                  std::span<const Handle> handles) {
  std::vector<DistanceField> fields(handles.size());
  parallel_for(handles.size(), [&](std::size_t h) {
    fields[h] = multi_source_distances(domain, handles[h].samples);
  });
  return fields;
}

VoronoiPartition voronoi_partition(const SampleDomain& domain, std::span<const Handle> handles) {
  if (handles.empty()) throw Error(ErrorCode::InvalidArgument, "partition needs at least one handle");
  validate_handles(handles, domain.size());
  const auto fields = handle_distance_fields(domain, handles);
  return voronoi_from_fields(domain, handles, fields);
}

VoronoiPartition voronoi_from_fields(const SampleDomain& domain, std::span<const Handle> handles,
                                     std::span<const DistanceField> fields) {
  const std::size_t n = domain.size();
  const std::size_t count = handles.size();
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "partition needs at least one handle");
  if (fields.size() != count) throw Error(ErrorCode::InvalidArgument, "one distance field per handle");

  VoronoiPartition part;
  part.cell_of.assign(n, -1);
  std::vector<double> best(n, kInfinity);
  for (std::size_t h = 0; h < count; ++h) {
    const auto& d = fields[h].distance;
    for (std::size_t p = 0; p < n; ++p) {
      if (d[p] < best[p]) {
        best[p] = d[p];
        part.cell_of[p] = static_cast<int>(h);
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (part.cell_of[p] < 0) {
      throw Error(ErrorCode::UncoveredComponent,
                  "component " + std::to_string(domain.component_of(p)) + " (containing sample " +
                      std::to_string(p) + ") has no handle");
    }
  }

  part.r_d.assign(count, 0.0);
  part.farthest_sample.resize(count);
  std::vector<bool> seen(count, false);
  for (std::size_t p = 0; p < n; ++p) {
    const auto h = static_cast<std::size_t>(part.cell_of[p]);
    if (!seen[h] || best[p] > part.r_d[h]) {
      seen[h] = true;
      part.r_d[h] = best[p];
      part.farthest_sample[h] = p;
    }
  }
  for (std::size_t h = 0; h < count; ++h) {
    if (!seen[h]) part.farthest_sample[h] = handles[h].origin();
  }

  part.r_h.assign(count, kInfinity);
  for (std::size_t h = 0; h < count; ++h) {
    const auto& d = fields[h].distance;
    for (std::size_t j = 0; j < count; ++j) {
      if (j == h) continue;
      for (std::size_t s : handles[j].samples) {
        if (d[s] > 0.0 && d[s] < part.r_h[h]) part.r_h[h] = d[s];
      }
    }
  }

  for (const Edge& e : domain.edges()) {
    const int a = part.cell_of[e.a];
    const int b = part.cell_of[e.b];
    if (a != b) part.adjacency.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(part.adjacency.begin(), part.adjacency.end());
  part.adjacency.erase(std::unique(part.adjacency.begin(), part.adjacency.end()), part.adjacency.end());
  return part;
}

HandleGraph delaunay_graph(const VoronoiPartition& partition) {
  HandleGraph graph;
  graph.node_count = partition.handle_count();
  graph.edges = partition.adjacency;
  graph.neighbors.resize(graph.node_count);
  for (const auto& [a, b] : graph.edges) {
    graph.neighbors[static_cast<std::size_t>(a)].push_back(b);
    graph.neighbors[static_cast<std::size_t>(b)].push_back(a);
  }
  for (std::size_t i = 0; i < graph.node_count; ++i) {
    auto& nb = graph.neighbors[i];
    std::sort(nb.begin(), nb.end());
    if (nb.empty()) graph.isolated.push_back(static_cast<int>(i));
  }
  return graph;
}

}  // namespace mfd
