#include "mfd/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "mfd/error.hpp"
#include "mfd/kdtree.hpp"

namespace mfd {
namespace {

void validate_positions(std::span<const Vec3> positions, int dim) {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Vec3& p = positions[i];
    if (!p.allFinite()) {
      throw Error(ErrorCode::DegenerateInput, "sample " + std::to_string(i) + " is not finite");
    }
    if (dim == 2 && p.z() != 0.0) {
      throw Error(ErrorCode::DegenerateInput,
                  "sample " + std::to_string(i) + " has a z component in a 2D domain");
    }
  }
}

std::vector<std::size_t> label_components(std::size_t n, const std::vector<Edge>& edges,
                                          std::size_t& count) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const Edge& e : edges) {
    const std::size_t ra = find(e.a);
    const std::size_t rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  // Components are numbered in order of their lowest member.
  std::vector<std::size_t> label(n);
  std::vector<std::size_t> root_label(n, static_cast<std::size_t>(-1));
  count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_label[r] == static_cast<std::size_t>(-1)) root_label[r] = count++;
    label[i] = root_label[r];
  }
  return label;
}

}  // namespace

int default_k(int dim) { return dim == 3 ? 12 : 8; }

std::vector<std::vector<std::size_t>> SampleDomain::components() const {
  std::vector<std::vector<std::size_t>> out(component_count_);
  for (std::size_t i = 0; i < size(); ++i) out[component_of_[i]].push_back(i);
  return out;
}

SampleDomain assemble_domain(int dim, int k, std::vector<Vec3> positions, std::vector<Edge> edges) {
  const std::size_t n = positions.size();
  for (Edge& e : edges) {
    if (e.a > e.b) std::swap(e.a, e.b);
    e.length = (positions[e.a] - positions[e.b]).norm();
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& x, const Edge& y) { return x.a == y.a && x.b == y.b; }),
              edges.end());

  SampleDomain d;
  d.dim_ = dim;
  d.k_ = k;
  d.offsets_.assign(n + 1, 0);
  for (const Edge& e : edges) {
    ++d.offsets_[e.a + 1];
    ++d.offsets_[e.b + 1];
  }
  std::partial_sum(d.offsets_.begin(), d.offsets_.end(), d.offsets_.begin());
  d.adjacency_.resize(d.offsets_[n]);
  std::vector<std::size_t> fill(d.offsets_.begin(), d.offsets_.end() - 1);
  for (const Edge& e : edges) {
    d.adjacency_[fill[e.a]++] = {static_cast<std::uint32_t>(e.b), e.length};
    d.adjacency_[fill[e.b]++] = {static_cast<std::uint32_t>(e.a), e.length};
  }
  d.component_of_ = label_components(n, edges, d.component_count_);
  d.positions_ = std::move(positions);
  d.edges_ = std::move(edges);
  return d;
}

SampleDomain build_domain(std::span<const Vec3> positions, int dim, int k) {
  if (dim != 2 && dim != 3) {
    throw Error(ErrorCode::DegenerateInput, "dim must be 2 or 3");
  }
  if (positions.size() < 2) {
    throw Error(ErrorCode::DegenerateInput, "a domain needs at least 2 samples");
  }
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  validate_positions(positions, dim);

  const KdTree tree(positions, dim);
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), positions.size() - 1);
  std::vector<Edge> edges;
  edges.reserve(positions.size() * kk);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto hits = tree.nearest(positions[i], kk, i);
    if (!hits.empty() && std::sqrt(hits.front().squared_distance) < kCoincidenceTolerance) {
      throw Error(ErrorCode::DuplicatePoints, "samples " + std::to_string(i) + " and " +
                                                  std::to_string(hits.front().index) +
                                                  " coincide");
    }
    for (const NeighborHit& h : hits) edges.push_back({i, h.index, 0.0});
  }
  return assemble_domain(dim, k, std::vector<Vec3>(positions.begin(), positions.end()),
                         std::move(edges));
}

InsertResult insert_points(const SampleDomain& domain, std::span<const Vec3> new_positions, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  validate_positions(new_positions, domain.dim());

  std::vector<Vec3> positions(domain.positions().begin(), domain.positions().end());
  std::vector<Edge> edges = domain.edges();
  InsertResult result;
  result.indices.reserve(new_positions.size());

  using Candidate = std::pair<double, std::size_t>;
  for (const Vec3& q : new_positions) {
    // Linear scan keeps a single insertion O(n); a kd-tree rebuild would not.
    std::priority_queue<Candidate> best;
    std::size_t coincident = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const double d2 = (positions[i] - q).squaredNorm();
      if (std::sqrt(d2) < kCoincidenceTolerance) {
        coincident = i;
        break;
      }
      if (best.size() < static_cast<std::size_t>(k)) {
        best.emplace(d2, i);
      } else if (Candidate{d2, i} < best.top()) {
        best.pop();
        best.emplace(d2, i);
      }
    }
    if (coincident != static_cast<std::size_t>(-1)) {
      result.indices.push_back(coincident);
      continue;
    }
    const std::size_t index = positions.size();
    positions.push_back(q);
    while (!best.empty()) {
      edges.push_back({best.top().second, index, 0.0});
      best.pop();
    }
    result.indices.push_back(index);
  }
  result.domain = assemble_domain(domain.dim(), domain.k(), std::move(positions), std::move(edges));
  return result;
}

}  // namespace mfd
