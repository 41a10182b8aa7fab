// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../fixtures.hpp"
#include "../oracles.hpp"
#include "mfd/deform.hpp"
#include "mfd/io.hpp"
#include "mfd/pipeline.hpp"
#include "mfd/session.hpp"
#include "mfd/verify.hpp"

using namespace mfd;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Fixture {
  std::string name;
  Rig rig;
  std::optional<int> mirror_axis;
};

Rig load_rig(const std::string& domain_file, const std::string& handle_file) {
  const fs::path dir = MFD_FIXTURES_DIR;
  const DomainFile df = parse_domain(read_json_file(dir / domain_file));
  const SampleDomain domain = build_domain(df.points, df.dim, df.effective_k());
  const HandleFile hf = parse_handle_file(read_json_file(dir / handle_file), df.dim);
  BoundHandles bound = bind_handles(domain, hf.handles, hf.default_basis.value_or(quintic_basis()));
  RigOptions options;
  options.alpha = hf.alpha.value_or(1.0);
  return solve_rig(std::move(bound.domain), std::move(bound.handles), options);
}

std::vector<Fixture> bundled_fixtures() {
  std::vector<Fixture> out;
  const std::pair<const char*, const char*> pairs[] = {
      {"line11.json", "line11_close_handles.json"}, {"line11.json", "line11_far_handles.json"},
      {"disk.json", "disk_handles.json"},           {"annulus.json", "annulus_handles.json"},
      {"grid.json", "grid_handles.json"},           {"cage.json", "cage_handles.json"},
      {"bar.json", "bar_handles.json"}};
  for (const auto& [d, h] : pairs) {
    Fixture f;
    f.name = std::string(d) + "+" + h;
    f.rig = load_rig(d, h);
    if (std::string(d) == "grid.json") f.mirror_axis = 0;
    out.push_back(std::move(f));
  }
  return out;
}

// Disk and annulus samplings, 1k to 20k samples, 2 to 10 real handles. Odd
// fixtures turn handle 0 into a short radial segment.
std::vector<Fixture> random_fixtures(double* solve_seconds) {
  std::vector<Fixture> out;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> log_size(std::log(1000.0), std::log(20000.0));
  std::uniform_int_distribution<int> handle_count(2, 10);
  *solve_seconds = 0.0;
  for (int f = 0; f < 20; ++f) {
    const bool ring = f % 2 == 1;
    const double r_in = ring ? 0.35 : 0.0;
    const auto target = static_cast<std::size_t>(std::exp(log_size(rng)));
    const int handles = handle_count(rng);
    const auto pts = fixture::annulus(target, r_in, 100 + f);
    const auto sites = fixture::spread_samples(pts, handles, 0.3, 200 + f);

    std::vector<HandleSpec> specs;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      HandleSpec spec;
      if (i == 0 && f % 2 == 1) {
        const Vec3 p = pts[sites[i]];
        const Vec3 dir = p.norm() > 0 ? Vec3(p / p.norm()) : Vec3(Vec3::UnitX());
        const double r = std::clamp(p.norm(), r_in + 0.08, 0.8);
        spec.kind = HandleKind::Segment;
        spec.points = {dir * r, dir * (r + 0.12)};
      } else {
        spec.sample = sites[i];
      }
      specs.push_back(spec);
    }
    const auto start = Clock::now();
    const SampleDomain domain = build_domain(pts, 2, default_k(2));
    BoundHandles bound = bind_handles(domain, specs, quintic_basis());
    Fixture fx;
    fx.name = std::string(ring ? "annulus" : "disk") + "-" + std::to_string(pts.size()) + "-h" +
              std::to_string(sites.size());
    fx.rig = solve_rig(std::move(bound.domain), std::move(bound.handles));
    *solve_seconds += seconds_since(start);
    out.push_back(std::move(fx));
  }
  return out;
}

Mat4 random_affine(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-1, 1);
  Mat4 m = Mat4::Identity();
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) m(r, c) += 0.8 * u(rng);
    m(r, 3) = 3 * u(rng);
  }
  return m;
}

RigidMotion random_rigid(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-1, 1);
  RigidMotion m;
  const Vec3 axis = dim == 2 ? Vec3(Vec3::UnitZ()) : Vec3(u(rng), u(rng), u(rng) + 2.0).normalized();
  m.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(M_PI * u(rng), axis));
  m.translation = Vec3(u(rng), u(rng), dim == 2 ? 0.0 : u(rng));
  return m;
}

// ---------------------------------------------------------------------------

Outcome partition_of_unity(const std::vector<Fixture>& fixtures, double solve_seconds) {
  double worst = 0.0;
  for (const Fixture& f : fixtures) {
    for (std::size_t p = 0; p < f.rig.domain.size(); ++p) {
      double sum = 0.0;
      for (const WeightEntry& e : f.rig.weights.row(p)) sum += e.weight;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  Outcome o;
  o.pass = worst <= 1e-9 && solve_seconds <= 60.0;
  o.detail = "max |sum-1| " + fmt(worst) + " over " + std::to_string(fixtures.size()) + " fixtures, solve " +
             fmt(solve_seconds) + " s";
  return o;
}

Outcome interpolation(const std::vector<const Fixture*>& fixtures) {
  std::mt19937_64 rng(7);
  double indicator_err = 0.0;
  double origin_err = 0.0;
  std::size_t checked = 0;
  for (const Fixture* f : fixtures) {
    const Rig& rig = f->rig;
    if (!rig.interpolating()) continue;
    ++checked;
    for (std::size_t slot = 0; slot < rig.real_count; ++slot) {
      for (std::size_t s : rig.handles()[slot].samples) {
        const auto row = rig.weights.dense_row(s);
        for (std::size_t j = 0; j < row.size(); ++j) {
          indicator_err = std::max(indicator_err, std::abs(row[j] - (j == slot ? 1.0 : 0.0)));
        }
      }
    }
    for (int trial = 0; trial < 5; ++trial) {
      TransformMap real;
      for (std::size_t i = 0; i < rig.real_count; ++i) {
        real[static_cast<HandleId>(i)] = HandleTransform::from_rigid(random_rigid(rng, rig.domain.dim()));
      }
      const auto out = deform(rig.domain, rig.weights, expand_transforms(rig, real));
      for (std::size_t i = 0; i < rig.real_count; ++i) {
        for (std::size_t s : rig.handles()[i].samples) {
          const Vec3 expect = real[static_cast<HandleId>(i)].apply(rig.domain.position(s));
          origin_err = std::max(origin_err, (out.positions[s] - expect).norm());
        }
      }
    }
  }
  Outcome o;
  o.pass = indicator_err <= 1e-12 && origin_err <= 1e-9 && checked > 0;
  o.detail = std::to_string(checked) + " interpolating fixtures, indicator dev " + fmt(indicator_err) +
             ", origin err " + fmt(origin_err);
  return o;
}

Outcome consistency(const std::vector<const Fixture*>& fixtures) {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    for (const Fixture* f : fixtures) {
      const Rig& rig = f->rig;
      const HandleTransform t = HandleTransform::from_matrix(random_affine(rng, rig.domain.dim()));
      TransformMap all;
      for (const Handle& h : rig.handles()) all[h.id] = t;
      const auto out = deform(rig.domain, rig.weights, all);
      for (std::size_t p = 0; p < rig.domain.size(); ++p) {
        const Vec3& x = rig.domain.position(p);
        worst = std::max(worst, (out.positions[p] - t.apply(x)).norm() / (1.0 + x.norm()));
      }
    }
  }
  return {worst <= 1e-9, "100 affine maps x " + std::to_string(fixtures.size()) + " fixtures, max err " + fmt(worst)};
}

Outcome c2_basis() {
  const double h = 1e-4;
  std::vector<std::pair<std::string, BezierBasis>> bases = {{"n5", quintic_basis()},
                                                             {"n6", make_bezier_basis(6)},
                                                             {"n8", make_bezier_basis(8)}};
  const std::vector<double> custom = {0.9, 0.2};
  bases.emplace_back("n7", make_bezier_basis(7, std::span<const double>(custom)));

  double end_d1 = 0.0;
  double end_d2 = 0.0;
  double analytic_end = 0.0;
  double interior = 0.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(h, 1.0 - h);
  for (const auto& [name, b] : bases) {
    const auto phi = [&](double t) { return eval_bezier(b, t); };
    for (double t : {0.0, 1.0}) {
      end_d1 = std::max(end_d1, std::abs((phi(t + h) - phi(t - h)) / (2 * h)));
      end_d2 = std::max(end_d2, std::abs((phi(t + h) - 2 * phi(t) + phi(t - h)) / (h * h)));
      for (int order : {1, 2}) analytic_end = std::max(analytic_end, std::abs(eval_bezier_derivative(b, t, order)));
    }
    for (int i = 0; i < 100; ++i) {
      const double t = u(rng);
      const double fd1 = (phi(t + h) - phi(t - h)) / (2 * h);
      const double fd2 = (phi(t + h) - 2 * phi(t) + phi(t - h)) / (h * h);
      const double a1 = eval_bezier_derivative(b, t, 1);
      const double a2 = eval_bezier_derivative(b, t, 2);
      interior = std::max(interior, std::abs(fd1 - a1) / std::max(1.0, std::abs(a1)));
      interior = std::max(interior, std::abs(fd2 - a2) / std::max(1.0, std::abs(a2)));
    }
  }
  double quintic = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double t = i / 10000.0;
    quintic = std::max(quintic, std::abs(eval_bezier(quintic_basis(), t) - oracle::smoothstep_complement(t)));
  }
  Outcome o;
  o.pass = end_d1 <= 1e-6 && end_d2 <= 1e-6 && interior <= 1e-6 && quintic <= 1e-12;
  o.detail = "endpoint FD phi' " + fmt(end_d1) + ", FD phi'' " + fmt(end_d2) + " (analytic " + fmt(analytic_end) +
             "), interior rel " + fmt(interior) + ", quintic " + fmt(quintic);
  return o;
}

Outcome shortest_path_oracle() {
  std::mt19937_64 rng(13);
  double worst = 0.0;
  std::size_t mismatched_inf = 0;
  for (int g = 0; g < 200; ++g) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 50)(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(n / 2, 3 * n)(rng);
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    std::uniform_real_distribution<double> coord(0.0, 10.0);
    std::vector<Vec3> pos;
    for (std::size_t i = 0; i < n; ++i) pos.emplace_back(coord(rng), coord(rng), 0.0);
    std::vector<Edge> edges;
    std::vector<oracle::Arc> arcs;
    for (std::size_t e = 0; e < m; ++e) {
      const std::size_t a = node(rng);
      const std::size_t b = node(rng);
      if (a == b) continue;
      const double w = (pos[a] - pos[b]).norm();
      edges.push_back({std::min(a, b), std::max(a, b), w});
      arcs.push_back({a, b, w});
    }
    std::vector<std::size_t> sources = {node(rng)};
    if (g % 3 == 0) sources.push_back(node(rng));
    const SampleDomain d = assemble_domain(2, 1, pos, edges);
    const auto got = multi_source_distances(d, sources).distance;
    const auto expect = oracle::bellman_ford(n, arcs, sources);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isinf(expect[i]) || std::isinf(got[i])) {
        mismatched_inf += std::isinf(expect[i]) != std::isinf(got[i]);
        continue;
      }
      worst = std::max(worst, expect[i] == 0.0 ? std::abs(got[i]) : std::abs(got[i] - expect[i]) / expect[i]);
    }
  }
  return {worst <= 1e-12 && mismatched_inf == 0,
          "200 graphs, max rel err " + fmt(worst) + ", reachability mismatches " + std::to_string(mismatched_inf)};
}

Outcome algorithm1(const std::vector<const Fixture*>& fixtures) {
  const Fixture* close = nullptr;
  for (const Fixture* f : fixtures) {
    if (f->name == "line11.json+line11_close_handles.json") close = f;
  }
  Outcome o;
  std::ostringstream detail;
  if (!close || close->rig.trace.steps.empty() || close->rig.trace.steps.front().inserted_index != 10) {
    o.pass = false;
    detail << "close-handle first insertion not at sample 10; ";
  } else {
    detail << "close-handle first insertion at sample 10; ";
  }
  std::size_t steps = 0;
  std::size_t non_strict = 0;
  std::size_t rh_moved = 0;
  std::size_t over_budget = 0;
  double max_delta = -std::numeric_limits<double>::infinity();
  for (const Fixture* f : fixtures) {
    const Rig& rig = f->rig;
    bool compact = true;
    for (const Handle& h : rig.handles()) compact = compact && is_compact(h.basis);
    if (!compact) continue;
    for (const InsertionStep& s : rig.trace.steps) {
      ++steps;
      non_strict += !(s.rd_after < s.rd_before);
      rh_moved += s.rh_after != s.rh_before;
    }
    over_budget += rig.trace.steps.size() > default_insertion_budget(rig.real_count);
    for (std::size_t h = 0; h < rig.layout.partition.handle_count(); ++h) {
      max_delta = std::max(max_delta, rig.layout.partition.delta(h));
    }
  }
  o.pass = o.pass && non_strict == 0 && rh_moved == 0 && over_budget == 0 && max_delta <= 0.0;
  detail << steps << " steps, non-strict r_d " << non_strict << ", r_h changed " << rh_moved << ", over budget "
         << over_budget << ", max final delta " << fmt(max_delta);
  o.detail = detail.str();
  return o;
}

Outcome no_local_maxima(const std::vector<Fixture>& bundled) {
  std::ostringstream detail;
  bool clean = true;
  for (const Fixture& f : bundled) {
    const auto report = scan_local_maxima(f.rig.domain, f.rig.weights, f.rig.handles());
    if (!report.empty()) {
      clean = false;
      detail << f.name << ": " << report.total() << " maxima (";
      for (std::size_t slot = 0; slot < report.offending.size(); ++slot) {
        for (std::size_t s : report.offending[slot]) {
          detail << "h" << report.handle_ids[slot] << "@" << s << " w=" << std::setprecision(6) << f.rig.weights.weight(s, slot) << " ";
        }
      }
      detail << "); ";
    }
  }
  if (clean) detail << bundled.size() << " bundled fixtures clean; ";

  // Positive control: raise one mid-field weight of the annulus fixture above its neighbors.
  const Fixture* annulus = nullptr;
  for (const Fixture& f : bundled) {
    if (f.name.rfind("annulus.json", 0) == 0) annulus = &f;
  }
  bool detected = false;
  if (annulus) {
    const Rig& rig = annulus->rig;
    std::vector<double> dense = rig.weights.dense();
    const std::size_t k = rig.weights.handle_count();
    const auto column = rig.weights.column(0);
    std::size_t target = rig.domain.size();
    for (std::size_t s = 0; s < rig.domain.size() && target == rig.domain.size(); ++s) {
      if (column[s] > 0.2 && column[s] < 0.8) target = s;
    }
    double top = 0.0;
    for (const Neighbor& nb : rig.domain.neighbors(target)) top = std::max(top, column[nb.index]);
    dense[target * k] = std::min(1.0, top + 0.05);
    const auto bumped = WeightField::from_dense({rig.weights.handle_ids().begin(), rig.weights.handle_ids().end()},
                                                rig.domain.size(), dense);
    const auto report = scan_local_maxima(rig.domain, bumped, rig.handles());
    const auto& flagged = report.offending[0];
    detected = std::find(flagged.begin(), flagged.end(), target) != flagged.end();
    detail << "bump at sample " << target << (detected ? " detected" : " missed");
  }
  return {clean && detected, detail.str()};
}

Outcome symmetry(const std::vector<Fixture>& bundled) {
  const Fixture* mirrored = nullptr;
  for (const Fixture& f : bundled) {
    if (f.mirror_axis) mirrored = &f;
  }
  if (!mirrored) return {false, "no mirrored fixture"};
  const Rig& rig = mirrored->rig;
  const int axis = *mirrored->mirror_axis;
  const auto sigma = mirror_permutation(rig.domain, axis);
  if (!sigma) return {false, "domain is not mirror symmetric"};

  std::vector<int> partner(rig.handles().size(), -1);
  for (std::size_t i = 0; i < rig.handles().size(); ++i) {
    std::vector<std::size_t> image;
    for (std::size_t s : rig.handles()[i].samples) image.push_back((*sigma)[s]);
    std::sort(image.begin(), image.end());
    for (std::size_t j = 0; j < rig.handles().size(); ++j) {
      auto other = rig.handles()[j].samples;
      std::sort(other.begin(), other.end());
      if (other == image && rig.handles()[j].basis == rig.handles()[i].basis) partner[i] = static_cast<int>(j);
    }
    if (partner[i] < 0) return {false, "handle " + std::to_string(i) + " has no mirrored counterpart"};
  }

  double weight_err = 0.0;
  for (std::size_t p = 0; p < rig.domain.size(); ++p) {
    for (std::size_t i = 0; i < partner.size(); ++i) {
      weight_err = std::max(weight_err, std::abs(rig.weights.weight((*sigma)[p], i) -
                                                 rig.weights.weight(p, static_cast<std::size_t>(partner[i]))));
    }
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec3& p : rig.domain.positions()) {
    lo = std::min(lo, p[axis]);
    hi = std::max(hi, p[axis]);
  }
  Mat4 reflect = Mat4::Identity();
  reflect(axis, axis) = -1.0;
  reflect(axis, 3) = lo + hi;

  std::mt19937_64 rng(17);
  double deform_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    TransformMap real;
    for (std::size_t i = 0; i < rig.real_count; ++i) {
      const auto j = static_cast<std::size_t>(partner[i]);
      if (j < i) continue;
      const HandleTransform t = HandleTransform::from_rigid(random_rigid(rng, rig.domain.dim()));
      real[static_cast<HandleId>(i)] = t;
      real[static_cast<HandleId>(j)] = HandleTransform::from_matrix(reflect * t.matrix() * reflect);
      if (j == i) real[static_cast<HandleId>(i)] = HandleTransform{};
    }
    const auto out = deform(rig.domain, rig.weights, expand_transforms(rig, real));
    for (std::size_t p = 0; p < rig.domain.size(); ++p) {
      const Vec3 mirrored_pos = (reflect * out.positions[p].homogeneous()).head<3>();
      deform_err = std::max(deform_err, (out.positions[(*sigma)[p]] - mirrored_pos).norm());
    }
  }
  return {weight_err <= 1e-9 && deform_err <= 1e-9,
          mirrored->name + ": weight err " + fmt(weight_err) + ", deformation err " + fmt(deform_err)};
}

HandleGraph path_graph(std::size_t n) {
  HandleGraph g;
  g.node_count = n;
  g.neighbors.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g.edges.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
    g.neighbors[i].push_back(static_cast<int>(i + 1));
    g.neighbors[i + 1].push_back(static_cast<int>(i));
  }
  for (auto& nb : g.neighbors) std::sort(nb.begin(), nb.end());
  return g;
}

Outcome harmonic(const std::vector<const Fixture*>& fixtures) {
  const std::vector<HandleId> ends3 = {0, 2};
  const auto three = solve_harmonic_fields(path_graph(3), ends3);
  double err = std::abs(three.values[0][1] - 0.5);
  const std::vector<HandleId> ends4 = {0, 3};
  const auto four = solve_harmonic_fields(path_graph(4), ends4);
  const auto [v1, v2] = oracle::path4_harmonic();
  err = std::max({err, std::abs(four.values[0][1] - v1), std::abs(four.values[0][2] - v2),
                  std::abs(four.values[1][1] - v2), std::abs(four.values[1][2] - v1)});

  std::mt19937_64 rng(19);
  double uniform_err = 0.0;
  std::size_t rigs = 0;
  for (const Fixture* f : fixtures) {
    if (!f->rig.harmonic) continue;
    ++rigs;
    const HandleTransform shared = HandleTransform::from_rigid(random_rigid(rng, f->rig.domain.dim()));
    TransformMap real;
    for (std::size_t i = 0; i < f->rig.real_count; ++i) real[static_cast<HandleId>(i)] = shared;
    for (const auto& [id, t] : propagate_transforms(*f->rig.harmonic, real)) {
      uniform_err = std::max(uniform_err, (t.matrix() - shared.matrix()).cwiseAbs().maxCoeff());
    }
  }
  return {err <= 1e-9 && uniform_err <= 1e-9 && rigs > 0,
          "path fields err " + fmt(err) + ", shared transform err " + fmt(uniform_err) + " over " +
              std::to_string(rigs) + " rigs with virtual handles"};
}

Outcome performance() {
  const auto pts = fixture::annulus(150000, 0.2, 31);
  const SampleDomain domain = build_domain(pts, 2, default_k(2));
  const auto sites = fixture::spread_samples(pts, 10, 0.45, 32);
  HandleLayout layout = make_layout(domain, fixture::point_handles(sites));
  insert_virtual_handles(domain, layout);

  auto start = Clock::now();
  const auto fields = handle_distance_fields(domain, layout.handles);
  const VoronoiPartition partition = voronoi_from_fields(domain, layout.handles, fields);
  const double voronoi_s = seconds_since(start);

  start = Clock::now();
  assign_support_radii(layout.handles, partition, 1.0);
  const WeightField w = compute_weights(domain, layout.handles, fields, partition);
  const double weights_s = seconds_since(start);

  return {voronoi_s <= 5.0 && weights_s <= 1.0 && w.sample_count() == domain.size(),
          std::to_string(domain.size()) + " samples, " + std::to_string(layout.handles.size()) +
              " handles (10 real), Voronoi+distances " + fmt(voronoi_s) + " s, weights " + fmt(weights_s) + " s"};
}

Outcome insertion_linearity() {
  std::vector<double> xs;
  std::vector<double> ys;
  std::ostringstream detail;
  for (std::size_t n : {10000u, 20000u, 40000u}) {
    const auto pts = fixture::annulus(n, 0.0, 41);
    const Json domain = fixture::domain_json(pts, 2, default_k(2));
    Json handles = Json::array();
    for (std::size_t s : fixture::spread_samples(pts, 4, 0.5, 42)) handles.push_back({{"sample", s}});
    std::vector<double> times;
    for (int rep = 0; rep < 5; ++rep) {
      SessionService service;
      const std::string id = service.handle({{"type", "open_session"}, {"domain", domain}})["session_id"];
      service.handle({{"type", "set_handles"}, {"session_id", id}, {"handles", handles}});
      const Json request = {{"type", "add_handle"}, {"session_id", id}, {"position", {0.013 * rep, -0.021}}};
      const auto start = Clock::now();
      const Json reply = service.handle(request);
      times.push_back(seconds_since(start));
      if (reply["ok"] != true) return {false, "add_handle failed: " + reply.dump()};
    }
    std::sort(times.begin(), times.end());
    xs.push_back(static_cast<double>(pts.size()));
    ys.push_back(times[times.size() / 2]);
    detail << pts.size() << ":" << fmt(ys.back() * 1e3) << "ms ";
  }
  const double mx = (xs[0] + xs[1] + xs[2]) / 3;
  const double my = (ys[0] + ys[1] + ys[2]) / 3;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  detail << "R^2 " << fmt(r2);
  return {r2 >= 0.95, detail.str()};
}

std::vector<Vec3> twist_bar() {
  std::mt19937_64 rng(51);
  const double h = 0.1;
  std::uniform_real_distribution<double> jitter(-0.25 * h, 0.25 * h);
  std::vector<Vec3> pts;
  for (int i = 0; i < 59; ++i) {
    for (int j = -4; j <= 4; ++j) {
      for (int k = -4; k <= 4; ++k) {
        const bool end = i == 0 || i == 58;
        const bool axis = j == 0 && k == 0;
        const double dx = end ? 0.0 : jitter(rng);
        pts.emplace_back(i * h + dx, j * h + (axis ? 0.0 : jitter(rng)), k * h + (axis ? 0.0 : jitter(rng)));
      }
    }
  }
  // Drop 14 interior samples to reach the target count.
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin() + 81, order.end() - 81, rng);
  std::vector<bool> drop(pts.size(), false);
  std::size_t dropped = 0;
  for (std::size_t i = 81; dropped < 14; ++i) {
    const Vec3& p = pts[order[i]];
    if (std::abs(p.y()) + std::abs(p.z()) > 0.05) {
      drop[order[i]] = true;
      ++dropped;
    }
  }
  std::vector<Vec3> kept;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!drop[i]) kept.push_back(pts[i]);
  }
  return kept;
}

Outcome progressive_twist() {
  const auto pts = twist_bar();
  const SampleDomain domain = build_domain(pts, 3, default_k(3));
  std::size_t left = 0;
  std::size_t right = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((pts[i] - Vec3(0, 0, 0)).norm() < 1e-12) left = i;
    if ((pts[i] - Vec3(5.8, 0, 0)).norm() < 1e-9) right = i;
  }
  const Rig rig = solve_rig(domain, fixture::point_handles({left, right}));

  ProgressiveTarget twist;
  twist.axis = Vec3::UnitX();
  twist.angle_deg = 360.0;
  ProgressiveOptions options;
  options.step_deg = 2.0;
  options.harmonic = rig.harmonic ? &*rig.harmonic : nullptr;

  std::mt19937_64 rng(53);
  std::size_t passes = 0;
  bool finite = true;
  double origin_err = 0.0;
  double uniform_err = 0.0;
  options.observer = [&](std::size_t pass, std::size_t, std::span<const Vec3> positions, const TransformMap& now) {
    passes = pass;
    for (const Vec3& p : positions) finite = finite && p.allFinite();
    for (std::size_t i = 0; i < rig.real_count; ++i) {
      for (std::size_t s : rig.handles()[i].samples) {
        const Vec3 expect = now.at(static_cast<HandleId>(i)).apply(rig.domain.position(s));
        origin_err = std::max(origin_err, (positions[s] - expect).norm());
      }
    }
    const HandleTransform t = HandleTransform::from_matrix(random_affine(rng, 3));
    TransformMap all;
    for (const Handle& h : rig.handles()) all[h.id] = t;
    const auto blended = blend_positions(positions, rig.weights, all);
    for (std::size_t p = 0; p < positions.size(); ++p) {
      uniform_err = std::max(uniform_err, (blended[p] - t.apply(positions[p])).norm() / (1.0 + positions[p].norm()));
    }
  };
  const auto start = Clock::now();
  const auto out = deform_progressive(rig.domain, [&](const SampleDomain&) { return rig.weights; },
                                      {{0, ProgressiveTarget{}}, {1, twist}}, options);
  for (const Vec3& p : out.positions) finite = finite && p.allFinite();
  return {passes == 180 && finite && origin_err <= 1e-9 && uniform_err <= 1e-9 && pts.size() == 4765,
          std::to_string(pts.size()) + " samples, " + std::to_string(passes) + " passes in " +
              fmt(seconds_since(start)) + " s, finite " + (finite ? "yes" : "no") + ", handle err " +
              fmt(origin_err) + ", per-step consistency err " + fmt(uniform_err)};
}

}  // namespace

int main() {
  setenv("MFD_THREADS", "1", 1);
  int failures = 0;
  const auto report = [&](const std::string& name, const std::function<Outcome()>& criterion) {
    Outcome o;
    try {
      o = criterion();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %-24s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  };

  const std::vector<Fixture> bundled = bundled_fixtures();
  double solve_seconds = 0.0;
  const std::vector<Fixture> randomized = random_fixtures(&solve_seconds);
  std::vector<const Fixture*> all;
  for (const Fixture& f : bundled) all.push_back(&f);
  for (const Fixture& f : randomized) all.push_back(&f);

  report("partition_of_unity", [&] { return partition_of_unity(randomized, solve_seconds); });
  report("interpolation", [&] { return interpolation(all); });
  report("consistency", [&] { return consistency(all); });
  report("c2_basis", c2_basis);
  report("shortest_path_oracle", shortest_path_oracle);
  report("virtual_insertion", [&] { return algorithm1(all); });
  report("no_local_maxima", [&] { return no_local_maxima(bundled); });
  report("symmetry", [&] { return symmetry(bundled); });
  report("harmonic_propagation", [&] { return harmonic(all); });
  report("performance", performance);
  report("add_handle_linearity", insertion_linearity);
  report("progressive_twist", progressive_twist);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
