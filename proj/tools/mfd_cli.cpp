// mfd: batch front end and session server.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfd/error.hpp"
#include "mfd/io.hpp"
#include "mfd/pipeline.hpp"
#include "mfd/server.hpp"
#include "mfd/verify.hpp"

namespace fs = std::filesystem;
using namespace mfd;

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

fs::path trace_path_for(const std::string& weights) { return weights + ".trace.json"; }

DomainFile load_domain(const std::string& path) { return parse_domain(read_json_file(path)); }

SampleDomain build(const DomainFile& file) { return build_domain(file.points, file.dim, file.effective_k()); }

struct Loaded {
  HandleFile handles;
  BoundHandles bound;
  double alpha;
};

Loaded load_handles(const SampleDomain& domain, const std::string& path, std::optional<double> alpha) {
  Loaded out{parse_handle_file(read_json_file(path), domain.dim()), {}, 1.0};
  const Basis basis = out.handles.default_basis.value_or(quintic_basis());
  out.bound = bind_handles(domain, out.handles.handles, basis);
  out.alpha = alpha.value_or(out.handles.alpha.value_or(1.0));
  return out;
}

RigOptions rig_options(const Loaded& l) {
  RigOptions options;
  options.alpha = l.alpha;
  options.insertion.virtual_basis = l.handles.default_basis.value_or(quintic_basis());
  return options;
}

WeightField read_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return ends_with(path, ".mfw") ? read_weights_binary(in) : read_weights_csv(in);
}

void write_weights(const std::string& path, const WeightField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  if (ends_with(path, ".mfw")) {
    write_weights_binary(out, field);
  } else {
    write_weights_csv(out, field);
  }
  if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + path);
}

int cmd_sample(const std::string& points_path, std::optional<int> k, std::optional<int> dim, const std::string& out) {
  const Json j = read_json_file(points_path);
  DomainFile file;
  if (j.is_object()) {
    file = parse_domain(j);
  } else {
    if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, "points file must be a domain object or a point list");
    file.dim = dim.value_or(static_cast<int>(j.front().size()));
    file.points = points_from_json(j, file.dim);
  }
  if (k) file.k = *k;
  file.k = file.effective_k();
  const SampleDomain domain = build(file);
  write_json_file(out, to_json(file));
  std::cout << domain.size() << " samples, " << domain.edges().size() << " edges, " << domain.component_count()
            << " component(s)\n";
  return 0;
}

int cmd_weights(const std::string& domain_path, const std::string& handles_path, std::optional<double> alpha,
                const std::string& out, std::optional<std::string> trace_out) {
  const SampleDomain domain = build(load_domain(domain_path));
  Loaded loaded = load_handles(domain, handles_path, alpha);
  const Rig rig = solve_rig(std::move(loaded.bound.domain), std::move(loaded.bound.handles), rig_options(loaded));
  write_weights(out, rig.weights);
  const fs::path trace_file = trace_out ? fs::path(*trace_out) : trace_path_for(out);
  write_json_file(trace_file, trace_to_json(rig.trace));
  std::cout << rig.domain.size() << " samples, " << rig.real_count << " real and "
            << rig.layout.handles.size() - rig.real_count << " virtual handle(s), " << to_string(rig.weights.regime())
            << " regime" << (rig.weights.mixed_bases() ? " (mixed bases)" : "") << "\n";
  return 0;
}

int cmd_deform(const std::string& domain_path, const std::string& weights_path, const std::string& handles_path,
               const std::string& poses_path, bool progressive, double step, const std::string& policy,
               std::optional<std::string> trace_in, const std::string& out, std::optional<std::string> ppm) {
  const DomainFile file = load_domain(domain_path);
  const SampleDomain domain = build(file);
  Loaded loaded = load_handles(domain, handles_path, std::nullopt);

  std::vector<std::size_t> sites;
  const fs::path trace_file = trace_in ? fs::path(*trace_in) : trace_path_for(weights_path);
  if (fs::exists(trace_file)) sites = trace_insertions_from_json(read_json_file(trace_file));
  Rig rig = restore_rig(std::move(loaded.bound.domain), std::move(loaded.bound.handles), sites, rig_options(loaded));
  rig.weights = read_weights(weights_path);
  if (rig.weights.sample_count() != rig.domain.size() || rig.weights.handle_count() != rig.layout.handles.size()) {
    throw Error(ErrorCode::StaleWeights, "weights (" + std::to_string(rig.weights.sample_count()) + " x " +
                                             std::to_string(rig.weights.handle_count()) +
                                             ") do not match the bound domain and handles (" +
                                             std::to_string(rig.domain.size()) + " x " +
                                             std::to_string(rig.layout.handles.size()) + ")");
  }

  const std::vector<PoseSpec> poses = parse_poses(read_json_file(poses_path), rig.domain.dim());
  DeformationResult result;
  if (progressive) {
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "--step must be positive");
    std::map<HandleId, ProgressiveTarget> targets;
    for (std::size_t i = 0; i < rig.real_count; ++i) targets[static_cast<HandleId>(i)] = ProgressiveTarget{};
    for (const PoseSpec& pose : poses) {
      if (pose.handle < 0 || static_cast<std::size_t>(pose.handle) >= rig.real_count) {
        throw Error(ErrorCode::InvalidArgument, "pose for unknown real handle " + std::to_string(pose.handle));
      }
      targets[pose.handle] = pose.target.value_or(target_from_pose(pose));
    }
    ProgressiveOptions options;
    options.step_deg = step;
    options.harmonic = rig.harmonic ? &*rig.harmonic : nullptr;
    WeightProvider provider;
    if (policy == "recompute") {
      options.policy = WeightPolicy::Recompute;
      const double alpha = loaded.alpha;
      provider = [&rig, alpha](const SampleDomain& current) {
        HandleLayout layout = make_layout(current, rig.layout.handles);
        assign_support_radii(layout.handles, layout.partition, alpha);
        return compute_weights(current, layout.handles, layout.fields, layout.partition);
      };
    } else if (policy == "frozen") {
      provider = [&rig](const SampleDomain&) { return rig.weights; };
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown policy \"" + policy + "\"");
    }
    result = deform_progressive(rig.domain, provider, targets, options);
  } else {
    TransformMap real;
    for (const PoseSpec& pose : poses) real.insert_or_assign(pose.handle, pose.transform);
    result = deform(rig.domain, rig.weights, expand_transforms(rig, real), rig.handles());
  }

  Json doc = to_json(DomainFile{rig.domain.dim(), result.positions, rig.domain.k()});
  doc["deformed"] = true;
  doc["regime"] = std::string(to_string(result.regime));
  doc["handle_set_hash"] = handle_set_hash(rig.handles());
  write_json_file(out, doc);
  if (ppm) {
    std::ofstream img(*ppm, std::ios::binary);
    if (!img) throw Error(ErrorCode::InvalidArgument, "cannot write " + *ppm);
    write_ppm(img, result.positions);
  }
  return 0;
}

int cmd_check(const std::string& domain_path, const std::string& handles_path, std::uint64_t seed,
              const std::string& mirror) {
  const SampleDomain domain = build(load_domain(domain_path));
  Loaded loaded = load_handles(domain, handles_path, std::nullopt);
  const Rig rig = solve_rig(std::move(loaded.bound.domain), std::move(loaded.bound.handles), rig_options(loaded));
  CheckOptions options;
  options.seed = seed;
  if (!mirror.empty()) {
    if (mirror.size() != 1 || mirror[0] < 'x' || mirror[0] > 'z') {
      throw Error(ErrorCode::InvalidArgument, "--mirror takes x, y or z");
    }
    options.mirror_axis = mirror[0] - 'x';
  }
  bool ok = true;
  for (const CheckRow& r : run_checks(rig, options)) {
    std::printf("%-20s %-5s %s\n", r.name.c_str(), std::string(to_string(r.status)).c_str(), r.detail.c_str());
    ok = ok && r.status != CheckStatus::Fail;
  }
  return ok ? 0 : 1;
}

volatile std::sig_atomic_t g_stop = 0;

int cmd_serve(int port, std::optional<std::string> domain_path, std::optional<int> http_port) {
  SessionService service;
  if (domain_path) {
    const Json opened = service.handle({{"type", "open_session"}, {"domain", read_json_file(*domain_path)}});
    if (!opened.value("ok", false)) throw Error(ErrorCode::ParseError, opened.value("message", "cannot open domain"));
    std::cout << "preloaded session " << opened["session_id"].get<std::string>() << "\n";
  }
  SessionServer server(service);
  const auto bound = server.start(static_cast<std::uint16_t>(port));
  std::cout << "listening on 127.0.0.1:" << bound << std::endl;
  std::optional<HttpBridge> http;
  if (http_port) {
    http.emplace(service);
    std::cout << "http bridge on 127.0.0.1:" << http->start(static_cast<std::uint16_t>(*http_port)) << "/rpc"
              << std::endl;
  }
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  if (http) http->stop();
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meshfree handle-driven deformation"};
  app.require_subcommand(1);

  std::string points, out, domain, handles, weights, poses, policy = "frozen", mirror;
  std::optional<int> k, dim, http_port;
  std::optional<double> alpha;
  std::optional<std::string> trace, ppm, serve_domain;
  bool progressive = false;
  double step = 2.0;
  std::uint64_t seed = 1;
  int port = 7878;

  auto* sample = app.add_subcommand("sample", "Build a sample domain from a point set");
  sample->add_option("--points", points, "JSON point list or domain file")->required();
  sample->add_option("--k", k, "neighbors per sample");
  sample->add_option("--dim", dim, "dimension of a bare point list");
  sample->add_option("--out", out, "domain file to write")->required();

  auto* wcmd = app.add_subcommand("weights", "Compute weights, inserting virtual handles as needed");
  wcmd->add_option("--domain", domain)->required();
  wcmd->add_option("--handles", handles)->required();
  wcmd->add_option("--alpha", alpha, "support shape factor in (0,1]");
  wcmd->add_option("--out", out, ".csv or .mfw")->required();
  wcmd->add_option("--trace", trace, "insertion trace (default <out>.trace.json)");

  auto* dcmd = app.add_subcommand("deform", "Deform a domain with posed handles");
  dcmd->add_option("--domain", domain)->required();
  dcmd->add_option("--weights", weights)->required();
  dcmd->add_option("--handles", handles)->required();
  dcmd->add_option("--poses", poses)->required();
  dcmd->add_flag("--progressive", progressive, "apply the poses in small rotation steps");
  dcmd->add_option("--step", step, "degrees per progressive step");
  dcmd->add_option("--policy", policy, "progressive weights: frozen or recompute");
  dcmd->add_option("--trace", trace, "insertion trace (default <weights>.trace.json)");
  dcmd->add_option("--out", out)->required();
  dcmd->add_option("--ppm", ppm, "PPM raster of a 2D result");

  auto* ccmd = app.add_subcommand("check", "Run the invariant suite");
  ccmd->add_option("--domain", domain)->required();
  ccmd->add_option("--handles", handles)->required();
  ccmd->add_option("--seed", seed);
  ccmd->add_option("--mirror", mirror, "mirror axis (x, y or z) for the symmetry row");

  auto* scmd = app.add_subcommand("serve", "Run the session service");
  scmd->add_option("--port", port);
  scmd->add_option("--domain", serve_domain, "open a session on this domain at startup");
  scmd->add_option("--http-port", http_port, "also serve POST /rpc over HTTP");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) return cmd_sample(points, k, dim, out);
    if (*wcmd) return cmd_weights(domain, handles, alpha, out, trace);
    if (*dcmd) return cmd_deform(domain, weights, handles, poses, progressive, step, policy, trace, out, ppm);
    if (*ccmd) return cmd_check(domain, handles, seed, mirror);
    if (*scmd) return cmd_serve(port, serve_domain, http_port);
  } catch (const Error& e) {
    std::cerr << "mfd: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mfd: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
