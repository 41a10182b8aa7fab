#include "mfd/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "mfd/error.hpp"

namespace mfd {
namespace {

Json partition_summary(const Session& s) {
  const VoronoiPartition& part = s.layout->partition;
  Json handles = Json::array();
  Json violations = Json::array();
  for (std::size_t h = 0; h < part.handle_count(); ++h) {
    const Handle& handle = s.layout->handles[h];
    Json entry = {{"id", handle.id},
                  {"kind", std::string(to_string(handle.kind))},
                  {"samples", handle.samples},
                  {"r_d", part.r_d[h]}};
    // JSON has no infinity; an unbounded separation is reported as null.
    entry["r_h"] = std::isinf(part.r_h[h]) ? Json(nullptr) : Json(part.r_h[h]);
    entry["delta"] = std::isinf(part.r_h[h]) ? Json(nullptr) : Json(part.delta(h));
    handles.push_back(std::move(entry));
    if (part.r_d[h] >= part.r_h[h]) violations.push_back(handle.id);
  }
  return {{"sample_count", s.domain.size()}, {"handles", handles}, {"violations", violations}};
}

Json handle_list(const HandleLayout& layout) {
  Json out = Json::array();
  for (const Handle& h : layout.handles) {
    out.push_back({{"id", h.id}, {"kind", std::string(to_string(h.kind))}, {"samples", h.samples}});
  }
  return out;
}

void rebind(Session& s, const Basis& default_basis) {
  BoundHandles bound = bind_handles(s.base_domain, s.specs, default_basis);
  s.domain = std::move(bound.domain);
  s.real_count = bound.handles.size();
  s.layout = make_layout(s.domain, std::move(bound.handles));
  s.trace = {};
  s.virtual_inserted = false;
}

void mark_changed(Session& s) {
  s.handles_changed = true;
  s.weights_stale = true;
  s.rig.reset();
}

void require_handles(const Session& s) {
  if (!s.layout) throw Error(ErrorCode::InvalidArgument, "session has no handles");
}

}  // namespace

Json SessionService::handle(const Json& request) {
  Json response;
  try {
    if (!request.is_object() || !request.contains("type")) {
      throw Error(ErrorCode::ParseError, "request needs a \"type\"");
    }
    const std::string type = request["type"].get<std::string>();
    if (type == "open_session") response = open_session(request);
    else if (type == "close_session") response = close_session(request);
    else if (type == "set_handles") response = set_handles(request);
    else if (type == "insert_virtual") response = insert_virtual(request);
    else if (type == "compute_weights") response = compute_weights(request);
    else if (type == "get_weight_field") response = get_weight_field(request);
    else if (type == "update_transforms") response = update_transforms(request);
    else if (type == "add_handle") response = add_handle(request);
    else if (type == "export_weights") response = export_weights(request);
    else throw Error(ErrorCode::UnknownRequest, "unknown request type \"" + type + "\"");
    response["ok"] = true;
  } catch (const Error& e) {
    response = {{"ok", false}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  } catch (const Json::exception& e) {
    response = {{"ok", false}, {"error", "ParseError"}, {"message", e.what()}};
  }
  if (request.is_object() && request.contains("id")) response["id"] = request["id"];
  return response;
}

std::shared_ptr<Session> SessionService::find(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SessionService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<Session> SessionService::session_for(const Json& req) const {
  if (!req.contains("session_id")) throw Error(ErrorCode::InvalidArgument, "request needs \"session_id\"");
  auto s = find(req["session_id"].get<std::string>());
  if (!s) throw Error(ErrorCode::UnknownSession, "no session " + req["session_id"].get<std::string>());
  return s;
}

std::string SessionService::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[40];
  std::snprintf(buf, sizeof buf, "s%zu-%016llx", ++counter_, static_cast<unsigned long long>(rng()));
  return buf;
}

Json SessionService::open_session(const Json& req) {
  if (!req.contains("domain")) throw Error(ErrorCode::InvalidArgument, "open_session needs \"domain\"");
  const DomainFile file = parse_domain(req["domain"]);
  auto s = std::make_shared<Session>();
  s->base_domain = build_domain(file.points, file.dim, file.effective_k());
  s->domain = s->base_domain;
  {
    std::lock_guard lock(sessions_mutex_);
    s->id = new_id();
    sessions_.emplace(s->id, s);
  }
  return {{"session_id", s->id}, {"points", points_to_json(s->domain.positions(), s->domain.dim())}};
}

Json SessionService::close_session(const Json& req) {
  auto s = session_for(req);
  std::lock_guard lock(sessions_mutex_);
  sessions_.erase(s->id);
  return Json::object();
}

Json SessionService::set_handles(const Json& req) {
  auto s = session_for(req);
  std::unique_lock lock(s->mutex);
  if (!req.contains("handles") || !req["handles"].is_array()) {
    throw Error(ErrorCode::InvalidArgument, "set_handles needs a \"handles\" list");
  }
  std::vector<HandleSpec> specs;
  for (const Json& h : req["handles"]) specs.push_back(parse_handle_spec(h, s->base_domain.dim()));
  if (specs.empty()) throw Error(ErrorCode::InvalidArgument, "set_handles needs at least one handle");
  s->specs = std::move(specs);
  rebind(*s, quintic_basis());
  mark_changed(*s);
  return partition_summary(*s);
}

Json SessionService::add_handle(const Json& req) {
  auto s = session_for(req);
  std::unique_lock lock(s->mutex);
  if (!req.contains("position")) throw Error(ErrorCode::InvalidArgument, "add_handle needs \"position\"");
  HandleSpec spec;
  spec.kind = HandleKind::Point;
  Json wrapped = Json::array();
  wrapped.push_back(req["position"]);
  spec.points.push_back(points_from_json(wrapped, s->domain.dim()).front());
  if (req.contains("basis")) spec.basis = parse_basis(req["basis"]);

  // Only the new sample and its distance field are computed; existing fields
  // are patched for the added sample instead of being recomputed.
  const std::size_t old_size = s->domain.size();
  InsertResult inserted = insert_points(s->domain, spec.points, s->domain.k());
  s->domain = std::move(inserted.domain);

  std::vector<Handle> handles;
  std::vector<DistanceField> fields;
  if (s->layout) {
    handles.assign(s->layout->handles.begin(), s->layout->handles.begin() + static_cast<std::ptrdiff_t>(s->real_count));
    fields.assign(s->layout->fields.begin(), s->layout->fields.begin() + static_cast<std::ptrdiff_t>(s->real_count));
  }
  if (s->domain.size() != old_size) {
    for (DistanceField& f : fields) extend_distance_field(f, s->domain, old_size);
  }
  Handle h;
  h.id = static_cast<HandleId>(handles.size());
  h.kind = HandleKind::Point;
  h.samples = {inserted.indices.front()};
  h.basis = spec.basis.value_or(quintic_basis());
  fields.push_back(handle_distance_field(s->domain, h));
  handles.push_back(std::move(h));

  HandleLayout layout;
  layout.partition = voronoi_from_fields(s->domain, handles, fields);
  layout.handles = std::move(handles);
  layout.fields = std::move(fields);
  s->layout = std::move(layout);
  s->specs.push_back(spec);
  s->real_count = s->layout->handles.size();
  s->trace = {};
  s->virtual_inserted = false;
  mark_changed(*s);
  Json out = partition_summary(*s);
  out["handle_id"] = s->real_count - 1;
  out["sample"] = inserted.indices.front();
  return out;
}

Json SessionService::insert_virtual(const Json& req) {
  auto s = session_for(req);
  std::unique_lock lock(s->mutex);
  require_handles(*s);
  InsertionTrace step_trace = insert_virtual_handles(s->domain, *s->layout);
  s->trace.steps.insert(s->trace.steps.end(), step_trace.steps.begin(), step_trace.steps.end());
  s->trace.final_handles = s->layout->handles;
  s->virtual_inserted = true;
  if (!step_trace.steps.empty()) mark_changed(*s);
  return {{"trace", trace_to_json(s->trace)}, {"handles", handle_list(*s->layout)}};
}

Json SessionService::compute_weights(const Json& req) {
  auto s = session_for(req);
  std::unique_lock lock(s->mutex);
  require_handles(*s);
  RigOptions options;
  options.alpha = req.value("alpha", 1.0);
  if (req.contains("basis")) {
    const Basis basis = parse_basis(req["basis"]);
    options.insertion.virtual_basis = basis;
    for (std::size_t i = 0; i < s->real_count; ++i) {
      if (!s->specs[i].basis) s->layout->handles[i].basis = basis;
    }
    for (std::size_t i = s->real_count; i < s->layout->handles.size(); ++i) s->layout->handles[i].basis = basis;
  }

  Rig rig;
  rig.real_count = s->real_count;
  rig.layout = *s->layout;
  const bool compact = std::all_of(rig.layout.handles.begin(), rig.layout.handles.end(),
                                   [](const Handle& h) { return is_compact(h.basis); });
  if (compact) {
    InsertionTrace more = insert_virtual_handles(s->domain, rig.layout, options.insertion);
    s->trace.steps.insert(s->trace.steps.end(), more.steps.begin(), more.steps.end());
  }
  s->trace.final_handles = rig.layout.handles;
  rig.trace = s->trace;
  assign_support_radii(rig.layout.handles, rig.layout.partition, options.alpha);
  rig.weights = mfd::compute_weights(s->domain, rig.layout.handles, rig.layout.fields, rig.layout.partition);
  rig.harmonic = harmonic_for_layout(rig.layout, rig.real_count);
  rig.domain = s->domain;
  s->layout = rig.layout;
  s->virtual_inserted = true;
  s->rig = std::move(rig);
  s->weights_stale = false;
  s->handles_changed = false;
  ++s->recompute_count;

  Json stats = Json::array();
  const WeightField& w = s->rig->weights;
  for (std::size_t slot = 0; slot < w.handle_count(); ++slot) {
    const auto col = w.column(slot);
    double lo = 1.0;
    double hi = 0.0;
    double sum = 0.0;
    std::size_t support = 0;
    for (double v : col) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
      support += v > 0.0;
    }
    stats.push_back({{"id", w.handle_ids()[slot]},
                     {"min", lo},
                     {"max", hi},
                     {"mean", sum / static_cast<double>(col.size())},
                     {"support", support}});
  }
  return {{"handle_ids", std::vector<HandleId>(w.handle_ids().begin(), w.handle_ids().end())},
          {"stats", stats},
          {"regime", std::string(to_string(w.regime()))},
          {"mixed_bases", w.mixed_bases()},
          {"trace", trace_to_json(s->trace)},
          {"handles", handle_list(*s->layout)}};
}

Json SessionService::get_weight_field(const Json& req) {
  auto s = session_for(req);
  std::shared_lock lock(s->mutex);
  if (s->weights_stale || !s->rig) throw Error(ErrorCode::StaleWeights, "weights are stale; run compute_weights");
  const HandleId id = req.at("handle_id").get<HandleId>();
  const WeightField& w = s->rig->weights;
  if (id < 0 || static_cast<std::size_t>(id) >= w.handle_count()) {
    throw Error(ErrorCode::InvalidArgument, "no handle " + std::to_string(id));
  }
  return {{"handle_id", id}, {"weights", w.column(static_cast<std::size_t>(id))}};
}

Json SessionService::update_transforms(const Json& req) {
  auto s = session_for(req);
  std::shared_lock lock(s->mutex);
  if (s->weights_stale || !s->rig) throw Error(ErrorCode::StaleWeights, "weights are stale; run compute_weights");
  const Rig& rig = *s->rig;
  TransformMap real;
  if (req.contains("poses")) {
    for (const PoseSpec& pose : parse_poses(req["poses"], rig.domain.dim())) {
      real.insert_or_assign(pose.handle, pose.transform);
    }
  }
  const TransformMap all = expand_transforms(rig, real);
  const DeformationResult result = deform(rig.domain, rig.weights, all, rig.handles());
  return {{"positions", points_to_json(result.positions, rig.domain.dim())},
          {"regime", std::string(to_string(result.regime))},
          {"handle_set_hash", result.handle_set_hash}};
}

Json SessionService::export_weights(const Json& req) {
  auto s = session_for(req);
  std::shared_lock lock(s->mutex);
  if (s->weights_stale || !s->rig) throw Error(ErrorCode::StaleWeights, "weights are stale; run compute_weights");
  std::ostringstream csv;
  write_weights_csv(csv, s->rig->weights);
  return {{"csv", csv.str()}, {"trace", trace_to_json(s->trace)}};
}

std::optional<WeightField> SessionService::weights_snapshot(const std::string& id) const {
  auto s = find(id);
  if (!s) return std::nullopt;
  std::shared_lock lock(s->mutex);
  if (!s->rig) return std::nullopt;
  return s->rig->weights;
}

std::size_t SessionService::recompute_count(const std::string& id) const {
  auto s = find(id);
  return s ? s->recompute_count.load() : 0;
}

}  // namespace mfd
