#include "mfd/weights.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include "mfd/error.hpp"

namespace mfd {
namespace {

constexpr double kGaussianFloor = 1e-14;
constexpr double kDenominatorFloor = 1e-300;

bool any_gaussian(std::span<const Handle> handles) {
  return std::any_of(handles.begin(), handles.end(),
                     [](const Handle& h) { return !is_compact(h.basis); });
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw Error(ErrorCode::ParseError, "truncated weight file header");
  }
  return std::uint32_t{bytes[0]} | std::uint32_t{bytes[1]} << 8 | std::uint32_t{bytes[2]} << 16 |
         std::uint32_t{bytes[3]} << 24;
}

}  // namespace

std::string_view to_string(Regime regime) {
  return regime == Regime::Interpolating ? "interpolating" : "approximating";
}

SupportRadii support_radii(const VoronoiPartition& partition, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
  }
  SupportRadii out;
  out.radius.resize(partition.handle_count());
  for (std::size_t h = 0; h < partition.handle_count(); ++h) {
    const double rd = partition.r_d[h];
    const double rh = partition.r_h[h];
    out.radius[h] = std::isinf(rh) ? kInfinity : (1.0 - alpha) * rd + alpha * rh;
    if (rd >= rh) out.violating.push_back(static_cast<int>(h));
  }
  return out;
}

void assign_support_radii(std::span<Handle> handles, const VoronoiPartition& partition, double alpha) {
  const SupportRadii radii = support_radii(partition, alpha);
  for (std::size_t h = 0; h < handles.size(); ++h) {
    if (is_compact(handles[h].basis)) {
      handles[h].support_radius = radii.radius[h];
    } else {
      const double rh = partition.r_h[h];
      const double rd = partition.r_d[h];
      handles[h].support_radius = std::isfinite(rh) ? rh : (rd > 0.0 ? rd : 1.0);
    }
  }
}

DistanceField handle_distance_field(const SampleDomain& domain, const Handle& handle) {
  return multi_source_distances(domain, handle.samples);
}

double WeightField::weight(std::size_t sample, std::size_t slot) const {
  const auto r = row(sample);
  const auto it = std::lower_bound(r.begin(), r.end(), slot,
                                   [](const WeightEntry& e, std::size_t s) { return e.slot < s; });
  return (it != r.end() && it->slot == slot) ? it->weight : 0.0;
}

std::vector<double> WeightField::column(std::size_t slot) const {
  std::vector<double> out(sample_count(), 0.0);
  for (std::size_t p = 0; p < sample_count(); ++p) out[p] = weight(p, slot);
  return out;
}

std::vector<double> WeightField::dense_row(std::size_t sample) const {
  std::vector<double> out(handle_count(), 0.0);
  for (const WeightEntry& e : row(sample)) out[e.slot] = e.weight;
  return out;
}

std::vector<double> WeightField::dense() const {
  std::vector<double> out(sample_count() * handle_count(), 0.0);
  for (std::size_t p = 0; p < sample_count(); ++p) {
    for (const WeightEntry& e : row(p)) out[p * handle_count() + e.slot] = e.weight;
  }
  return out;
}

WeightField WeightField::from_dense(std::vector<HandleId> handle_ids, std::size_t sample_count,
                                    std::span<const double> values, Regime regime) {
  const std::size_t count = handle_ids.size();
  if (values.size() != sample_count * count) {
    throw Error(ErrorCode::InvalidArgument, "dense weight matrix has the wrong size");
  }
  WeightField f;
  f.handle_ids_ = std::move(handle_ids);
  f.regime_ = regime;
  f.offsets_.reserve(sample_count + 1);
  f.offsets_.push_back(0);
  for (std::size_t p = 0; p < sample_count; ++p) {
    for (std::size_t h = 0; h < count; ++h) {
      const double w = values[p * count + h];
      if (w != 0.0) f.entries_.push_back({static_cast<std::uint32_t>(h), w});
    }
    f.offsets_.push_back(f.entries_.size());
  }
  return f;
}

WeightField compute_weights(const SampleDomain& domain, std::span<const Handle> handles) {
  validate_handles(handles, domain.size());
  const auto fields = handle_distance_fields(domain, handles);
  const auto partition = voronoi_from_fields(domain, handles, fields);
  return compute_weights(domain, handles, fields, partition);
}

WeightField compute_weights(const SampleDomain& domain, std::span<const Handle> handles,
                            std::span<const DistanceField> fields, const VoronoiPartition& partition) {
  const std::size_t count = handles.size();
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "no handles");
  if (fields.size() != count || partition.handle_count() != count) {
    throw Error(ErrorCode::InvalidArgument, "distance fields and partition must match the handle list");
  }
  const bool approximating = any_gaussian(handles);
  for (const Handle& h : handles) {
    if (!(h.support_radius > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "handle " + std::to_string(h.id) + " has no support radius");
    }
    if (approximating || !is_compact(h.basis)) continue;
    const auto i = static_cast<std::size_t>(h.id);
    const double rd = partition.r_d[i];
    const double rh = partition.r_h[i];
    const bool upper_ok = std::isinf(rh) || h.support_radius <= rh * (1.0 + 1e-12);
    if (!(rd < h.support_radius) || !upper_ok) {
      throw Error(ErrorCode::UnresolvedSupportViolation,
                  "handle " + std::to_string(h.id) + " needs r_d < r <= r_h (r_d=" +
                      std::to_string(rd) + ", r=" + std::to_string(h.support_radius) +
                      ", r_h=" + std::to_string(rh) + ")");
    }
  }

  WeightField field;
  field.regime_ = approximating ? Regime::Approximating : Regime::Interpolating;
  field.mixed_ = approximating && std::any_of(handles.begin(), handles.end(),
                                              [](const Handle& h) { return is_compact(h.basis); });
  field.handle_ids_.resize(count);
  for (std::size_t h = 0; h < count; ++h) field.handle_ids_[h] = handles[h].id;

  const std::size_t n = domain.size();
  field.offsets_.reserve(n + 1);
  field.offsets_.push_back(0);
  field.entries_.reserve(n * std::min<std::size_t>(count, 4));
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t row_begin = field.entries_.size();
    double peak = 0.0;
    for (std::size_t h = 0; h < count; ++h) {
      const double d = fields[h].distance[p];
      if (std::isinf(d)) continue;
      const double phi = eval_basis(handles[h].basis, d / handles[h].support_radius);
      if (phi == 0.0) continue;
      field.entries_.push_back({static_cast<std::uint32_t>(h), phi});
      peak = std::max(peak, phi);
    }
    // Gaussian tails are cut relative to the row's strongest term so that
    // samples far from every handle keep their nearest influences.
    double sum = 0.0;
    std::size_t kept = row_begin;
    for (std::size_t e = row_begin; e < field.entries_.size(); ++e) {
      const WeightEntry entry = field.entries_[e];
      if (!is_compact(handles[entry.slot].basis) && entry.weight < kGaussianFloor * peak) continue;
      field.entries_[kept++] = entry;
      sum += entry.weight;
    }
    field.entries_.resize(kept);
    if (!(sum >= kDenominatorFloor)) {
      throw Error(ErrorCode::UncoveredSample,
                  "sample " + std::to_string(p) + " lies outside every handle's support");
    }
    for (std::size_t e = row_begin; e < field.entries_.size(); ++e) field.entries_[e].weight /= sum;
    field.offsets_.push_back(field.entries_.size());
  }
  return field;
}

std::vector<double> weights_at_query(const WeightField& field, const SampleDomain& domain,
                                     const Vec3& query, int k) {
  if (domain.size() == 0 || field.sample_count() == 0) {
    throw Error(ErrorCode::EmptyDomain, "no samples to interpolate from");
  }
  if (field.sample_count() != domain.size()) {
    throw Error(ErrorCode::InvalidArgument, "weight field does not match the domain");
  }
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (!query.allFinite()) throw Error(ErrorCode::InvalidArgument, "query is not finite");

  using Candidate = std::pair<double, std::size_t>;
  std::priority_queue<Candidate> best;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const double d = (domain.position(i) - query).norm();
    if (d < kCoincidenceTolerance) return field.dense_row(i);
    if (best.size() < static_cast<std::size_t>(k)) {
      best.emplace(d, i);
    } else if (Candidate{d, i} < best.top()) {
      best.pop();
      best.emplace(d, i);
    }
  }
  std::vector<double> out(field.handle_count(), 0.0);
  double coeff_sum = 0.0;
  while (!best.empty()) {
    const auto [d, i] = best.top();
    best.pop();
    const double c = 1.0 / d;
    coeff_sum += c;
    for (const WeightEntry& e : field.row(i)) out[e.slot] += c * e.weight;
  }
  double total = 0.0;
  for (double& w : out) {
    w /= coeff_sum;
    total += w;
  }
  for (double& w : out) w /= total;
  return out;
}

void write_weights_csv(std::ostream& out, const WeightField& field) {
  out << "sample";
  for (HandleId id : field.handle_ids()) out << ',' << id;
  out << '\n';
  char buf[32];
  for (std::size_t p = 0; p < field.sample_count(); ++p) {
    out << p;
    std::size_t slot = 0;
    for (const WeightEntry& e : field.row(p)) {
      for (; slot < e.slot; ++slot) out << ",0";
      std::snprintf(buf, sizeof buf, "%.17g", e.weight);
      out << ',' << buf;
      ++slot;
    }
    for (; slot < field.handle_count(); ++slot) out << ",0";
    out << '\n';
  }
}

void write_weights_binary(std::ostream& out, const WeightField& field) {
  static_assert(std::endian::native == std::endian::little, "binary weight export assumes little-endian");
  out.write("MFW1", 4);
  put_u32(out, static_cast<std::uint32_t>(field.sample_count()));
  put_u32(out, static_cast<std::uint32_t>(field.handle_count()));
  const std::vector<double> values = field.dense();
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

WeightField read_weights_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MFW1", 4) != 0) {
    throw Error(ErrorCode::ParseError, "not an MFW1 weight file");
  }
  const std::uint32_t n = get_u32(in);
  const std::uint32_t count = get_u32(in);
  std::vector<double> values(std::size_t{n} * count);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    throw Error(ErrorCode::ParseError, "truncated weight matrix");
  }
  std::vector<HandleId> ids(count);
  for (std::uint32_t h = 0; h < count; ++h) ids[h] = static_cast<HandleId>(h);
  return WeightField::from_dense(std::move(ids), n, values);
}

WeightField read_weights_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty weight CSV");
  std::vector<HandleId> ids;
  {
    std::istringstream header(line);
    std::string cell;
    std::getline(header, cell, ',');
    if (cell != "sample") throw Error(ErrorCode::ParseError, "weight CSV must start with 'sample'");
    while (std::getline(header, cell, ',')) ids.push_back(std::stoi(cell));
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    if (std::stoul(cell) != rows) throw Error(ErrorCode::ParseError, "weight CSV rows out of order");
    std::size_t cols = 0;
    while (std::getline(row, cell, ',')) {
      values.push_back(std::stod(cell));
      ++cols;
    }
    if (cols != ids.size()) throw Error(ErrorCode::ParseError, "weight CSV row has the wrong width");
    ++rows;
  }
  return WeightField::from_dense(std::move(ids), rows, values);
}

}  // namespace mfd
