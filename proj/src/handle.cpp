#include "mfd/handle.hpp"

#include <string>

#include "mfd/error.hpp"

namespace mfd {

std::string_view to_string(HandleKind kind) {
  switch (kind) {
    case HandleKind::Point: return "point";
    case HandleKind::Segment: return "segment";
    case HandleKind::Virtual: return "virtual";
  }
  return "point";
}

void validate_handles(std::span<const Handle> handles, std::size_t sample_count) {
  for (std::size_t i = 0; i < handles.size(); ++i) {
    const Handle& h = handles[i];
    const std::string name = "handle " + std::to_string(i);
    if (h.id != static_cast<HandleId>(i)) {
      throw Error(ErrorCode::InvalidArgument, name + " has id " + std::to_string(h.id));
    }
    if (h.samples.empty()) throw Error(ErrorCode::InvalidArgument, name + " has no samples");
    if (h.kind != HandleKind::Segment && h.samples.size() != 1) {
      throw Error(ErrorCode::InvalidArgument, name + " is a point handle with several samples");
    }
    for (std::size_t s : h.samples) {
      if (s >= sample_count) {
        throw Error(ErrorCode::InvalidArgument, name + " references missing sample " + std::to_string(s));
      }
    }
  }
}

}  // namespace mfd
