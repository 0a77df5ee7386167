#include "emsim/network.hpp"

#include "emsim/error.hpp"

#include <algorithm>

namespace emsim {

NetworkModel::NetworkModel(std::vector<GeoPoint> points) : points_(std::move(points)) {
  index_.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].id.empty()) throw InvariantViolation("point with empty id");
    if (!index_.emplace(points_[i].id, i).second) {
      throw InvariantViolation("duplicate point id '" + points_[i].id + "'");
    }
  }
}

std::optional<std::size_t> NetworkModel::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t NetworkModel::require(std::string_view id, std::optional<PointKind> kind,
                                  std::string_view context) const {
  auto idx = find(id);
  if (!idx) throw CrossRefError(std::string(id), std::string(context));
  if (kind && points_[*idx].kind != *kind) {
    throw CrossRefError(std::string(id), std::string(context) + " (expected a " +
                                             std::string(to_string(*kind)) + " point)");
  }
  return *idx;
}

std::size_t NetworkModel::count(PointKind kind) const noexcept {
  return static_cast<std::size_t>(std::count_if(points_.begin(), points_.end(),
                                                [kind](const GeoPoint& p) { return p.kind == kind; }));
}

}  // namespace emsim
