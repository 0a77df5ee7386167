#pragma once

#include "emsim/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emsim {

/// All located points (bases, demand squares, EDs) with an id index.
class NetworkModel {
 public:
  NetworkModel() = default;
  /// Throws InvariantViolation on duplicate ids.
  explicit NetworkModel(std::vector<GeoPoint> points);

  const std::vector<GeoPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  const GeoPoint& at(std::size_t index) const { return points_.at(index); }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws CrossRefError when the id is unknown or has a different kind.
  std::size_t require(std::string_view id, std::optional<PointKind> kind = std::nullopt,
                      std::string_view context = {}) const;
  std::size_t count(PointKind kind) const noexcept;

  bool operator==(const NetworkModel& other) const { return points_ == other.points_; }

 private:
  std::vector<GeoPoint> points_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace emsim
