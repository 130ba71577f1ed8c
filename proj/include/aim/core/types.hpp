#ifndef AIM_CORE_TYPES_HPP
#define AIM_CORE_TYPES_HPP

#include <cstdint>
#include <string>

namespace aim {

using VehicleId = std::int64_t;

/// Intersection label; the 3x3 grid uses I_1 .. I_9.
struct IntersectionId {
  std::int32_t value = -1;

  constexpr bool valid() const { return value >= 0; }
  friend constexpr bool operator==(IntersectionId a, IntersectionId b) {
    return a.value == b.value;
  }
  friend constexpr bool operator!=(IntersectionId a, IntersectionId b) {
    return a.value != b.value;
  }
  friend constexpr bool operator<(IntersectionId a, IntersectionId b) {
    return a.value < b.value;
  }
  std::string label() const { return "I" + std::to_string(value); }
};

/// Straight-through movements only; turns are out of scope.
enum class Movement : std::uint8_t { East, West, North, South };

/// Two-phase intersection: X serves east/west, O serves north/south.
enum class Phase : std::uint8_t { X, O };

constexpr Phase phase_of(Movement m) {
  return (m == Movement::East || m == Movement::West) ? Phase::X : Phase::O;
}

constexpr bool conflicting(Phase a, Phase b) { return a != b; }

inline const char* to_string(Movement m) {
  switch (m) {
    case Movement::East: return "E";
    case Movement::West: return "W";
    case Movement::North: return "N";
    case Movement::South: return "S";
  }
  return "?";
}

inline const char* to_string(Phase p) { return p == Phase::X ? "X" : "O"; }

}  // namespace aim

#endif  // AIM_CORE_TYPES_HPP
