#ifndef AIM_COORDINATION_TOPOLOGY_HPP
#define AIM_COORDINATION_TOPOLOGY_HPP

#include <map>
#include <optional>
#include <vector>

#include "aim/core/types.hpp"
#include "aim/scheduler/scheduler.hpp"

namespace aim::coord {

struct LinkId {
  std::int32_t value = -1;
  constexpr bool valid() const { return value >= 0; }
  friend constexpr bool operator==(LinkId a, LinkId b) { return a.value == b.value; }
  friend constexpr bool operator<(LinkId a, LinkId b) { return a.value < b.value; }
};

/// Directed road stretch between two intersections (or a boundary terminal).
/// Length runs from the upstream box exit to the downstream stop bar.
struct Link {
  LinkId id;
  std::optional<IntersectionId> from;  // nullopt: boundary source
  std::optional<IntersectionId> to;    // nullopt: boundary sink
  double length = 400.0;               // m
  Movement movement = Movement::East;
  Phase phase_at_destination = Phase::X;
};

struct IntersectionInfo {
  IntersectionId id;
  sched::IntersectionGeometry geometry;
};

class GridTopology {
 public:
  /// rows x cols lattice, straight corridors in all four directions,
  /// one boundary entry and exit per corridor end.
  static GridTopology regular_grid(int rows, int cols, double link_length,
                                   const sched::IntersectionGeometry& geometry);

  /// Two stacked intersections for the MILP case study: I_1 above I_2,
  /// southbound continues I_1 -> I_2, northbound continues I_2 -> I_1.
  static GridTopology two_intersection_column(double spacing, double approach_length,
                                              const sched::IntersectionGeometry& geometry);

  const std::vector<Link>& links() const { return links_; }
  const std::vector<IntersectionInfo>& intersections() const { return intersections_; }
  const Link& link(LinkId id) const { return links_.at(id.value); }
  const IntersectionInfo& intersection(IntersectionId id) const;

  const std::vector<IntersectionId>& neighbors(IntersectionId id) const;

  /// Link continuing `movement` out of `at`; every interior approach has one.
  std::optional<LinkId> continuation(IntersectionId at, Movement movement) const;

  /// Links entering `at`, and boundary entry links of the whole network.
  std::vector<LinkId> approaches(IntersectionId at) const;
  const std::vector<LinkId>& entry_links() const { return entries_; }

  /// Straight route from an entry link: the intersections crossed in order.
  std::vector<IntersectionId> route_from_entry(LinkId entry) const;

  /// Throws std::invalid_argument when an interior approach dead-ends.
  void validate() const;

 private:
  LinkId add_link(std::optional<IntersectionId> from, std::optional<IntersectionId> to,
                  double length, Movement movement);
  void index();

  std::vector<Link> links_;
  std::vector<IntersectionInfo> intersections_;
  std::vector<LinkId> entries_;
  std::map<IntersectionId, std::vector<IntersectionId>> neighbors_;
  std::map<std::pair<std::int32_t, std::uint8_t>, LinkId> continuation_;  // (node, movement)
};

/// Next intersection on the vehicle's straight route after the one it is
/// subscribed to, or nullopt when it exits at the boundary.
std::optional<IntersectionId> route_vehicle_next_hop(const GridTopology& topology,
                                                     const sched::Vehicle& vehicle);

}  // namespace aim::coord

#endif  // AIM_COORDINATION_TOPOLOGY_HPP
