#include "aim/coordination/topology.hpp"

#include <algorithm>
#include <stdexcept>

namespace aim::coord {

LinkId GridTopology::add_link(std::optional<IntersectionId> from,
                              std::optional<IntersectionId> to, double length,
                              Movement movement) {
  if (length <= 0.0) throw std::invalid_argument("link length must be positive");
  Link l;
  l.id = LinkId{static_cast<std::int32_t>(links_.size())};
  l.from = from;
  l.to = to;
  l.length = length;
  l.movement = movement;
  l.phase_at_destination = phase_of(movement);
  links_.push_back(l);
  return l.id;
}

void GridTopology::index() {
  entries_.clear();
  neighbors_.clear();
  continuation_.clear();
  for (const auto& info : intersections_) neighbors_[info.id] = {};
  for (const auto& l : links_) {
    if (!l.from) entries_.push_back(l.id);
    if (l.from) {
      auto key = std::make_pair(l.from->value, static_cast<std::uint8_t>(l.movement));
      continuation_[key] = l.id;
    }
    if (l.from && l.to) {
      auto& a = neighbors_[*l.from];
      if (std::find(a.begin(), a.end(), *l.to) == a.end()) a.push_back(*l.to);
      auto& b = neighbors_[*l.to];
      if (std::find(b.begin(), b.end(), *l.from) == b.end()) b.push_back(*l.from);
    }
  }
  for (auto& [id, list] : neighbors_) std::sort(list.begin(), list.end());
}

const IntersectionInfo& GridTopology::intersection(IntersectionId id) const {
  for (const auto& info : intersections_)
    if (info.id == id) return info;
  throw std::out_of_range("unknown intersection " + id.label());
}

const std::vector<IntersectionId>& GridTopology::neighbors(IntersectionId id) const {
  auto it = neighbors_.find(id);
  if (it == neighbors_.end()) throw std::out_of_range("unknown intersection " + id.label());
  return it->second;
}

std::optional<LinkId> GridTopology::continuation(IntersectionId at, Movement movement) const {
  auto it = continuation_.find({at.value, static_cast<std::uint8_t>(movement)});
  if (it == continuation_.end()) return std::nullopt;
  return it->second;
}

std::vector<LinkId> GridTopology::approaches(IntersectionId at) const {
  std::vector<LinkId> out;
  for (const auto& l : links_)
    if (l.to && *l.to == at) out.push_back(l.id);
  return out;
}

std::vector<IntersectionId> GridTopology::route_from_entry(LinkId entry) const {
  std::vector<IntersectionId> out;
  const Link* current = &link(entry);
  while (current->to) {
    out.push_back(*current->to);
    auto next = continuation(*current->to, current->movement);
    if (!next) break;
    current = &link(*next);
  }
  return out;
}

void GridTopology::validate() const {
  for (const auto& l : links_) {
    if (!l.to) continue;
    if (!continuation(*l.to, l.movement))
      throw std::invalid_argument("dead-end interior approach: link " +
                                  std::to_string(l.id.value) + " enters " + l.to->label() +
                                  " with no continuation");
  }
}

GridTopology GridTopology::regular_grid(int rows, int cols, double link_length,
                                        const sched::IntersectionGeometry& geometry) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid needs at least one intersection");
  GridTopology t;
  auto node = [&](int r, int c) { return IntersectionId{r * cols + c + 1}; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) t.intersections_.push_back({node(r, c), geometry});

  // Horizontal corridors.
  for (int r = 0; r < rows; ++r) {
    t.add_link(std::nullopt, node(r, 0), link_length, Movement::East);
    for (int c = 0; c + 1 < cols; ++c)
      t.add_link(node(r, c), node(r, c + 1), link_length, Movement::East);
    t.add_link(node(r, cols - 1), std::nullopt, link_length, Movement::East);

    t.add_link(std::nullopt, node(r, cols - 1), link_length, Movement::West);
    for (int c = cols - 1; c > 0; --c)
      t.add_link(node(r, c), node(r, c - 1), link_length, Movement::West);
    t.add_link(node(r, 0), std::nullopt, link_length, Movement::West);
  }
  // Vertical corridors; south is increasing row index.
  for (int c = 0; c < cols; ++c) {
    t.add_link(std::nullopt, node(0, c), link_length, Movement::South);
    for (int r = 0; r + 1 < rows; ++r)
      t.add_link(node(r, c), node(r + 1, c), link_length, Movement::South);
    t.add_link(node(rows - 1, c), std::nullopt, link_length, Movement::South);

    t.add_link(std::nullopt, node(rows - 1, c), link_length, Movement::North);
    for (int r = rows - 1; r > 0; --r)
      t.add_link(node(r, c), node(r - 1, c), link_length, Movement::North);
    t.add_link(node(0, c), std::nullopt, link_length, Movement::North);
  }
  t.index();
  t.validate();
  return t;
}

GridTopology GridTopology::two_intersection_column(double spacing, double approach_length,
                                                   const sched::IntersectionGeometry& geometry) {
  GridTopology t;
  IntersectionId i1{1}, i2{2};
  t.intersections_.push_back({i1, geometry});
  t.intersections_.push_back({i2, geometry});

  // Southbound corridor: boundary -> I_1 -> I_2 -> boundary.
  t.add_link(std::nullopt, i1, approach_length, Movement::South);
  t.add_link(i1, i2, spacing, Movement::South);
  t.add_link(i2, std::nullopt, approach_length, Movement::South);
  // Northbound corridor: boundary -> I_2 -> I_1 -> boundary.
  t.add_link(std::nullopt, i2, approach_length, Movement::North);
  t.add_link(i2, i1, spacing, Movement::North);
  t.add_link(i1, std::nullopt, approach_length, Movement::North);
  // East/west corridors through each intersection.
  for (IntersectionId id : {i1, i2}) {
    t.add_link(std::nullopt, id, approach_length, Movement::East);
    t.add_link(id, std::nullopt, approach_length, Movement::East);
    t.add_link(std::nullopt, id, approach_length, Movement::West);
    t.add_link(id, std::nullopt, approach_length, Movement::West);
  }
  t.index();
  t.validate();
  return t;
}

std::optional<IntersectionId> route_vehicle_next_hop(const GridTopology& topology,
                                                     const sched::Vehicle& vehicle) {
  auto next = topology.continuation(vehicle.intersection, vehicle.movement);
  if (!next) {
    throw std::invalid_argument("vehicle " + std::to_string(vehicle.id) + " at " +
                                vehicle.intersection.label() +
                                " has no outgoing link for its movement");
  }
  return topology.link(*next).to;
}

}  // namespace aim::coord
