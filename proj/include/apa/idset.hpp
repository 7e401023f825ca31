#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <vector>

namespace apa {

using VarId = std::uint32_t;
using EdgeId = std::uint32_t;
using NodeId = std::uint32_t;

inline constexpr EdgeId kNoEdge = static_cast<EdgeId>(-1);
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

// Sorted, duplicate-free set of small integer ids. Program-sized universes
// (variables, definitions) stay in the low thousands, so a flat sorted vector
// beats node-based sets for the union/intersection-heavy algebra code.
class IdSet {
public:
  IdSet() = default;
  IdSet(std::initializer_list<std::uint32_t> ids) : ids_(ids) { normalize(); }
  explicit IdSet(std::vector<std::uint32_t> ids) : ids_(std::move(ids)) { normalize(); }

  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<std::uint32_t>& ids() const { return ids_; }

  bool contains(std::uint32_t id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }

  void insert(std::uint32_t id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) ids_.insert(it, id);
  }

  void erase(std::uint32_t id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it != ids_.end() && *it == id) ids_.erase(it);
  }

  bool intersects(const IdSet& o) const {
    auto a = ids_.begin(), b = o.ids_.begin();
    while (a != ids_.end() && b != o.ids_.end()) {
      if (*a == *b) return true;
      if (*a < *b) ++a; else ++b;
    }
    return false;
  }

  bool subset_of(const IdSet& o) const {
    return std::includes(o.ids_.begin(), o.ids_.end(), ids_.begin(), ids_.end());
  }

  friend IdSet operator|(const IdSet& a, const IdSet& b) {
    IdSet r;
    r.ids_.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r.ids_));
    return r;
  }
  friend IdSet operator&(const IdSet& a, const IdSet& b) {
    IdSet r;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r.ids_));
    return r;
  }
  friend IdSet operator-(const IdSet& a, const IdSet& b) {
    IdSet r;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r.ids_));
    return r;
  }
  friend bool operator==(const IdSet&, const IdSet&) = default;

private:
  void normalize() {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  std::vector<std::uint32_t> ids_;
};

} // namespace apa
