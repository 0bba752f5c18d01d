#ifndef PROOFRL_IDS_HPP_
#define PROOFRL_IDS_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace proofrl {

// Identifiers are strings like "x3" (facts), "i2" (intermediate conclusions)
// or "h" (hypothesis / gold root). Ordering is natural: alphabetic prefix
// first, then numeric suffix by value, so "x2" < "x10".
bool id_less(const std::string& a, const std::string& b);

struct IdLess {
  bool operator()(const std::string& a, const std::string& b) const {
    return id_less(a, b);
  }
};

bool is_fact_id(const std::string& id);
bool is_intermediate_id(const std::string& id);

std::string fact_id(std::size_t k);          // 1-based -> "x<k>"
std::string intermediate_id(std::size_t k);  // 1-based -> "i<k>"

// Set of identifiers kept sorted by id_less and deduplicated. Cheap value
// type; iteration order is canonical.
class IdSet {
 public:
  IdSet() = default;
  explicit IdSet(std::vector<std::string> ids);
  IdSet(std::initializer_list<std::string> ids);

  bool contains(const std::string& id) const;
  void insert(const std::string& id);
  void erase(const std::string& id);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<std::string>& items() const { return ids_; }

  bool operator==(const IdSet& other) const = default;

  IdSet set_union(const IdSet& other) const;
  IdSet set_intersection(const IdSet& other) const;
  IdSet set_difference(const IdSet& other) const;

  std::string joined(const std::string& sep = ",") const;

 private:
  std::vector<std::string> ids_;  // sorted by id_less, unique
};

}  // namespace proofrl

#endif  // PROOFRL_IDS_HPP_
