#include "proofrl/ids.hpp"

#include <algorithm>
#include <cctype>

namespace proofrl {

namespace {

// Splits "x12" into ("x", 12, true). Ids without a numeric suffix compare
// purely by string.
struct IdKey {
  std::string prefix;
  unsigned long long number = 0;
  bool has_number = false;
};

IdKey split_id(const std::string& id) {
  IdKey key;
  std::size_t i = id.size();
  while (i > 0 && std::isdigit(static_cast<unsigned char>(id[i - 1]))) --i;
  key.prefix = id.substr(0, i);
  if (i < id.size() && id.size() - i <= 18) {
    key.number = std::stoull(id.substr(i));
    key.has_number = true;
  } else {
    key.prefix = id;
  }
  return key;
}

}  // namespace

bool id_less(const std::string& a, const std::string& b) {
  const IdKey ka = split_id(a);
  const IdKey kb = split_id(b);
  if (ka.prefix != kb.prefix) return ka.prefix < kb.prefix;
  if (ka.has_number != kb.has_number) return !ka.has_number;
  if (ka.number != kb.number) return ka.number < kb.number;
  return a < b;
}

bool is_fact_id(const std::string& id) {
  return id.size() >= 2 && id[0] == 'x' &&
         std::all_of(id.begin() + 1, id.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

bool is_intermediate_id(const std::string& id) {
  if (id == "h") return true;
  return id.size() >= 2 && id[0] == 'i' &&
         std::all_of(id.begin() + 1, id.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

std::string fact_id(std::size_t k) { return "x" + std::to_string(k); }

std::string intermediate_id(std::size_t k) { return "i" + std::to_string(k); }

IdSet::IdSet(std::vector<std::string> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end(), id_less);
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

IdSet::IdSet(std::initializer_list<std::string> ids)
    : IdSet(std::vector<std::string>(ids)) {}

bool IdSet::contains(const std::string& id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id, id_less);
}

void IdSet::insert(const std::string& id) {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id, id_less);
  if (it == ids_.end() || *it != id) ids_.insert(it, id);
}

void IdSet::erase(const std::string& id) {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id, id_less);
  if (it != ids_.end() && *it == id) ids_.erase(it);
}

IdSet IdSet::set_union(const IdSet& other) const {
  std::vector<std::string> out;
  out.reserve(ids_.size() + other.ids_.size());
  std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(),
                 other.ids_.end(), std::back_inserter(out), id_less);
  IdSet result;
  result.ids_ = std::move(out);
  return result;
}

IdSet IdSet::set_intersection(const IdSet& other) const {
  std::vector<std::string> out;
  std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(),
                        other.ids_.end(), std::back_inserter(out), id_less);
  IdSet result;
  result.ids_ = std::move(out);
  return result;
}

IdSet IdSet::set_difference(const IdSet& other) const {
  std::vector<std::string> out;
  std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(),
                      other.ids_.end(), std::back_inserter(out), id_less);
  IdSet result;
  result.ids_ = std::move(out);
  return result;
}

std::string IdSet::joined(const std::string& sep) const {
  std::string out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (i) out += sep;
    out += ids_[i];
  }
  return out;
}

}  // namespace proofrl
