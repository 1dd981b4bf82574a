#pragma once

#include <algorithm>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "oedsel/errors.hpp"
#include "oedsel/types.hpp"

namespace oedsel {

/// Ordered set of selected candidate indices, in original candidate coordinates.
/// The order is the selection order.
class Design {
 public:
  Design() = default;
  explicit Design(Index n) : n_(n) {}
  Design(Index n, std::vector<Index> indices) : n_(n) {
    indices_.reserve(indices.size());
    for (Index i : indices) push_back(i);
  }

  Index n() const noexcept { return n_; }
  Index size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  const std::vector<Index>& indices() const noexcept { return indices_; }
  Index operator[](Index pos) const { return indices_.at(pos); }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  bool contains(Index i) const {
    return std::find(indices_.begin(), indices_.end(), i) != indices_.end();
  }

  void push_back(Index i) {
    if (i >= n_) {
      throw IndexError("design index " + std::to_string(i) + " out of range for n=" + std::to_string(n_));
    }
    if (contains(i)) throw IndexError("design index " + std::to_string(i) + " selected twice");
    indices_.push_back(i);
  }

  /// First `k` selected indices.
  Design prefix(Index k) const {
    Design d(n_);
    d.indices_.assign(indices_.begin(), indices_.begin() + static_cast<std::ptrdiff_t>(std::min(k, size())));
    return d;
  }

  /// Indices sorted increasingly (the set, without selection order).
  std::vector<Index> sorted() const {
    auto s = indices_;
    std::sort(s.begin(), s.end());
    return s;
  }

  /// Semicolon-joined representation, e.g. "3;7;12".
  std::string to_string() const {
    std::string out;
    for (Index p = 0; p < indices_.size(); ++p) {
      if (p) out += ';';
      out += std::to_string(indices_[p]);
    }
    return out;
  }

  static Design parse(std::string_view text, Index n) {
    Design d(n);
    std::string token;
    std::istringstream is{std::string(text)};
    while (std::getline(is, token, ';')) {
      if (token.empty()) continue;
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(token, &used);
      } catch (const std::exception&) {
        throw ConfigError("invalid design entry '" + token + "'");
      }
      if (used != token.size()) throw ConfigError("invalid design entry '" + token + "'");
      d.push_back(static_cast<Index>(v));
    }
    return d;
  }

  friend bool operator==(const Design& a, const Design& b) {
    return a.n_ == b.n_ && a.indices_ == b.indices_;
  }

 private:
  Index n_ = 0;
  std::vector<Index> indices_;
};

/// Maps positions in a shrunken matrix to original candidate indices.
/// Always strictly increasing.
class IndexMap {
 public:
  IndexMap() = default;

  static IndexMap identity(Index n) {
    IndexMap m;
    m.surviving_.resize(n);
    for (Index i = 0; i < n; ++i) m.surviving_[i] = i;
    return m;
  }

  /// Complement of `taken` within [0, n).
  static IndexMap complement_of(std::span<const Index> taken, Index n) {
    std::vector<bool> mask(n, false);
    for (Index i : taken) {
      if (i >= n) throw IndexError("index " + std::to_string(i) + " out of range for n=" + std::to_string(n));
      mask[i] = true;
    }
    IndexMap m;
    for (Index i = 0; i < n; ++i)
      if (!mask[i]) m.surviving_.push_back(i);
    return m;
  }

  Index size() const noexcept { return surviving_.size(); }
  Index original(Index pos) const { return surviving_.at(pos); }
  const std::vector<Index>& surviving() const noexcept { return surviving_; }

  /// Local position of an original index, or size() when absent.
  Index position_of(Index original) const {
    auto it = std::lower_bound(surviving_.begin(), surviving_.end(), original);
    if (it == surviving_.end() || *it != original) return size();
    return static_cast<Index>(it - surviving_.begin());
  }

  void remove(Index original) {
    auto pos = position_of(original);
    if (pos == size()) throw IndexError("index " + std::to_string(original) + " not in map");
    surviving_.erase(surviving_.begin() + static_cast<std::ptrdiff_t>(pos));
  }

 private:
  std::vector<Index> surviving_;
};

}  // namespace oedsel
