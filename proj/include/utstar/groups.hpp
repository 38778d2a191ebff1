#pragma once

// Grading groups: free groups (reduced words), cyclic groups and finite groups
// given by a multiplication table, together with homomorphisms and the
// partial group maps that accompany homogeneous involutions.

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "utstar/common.hpp"

namespace utstar {

enum class GroupKind { Free, Cyclic, Table };

inline const char* to_string(GroupKind k) {
  switch (k) {
    case GroupKind::Free: return "free";
    case GroupKind::Cyclic: return "cyclic";
    case GroupKind::Table: return "table";
  }
  return "?";
}

/// An element of one of the supported grading groups.
///
/// Free-group elements are stored as reduced words: letter `+i` is the
/// generator r_i and `-i` its inverse. Cyclic residues and table indices are
/// stored in `value()`. Elements carry no reference to their group, so every
/// operation goes through a GroupSpec which validates them.
class GroupElement {
 public:
  GroupElement() = default;

  static GroupElement free_word(std::vector<int> letters) {
    GroupElement e(GroupKind::Free);
    std::vector<int> reduced;
    reduced.reserve(letters.size());
    for (int l : letters) {
      if (l == 0) throw InvalidArgument("free word letter 0 is not a generator");
      if (!reduced.empty() && reduced.back() == -l) {
        reduced.pop_back();
      } else {
        reduced.push_back(l);
      }
    }
    e.letters_ = std::move(reduced);
    return e;
  }
  static GroupElement cyclic(std::uint32_t residue) {
    GroupElement e(GroupKind::Cyclic);
    e.value_ = residue;
    return e;
  }
  static GroupElement table(std::uint32_t index) {
    GroupElement e(GroupKind::Table);
    e.value_ = index;
    return e;
  }

  GroupKind kind() const { return kind_; }
  const std::vector<int>& letters() const { return letters_; }
  std::uint32_t value() const { return value_; }

  bool operator==(const GroupElement&) const = default;

  // Shortlex on words (r_i before r_i^-1 before r_{i+1}); numeric otherwise.
  std::strong_ordering operator<=>(const GroupElement& o) const {
    if (auto c = kind_ <=> o.kind_; c != 0) return c;
    if (kind_ != GroupKind::Free) return value_ <=> o.value_;
    if (auto c = letters_.size() <=> o.letters_.size(); c != 0) return c;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      auto key = [](int l) { return std::pair{std::abs(l), l < 0}; };
      if (auto c = key(letters_[i]) <=> key(o.letters_[i]); c != 0) return c;
    }
    return std::strong_ordering::equal;
  }

 private:
  explicit GroupElement(GroupKind k) : kind_(k) {}

  GroupKind kind_ = GroupKind::Free;
  std::vector<int> letters_;
  std::uint32_t value_ = 0;
};

/// A concrete group: free of rank k, cyclic of order q, or a finite table.
class GroupSpec {
 public:
  GroupSpec() = default;

  static GroupSpec free(int rank) {
    if (rank < 0) throw InvalidArgument("free group rank must be non-negative");
    GroupSpec g;
    g.kind_ = GroupKind::Free;
    g.rank_ = rank;
    return g;
  }

  static GroupSpec cyclic(std::uint32_t order) {
    if (order == 0) throw InvalidArgument("cyclic group order must be positive");
    GroupSpec g;
    g.kind_ = GroupKind::Cyclic;
    g.order_ = order;
    return g;
  }

  /// Validates the table exhaustively: closure, identity, inverses and
  /// associativity.
  static GroupSpec table(std::vector<std::vector<std::uint32_t>> mul, std::uint32_t identity) {
    const auto s = static_cast<std::uint32_t>(mul.size());
    if (s == 0) throw InvalidArgument("table group must be non-empty");
    if (identity >= s) throw InvalidArgument("table identity index out of range");
    for (const auto& row : mul) {
      if (row.size() != s) throw InvalidArgument("table group multiplication table is not square");
      for (auto v : row)
        if (v >= s) throw InvalidArgument("table group product out of range");
    }
    for (std::uint32_t a = 0; a < s; ++a)
      if (mul[identity][a] != a || mul[a][identity] != a)
        throw InvalidArgument("table identity is not neutral for element " + std::to_string(a));
    std::vector<std::uint32_t> inv(s, s);
    for (std::uint32_t a = 0; a < s; ++a) {
      for (std::uint32_t b = 0; b < s; ++b) {
        if (mul[a][b] == identity && mul[b][a] == identity) {
          inv[a] = b;
          break;
        }
      }
      if (inv[a] == s) throw InvalidArgument("table element " + std::to_string(a) + " has no inverse");
    }
    for (std::uint32_t a = 0; a < s; ++a)
      for (std::uint32_t b = 0; b < s; ++b)
        for (std::uint32_t c = 0; c < s; ++c)
          if (mul[mul[a][b]][c] != mul[a][mul[b][c]])
            throw InvalidArgument("table is not associative at (" + std::to_string(a) + "," +
                                  std::to_string(b) + "," + std::to_string(c) + ")");
    GroupSpec g;
    g.kind_ = GroupKind::Table;
    g.order_ = s;
    g.identity_index_ = identity;
    g.table_ = std::move(mul);
    g.inverse_ = std::move(inv);
    return g;
  }

  GroupKind kind() const { return kind_; }
  int rank() const { return rank_; }
  std::uint32_t order() const { return order_; }
  bool is_finite() const { return kind_ != GroupKind::Free; }
  const std::vector<std::vector<std::uint32_t>>& table() const { return table_; }
  std::uint32_t identity_index() const { return identity_index_; }

  bool operator==(const GroupSpec&) const = default;

  GroupElement identity() const {
    switch (kind_) {
      case GroupKind::Free: return GroupElement::free_word({});
      case GroupKind::Cyclic: return GroupElement::cyclic(0);
      case GroupKind::Table: return GroupElement::table(identity_index_);
    }
    return {};
  }

  /// Generator r_i (1-based) of a free group.
  GroupElement generator(int i) const {
    if (kind_ != GroupKind::Free || i < 1 || i > rank_)
      throw InvalidArgument("generator r" + std::to_string(i) + " is not defined in this group");
    return GroupElement::free_word({i});
  }

  bool contains(const GroupElement& e) const {
    if (e.kind() != kind_) return false;
    switch (kind_) {
      case GroupKind::Free:
        for (std::size_t i = 0; i < e.letters().size(); ++i) {
          int l = e.letters()[i];
          if (l == 0 || std::abs(l) > rank_) return false;
          if (i > 0 && e.letters()[i - 1] == -l) return false;
        }
        return true;
      case GroupKind::Cyclic:
      case GroupKind::Table: return e.value() < order_;
    }
    return false;
  }

  void require(const GroupElement& e) const {
    if (!contains(e)) throw InvalidArgument("element " + describe(e) + " does not belong to the " +
                                            to_string(kind_) + " group");
  }

  GroupElement mul(const GroupElement& a, const GroupElement& b) const {
    require(a);
    require(b);
    switch (kind_) {
      case GroupKind::Free: {
        std::vector<int> w = a.letters();
        w.insert(w.end(), b.letters().begin(), b.letters().end());
        return GroupElement::free_word(std::move(w));
      }
      case GroupKind::Cyclic:
        return GroupElement::cyclic(static_cast<std::uint32_t>(
            (static_cast<std::uint64_t>(a.value()) + b.value()) % order_));
      case GroupKind::Table: return GroupElement::table(table_[a.value()][b.value()]);
    }
    return {};
  }

  GroupElement inverse(const GroupElement& a) const {
    require(a);
    switch (kind_) {
      case GroupKind::Free: {
        std::vector<int> w(a.letters().rbegin(), a.letters().rend());
        for (int& l : w) l = -l;
        return GroupElement::free_word(std::move(w));
      }
      case GroupKind::Cyclic: return GroupElement::cyclic(a.value() == 0 ? 0 : order_ - a.value());
      case GroupKind::Table: return GroupElement::table(inverse_[a.value()]);
    }
    return {};
  }

  /// Product of a sequence; the identity for an empty range.
  GroupElement product(std::span<const GroupElement> xs) const {
    GroupElement acc = identity();
    for (const auto& x : xs) acc = mul(acc, x);
    return acc;
  }

  /// All elements of a finite group in canonical order.
  std::vector<GroupElement> elements() const {
    if (!is_finite()) throw InvalidArgument("cannot list the elements of an infinite group");
    std::vector<GroupElement> out;
    out.reserve(order_);
    for (std::uint32_t i = 0; i < order_; ++i)
      out.push_back(kind_ == GroupKind::Cyclic ? GroupElement::cyclic(i) : GroupElement::table(i));
    return out;
  }

  /// Element literals: "r1*r2^-1*r1" or "1" for free groups, a decimal
  /// residue or table index otherwise.
  GroupElement parse(std::string_view text) const {
    auto trimmed = trim(text);
    if (kind_ != GroupKind::Free) {
      std::uint32_t v = 0;
      auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
      if (ec != std::errc() || ptr != trimmed.data() + trimmed.size() || v >= order_)
        throw ParseError("invalid " + std::string(to_string(kind_)) + " group element '" +
                         std::string(text) + "'");
      return kind_ == GroupKind::Cyclic ? GroupElement::cyclic(v) : GroupElement::table(v);
    }
    if (trimmed == "1" || trimmed.empty()) return identity();
    std::vector<int> letters;
    std::size_t pos = 0;
    while (pos <= trimmed.size()) {
      auto star = trimmed.find('*', pos);
      auto token = trim(trimmed.substr(pos, star == std::string_view::npos ? std::string_view::npos : star - pos));
      letters.push_back(parse_letter(token, text));
      if (star == std::string_view::npos) break;
      pos = star + 1;
    }
    return GroupElement::free_word(std::move(letters));
  }

  std::string format(const GroupElement& e) const {
    require(e);
    return describe(e);
  }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  }

  int parse_letter(std::string_view token, std::string_view whole) const {
    auto fail = [&] { return ParseError("invalid free group element '" + std::string(whole) + "'"); };
    if (token.size() < 2 || token.front() != 'r') throw fail();
    token.remove_prefix(1);
    int sign = 1;
    if (auto caret = token.find('^'); caret != std::string_view::npos) {
      if (token.substr(caret) != "^-1") throw fail();
      sign = -1;
      token = token.substr(0, caret);
    }
    int g = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), g);
    if (ec != std::errc() || ptr != token.data() + token.size()) throw fail();
    if (g < 1 || g > rank_)
      throw ParseError("generator r" + std::to_string(g) + " outside free group of rank " + std::to_string(rank_));
    return sign * g;
  }

  static std::string describe(const GroupElement& e) {
    if (e.kind() != GroupKind::Free) return std::to_string(e.value());
    if (e.letters().empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < e.letters().size(); ++i) {
      if (i) out += '*';
      int l = e.letters()[i];
      out += 'r' + std::to_string(std::abs(l));
      if (l < 0) out += "^-1";
    }
    return out;
  }

  GroupKind kind_ = GroupKind::Free;
  int rank_ = 0;
  std::uint32_t order_ = 0;
  std::uint32_t identity_index_ = 0;
  std::vector<std::vector<std::uint32_t>> table_;
  std::vector<std::uint32_t> inverse_;
};

/// A homomorphism between grading groups. A free source is described by the
/// images of its generators; a finite source by the image of every element.
class GroupHom {
 public:
  static GroupHom from_generators(GroupSpec source, GroupSpec target, std::vector<GroupElement> images) {
    if (source.kind() != GroupKind::Free)
      throw InvalidArgument("generator images define a homomorphism only on a free group");
    if (static_cast<int>(images.size()) != source.rank())
      throw InvalidArgument("expected " + std::to_string(source.rank()) + " generator images, got " +
                            std::to_string(images.size()));
    for (const auto& im : images) target.require(im);
    return GroupHom(std::move(source), std::move(target), std::move(images));
  }

  /// `images[i]` is the image of the i-th element of the finite source.
  /// Multiplicativity is checked on all pairs.
  static GroupHom from_element_map(GroupSpec source, GroupSpec target, std::vector<GroupElement> images) {
    if (!source.is_finite()) throw InvalidArgument("element maps require a finite source group");
    if (images.size() != source.order())
      throw InvalidArgument("element map must list one image per source element");
    for (const auto& im : images) target.require(im);
    GroupHom h(std::move(source), std::move(target), std::move(images));
    const auto elems = h.source_.elements();
    for (const auto& a : elems)
      for (const auto& b : elems)
        if (h.apply(h.source_.mul(a, b)) != h.target_.mul(h.apply(a), h.apply(b)))
          throw InvalidArgument("element map is not multiplicative at (" + h.source_.format(a) + ", " +
                                h.source_.format(b) + ")");
    return h;
  }

  static GroupHom identity(const GroupSpec& g) {
    if (g.kind() == GroupKind::Free) {
      std::vector<GroupElement> gens;
      for (int i = 1; i <= g.rank(); ++i) gens.push_back(g.generator(i));
      return from_generators(g, g, std::move(gens));
    }
    return from_element_map(g, g, g.elements());
  }

  static GroupHom trivial(const GroupSpec& source, const GroupSpec& target) {
    std::size_t count = source.kind() == GroupKind::Free ? static_cast<std::size_t>(source.rank()) : source.order();
    return GroupHom(source, target, std::vector<GroupElement>(count, target.identity()));
  }

  const GroupSpec& source() const { return source_; }
  const GroupSpec& target() const { return target_; }
  const std::vector<GroupElement>& images() const { return images_; }

  GroupElement apply(const GroupElement& a) const {
    source_.require(a);
    if (source_.kind() != GroupKind::Free) return images_[a.value()];
    GroupElement acc = target_.identity();
    for (int l : a.letters()) {
      const auto& im = images_[static_cast<std::size_t>(std::abs(l) - 1)];
      acc = target_.mul(acc, l > 0 ? im : target_.inverse(im));
    }
    return acc;
  }

 private:
  GroupHom(GroupSpec s, GroupSpec t, std::vector<GroupElement> im)
      : source_(std::move(s)), target_(std::move(t)), images_(std::move(im)) {}

  GroupSpec source_;
  GroupSpec target_;
  std::vector<GroupElement> images_;
};

/// A partial map psi on the grading support.
class GroupInvolutionMap {
 public:
  void set(const GroupElement& g, const GroupElement& image) { map_[g] = image; }

  std::optional<GroupElement> find(const GroupElement& g) const {
    if (auto it = map_.find(g); it != map_.end()) return it->second;
    return std::nullopt;
  }

  const GroupElement& at(const GroupElement& g) const {
    auto it = map_.find(g);
    if (it == map_.end()) throw InvalidArgument("involution map is undefined on a requested degree");
    return it->second;
  }

  const std::map<GroupElement, GroupElement>& entries() const { return map_; }
  bool operator==(const GroupInvolutionMap&) const = default;

 private:
  std::map<GroupElement, GroupElement> map_;
};

struct InvolutionViolation {
  GroupElement first;
  GroupElement second;
  std::string reason;
};

/// Checks psi(psi(g)) = g whenever psi(g) lies in `support`, and
/// psi(gh) = psi(h) psi(g) whenever g, h and gh all lie in `support`.
/// Returns the first violation in canonical order, or nothing.
inline std::optional<InvolutionViolation> check_involution_map(const GroupSpec& group, const GroupInvolutionMap& psi,
                                                               std::span<const GroupElement> support) {
  std::vector<GroupElement> s(support.begin(), support.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  auto in_support = [&](const GroupElement& g) { return std::binary_search(s.begin(), s.end(), g); };
  for (const auto& g : s) {
    if (!psi.find(g)) throw InvalidArgument("involution map is undefined on " + group.format(g));
  }
  for (const auto& g : s) {
    const auto& image = psi.at(g);
    if (in_support(image) && psi.at(image) != g)
      return InvolutionViolation{g, image, "psi(psi(" + group.format(g) + ")) = " + group.format(psi.at(image)) +
                                               " differs from " + group.format(g)};
  }
  for (const auto& g : s) {
    for (const auto& h : s) {
      auto gh = group.mul(g, h);
      if (!in_support(gh)) continue;
      auto expected = group.mul(psi.at(h), psi.at(g));
      if (psi.at(gh) != expected)
        return InvolutionViolation{g, h, "psi(" + group.format(gh) + ") = " + group.format(psi.at(gh)) +
                                             " but psi(h)psi(g) = " + group.format(expected)};
    }
  }
  return std::nullopt;
}

}  // namespace utstar
