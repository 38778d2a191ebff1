#pragma once

// Multilinear slice of the free graded algebra with involution: star
// monomials, sparse polynomials, left-normed commutators and the multilinear
// families that are independent modulo the identities of UT_n.

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "utstar/common.hpp"
#include "utstar/groups.hpp"
#include "utstar/ut_algebra.hpp"

namespace utstar {

/// One occurrence x_var or x_var^* inside a monomial.
struct StarFactor {
  int var = 1;
  bool star = false;
  bool operator==(const StarFactor&) const = default;
};

/// A monomial in which every variable occurs at most once. Variables carry an
/// optional degree vector indexed by variable (degrees()[k-1] is deg x_k).
class StarMonomial {
 public:
  StarMonomial() = default;

  explicit StarMonomial(std::vector<StarFactor> factors, std::vector<GroupElement> degrees = {})
      : factors_(std::move(factors)), degrees_(std::move(degrees)) {
    std::vector<int> vars;
    for (const auto& f : factors_) {
      if (f.var < 1) throw InvalidArgument("variable indices start at 1");
      vars.push_back(f.var);
    }
    std::sort(vars.begin(), vars.end());
    if (std::adjacent_find(vars.begin(), vars.end()) != vars.end())
      throw InvalidArgument("monomial repeats a variable");
    if (!degrees_.empty() && !vars.empty() && static_cast<std::size_t>(vars.back()) > degrees_.size())
      throw InvalidArgument("degree vector does not cover every variable");
  }

  const std::vector<StarFactor>& factors() const { return factors_; }
  const std::vector<GroupElement>& degrees() const { return degrees_; }
  bool graded() const { return !degrees_.empty(); }
  int length() const { return static_cast<int>(factors_.size()); }

  /// True when the variables are exactly 1..m.
  bool covers(int m) const {
    if (length() != m) return false;
    std::vector<bool> seen(static_cast<std::size_t>(m) + 1, false);
    for (const auto& f : factors_) {
      if (f.var > m) return false;
      seen[static_cast<std::size_t>(f.var)] = true;
    }
    return std::all_of(seen.begin() + 1, seen.end(), [](bool b) { return b; });
  }

  /// Concatenation; variables must be disjoint and degree vectors compatible.
  friend StarMonomial operator*(const StarMonomial& a, const StarMonomial& b) {
    std::vector<StarFactor> f = a.factors_;
    f.insert(f.end(), b.factors_.begin(), b.factors_.end());
    if (a.graded() && b.graded() && a.degrees_ != b.degrees_)
      throw InvalidArgument("cannot multiply monomials with different degree vectors");
    return StarMonomial(std::move(f), a.graded() ? a.degrees_ : b.degrees_);
  }

  bool operator==(const StarMonomial&) const = default;

  /// Lexicographic on (variable sequence, flag vector, degree vector).
  std::strong_ordering operator<=>(const StarMonomial& o) const {
    auto vars = [](const StarMonomial& m) {
      std::vector<int> v;
      for (const auto& f : m.factors_) v.push_back(f.var);
      return v;
    };
    auto flags = [](const StarMonomial& m) {
      std::vector<int> v;
      for (const auto& f : m.factors_) v.push_back(f.star ? 1 : 0);
      return v;
    };
    if (auto c = vars(*this) <=> vars(o); c != 0) return c;
    if (auto c = flags(*this) <=> flags(o); c != 0) return c;
    return std::lexicographical_compare_three_way(degrees_.begin(), degrees_.end(), o.degrees_.begin(),
                                                  o.degrees_.end());
  }

  std::string to_string() const {
    if (factors_.empty()) return "1";
    std::string out;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      if (k) out += '*';
      out += 'x' + std::to_string(factors_[k].var);
      if (factors_[k].star) out += "^*";
    }
    return out;
  }

 private:
  std::vector<StarFactor> factors_;
  std::vector<GroupElement> degrees_;
};

/// Degree of one occurrence: deg x if unstarred, psi(deg x) if starred.
inline GroupElement occurrence_degree(const StarMonomial& mono, const StarFactor& f, const GroupInvolutionMap& psi) {
  if (!mono.graded()) throw InvalidArgument("monomial carries no degrees");
  const auto& g = mono.degrees()[static_cast<std::size_t>(f.var - 1)];
  return f.star ? psi.at(g) : g;
}

/// Finite rational combination of star monomials; zero coefficients are never stored.
class SparsePolynomial {
 public:
  using Terms = std::map<StarMonomial, Rational>;

  SparsePolynomial() = default;
  explicit SparsePolynomial(const StarMonomial& m, Rational c = 1) { add(m, std::move(c)); }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add(const StarMonomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  SparsePolynomial& operator+=(const SparsePolynomial& o) {
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  SparsePolynomial& operator-=(const SparsePolynomial& o) {
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
  }
  friend SparsePolynomial operator+(SparsePolynomial a, const SparsePolynomial& b) { return a += b; }
  friend SparsePolynomial operator-(SparsePolynomial a, const SparsePolynomial& b) { return a -= b; }

  friend SparsePolynomial operator*(const SparsePolynomial& a, const SparsePolynomial& b) {
    SparsePolynomial out;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) out.add(ma * mb, ca * cb);
    return out;
  }

  friend SparsePolynomial operator*(SparsePolynomial a, const Rational& s) {
    if (s == 0) return {};
    for (auto& [m, c] : a.terms_) c *= s;
    return a;
  }

  bool operator==(const SparsePolynomial&) const = default;

  /// Human-readable form, e.g. "-x1*x2 + x2*x1".
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      Rational mag = c < 0 ? Rational(-c) : c;
      if (first) {
        if (c < 0) out += '-';
      } else {
        out += c < 0 ? " - " : " + ";
      }
      if (mag != 1) out += utstar::to_string(mag) + '*';
      out += m.to_string();
      first = false;
    }
    return out;
  }

 private:
  Terms terms_;
};

inline SparsePolynomial commutator(const SparsePolynomial& a, const SparsePolynomial& b) { return a * b - b * a; }

inline SparsePolynomial variable(int var, bool star = false) {
  return SparsePolynomial(StarMonomial({StarFactor{var, star}}));
}

/// Left-normed [[...[x_{j1}^flag, x_{j2}], ...], x_{jt}].
inline SparsePolynomial expand_commutator(const std::vector<int>& indices, bool head_star = false) {
  if (indices.size() < 2) throw InvalidArgument("a commutator needs at least two variables");
  auto sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("commutator repeats a variable");
  SparsePolynomial acc = variable(indices.front(), head_star);
  for (std::size_t k = 1; k < indices.size(); ++k) acc = commutator(acc, variable(indices[k]));
  return acc;
}

/// x_{i1} ... x_{ir} c_1 ... c_{n-1}: an increasing prefix followed by
/// left-normed commutators, each with head j1 > j2 < j3 < ... < js.
struct CommutatorShape {
  std::vector<int> prefix;
  std::vector<std::vector<int>> commutators;
  std::vector<bool> head_stars;  // one flag per commutator

  auto operator<=>(const CommutatorShape&) const = default;

  int degree() const {
    int m = static_cast<int>(prefix.size());
    for (const auto& c : commutators) m += static_cast<int>(c.size());
    return m;
  }

  /// Throws unless the shape is well formed and partitions {1..m}.
  void validate(int m) const {
    if (!std::is_sorted(prefix.begin(), prefix.end()) ||
        std::adjacent_find(prefix.begin(), prefix.end()) != prefix.end())
      throw InvalidArgument("prefix variables must be strictly increasing");
    if (head_stars.size() != commutators.size()) throw InvalidArgument("one head flag per commutator expected");
    std::vector<int> all = prefix;
    for (const auto& c : commutators) {
      if (c.size() < 2) throw InvalidArgument("commutators need at least two variables");
      if (!(c[0] > c[1])) throw InvalidArgument("commutator head must exceed the second index");
      for (std::size_t k = 2; k < c.size(); ++k)
        if (!(c[k - 1] < c[k])) throw InvalidArgument("commutator tail must be strictly increasing");
      all.insert(all.end(), c.begin(), c.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<int> expected(static_cast<std::size_t>(m));
    std::iota(expected.begin(), expected.end(), 1);
    if (all != expected) throw InvalidArgument("shape does not partition the variables 1..m");
  }

  SparsePolynomial to_polynomial() const {
    SparsePolynomial acc(StarMonomial{});
    for (int v : prefix) acc = acc * variable(v);
    for (std::size_t c = 0; c < commutators.size(); ++c) acc = acc * expand_commutator(commutators[c], head_stars[c]);
    return acc;
  }

  std::string to_string() const {
    std::string out;
    for (int v : prefix) out += "x" + std::to_string(v);
    for (std::size_t c = 0; c < commutators.size(); ++c) {
      out += '[';
      for (std::size_t k = 0; k < commutators[c].size(); ++k) {
        if (k) out += ',';
        out += "x" + std::to_string(commutators[c][k]);
        if (k == 0 && head_stars[c]) out += "^*";
      }
      out += ']';
    }
    return out;
  }
};

struct FamilyMember {
  CommutatorShape shape;
  SparsePolynomial polynomial;
};

namespace detail {

inline std::vector<int> bits_to_vars(std::uint32_t mask) {
  std::vector<int> out;
  for (int k = 0; mask >> k; ++k)
    if ((mask >> k) & 1u) out.push_back(k + 1);
  return out;
}

// Ordered partitions of `remaining` into `blocks` commutators of length >= 2.
inline void enumerate_commutator_blocks(std::uint32_t remaining, int blocks, std::vector<std::vector<int>>& current,
                                        const std::function<void(const std::vector<std::vector<int>>&)>& emit) {
  const int left = std::popcount(remaining);
  if (blocks == 0) {
    if (left == 0) emit(current);
    return;
  }
  if (left < 2 * blocks) return;
  // iterate non-empty submasks of `remaining`
  for (std::uint32_t sub = remaining; sub; sub = (sub - 1) & remaining) {
    const int size = std::popcount(sub);
    if (size < 2 || left - size < 2 * (blocks - 1)) continue;
    auto vars = bits_to_vars(sub);
    // head is any non-minimal element; the tail is the rest in increasing order
    for (std::size_t h = 1; h < vars.size(); ++h) {
      std::vector<int> seq{vars[h]};
      for (std::size_t k = 0; k < vars.size(); ++k)
        if (k != h) seq.push_back(vars[k]);
      current.push_back(std::move(seq));
      enumerate_commutator_blocks(remaining & ~sub, blocks - 1, current, emit);
      current.pop_back();
    }
  }
}

inline std::vector<CommutatorShape> drensky_shapes(int n, int m) {
  if (n < 2) throw InvalidArgument("the multilinear family requires n >= 2");
  if (m > 30) throw BudgetExceeded("shape enumeration is limited to m <= 30");
  std::vector<CommutatorShape> out;
  const int blocks = n - 1;
  if (m < 2 * blocks) return out;
  const std::uint32_t full = (1u << m) - 1u;
  std::vector<std::vector<int>> current;
  for (std::uint32_t prefix = 0; prefix <= full; ++prefix) {
    if (m - std::popcount(prefix) < 2 * blocks) continue;
    auto pvars = bits_to_vars(prefix);
    enumerate_commutator_blocks(full & ~prefix, blocks, current, [&](const std::vector<std::vector<int>>& cs) {
      out.push_back(CommutatorShape{pvars, cs, std::vector<bool>(cs.size(), false)});
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Number of head flags that may be starred in the star family.
inline int free_flag_count(int n) { return (n - 1) / 2; }

/// All shapes with exactly n-1 commutators and no stars, in canonical order.
/// Empty when m < 2(n-1).
inline std::vector<FamilyMember> drensky_multilinear_family(int n, int m) {
  std::vector<FamilyMember> out;
  for (auto& s : detail::drensky_shapes(n, m)) {
    auto poly = s.to_polynomial();
    out.push_back({std::move(s), std::move(poly)});
  }
  return out;
}

/// q_m by counting: sum over prefix sizes of ordered partitions of the rest
/// into n-1 blocks of size >= 2, each block weighted by (size - 1) head choices.
inline BigInt count_qm(int n, int m) {
  if (n < 2) throw InvalidArgument("q_m is defined for n >= 2");
  if (m < 0) throw InvalidArgument("m must be non-negative");
  const int blocks = n - 1;
  std::vector<std::vector<BigInt>> binom(static_cast<std::size_t>(m) + 1);
  for (int a = 0; a <= m; ++a) {
    binom[a].assign(static_cast<std::size_t>(a) + 1, 1);
    for (int b = 1; b < a; ++b) binom[a][b] = binom[a - 1][b - 1] + binom[a - 1][b];
  }
  // weighted[N][b]: ordered partitions of N labelled variables into b blocks
  std::vector<std::vector<BigInt>> weighted(static_cast<std::size_t>(m) + 1,
                                            std::vector<BigInt>(static_cast<std::size_t>(blocks) + 1, 0));
  weighted[0][0] = 1;
  for (int N = 1; N <= m; ++N)
    for (int b = 1; b <= blocks; ++b)
      for (int s = 2; s <= N; ++s) weighted[N][b] += binom[N][s] * (s - 1) * weighted[N - s][b - 1];
  BigInt total = 0;
  for (int k = 0; k <= m; ++k) total += binom[m][k] * weighted[m - k][blocks];
  return total;
}

/// Drensky shapes crossed with every flag vector whose stars sit only on the
/// first floor((n-1)/2) commutators.
inline std::vector<FamilyMember> star_family(int n, int m, InvolutionKind kind) {
  if (n < 2) throw InvalidArgument("the star family requires n >= 2");
  require_admissible(kind, n);
  if (m < 2 * (n - 1))
    throw InvalidArgument("the star family needs m >= 2(n-1) = " + std::to_string(2 * (n - 1)) +
                          " (got m=" + std::to_string(m) + ")");
  const int free_flags = free_flag_count(n);
  std::vector<CommutatorShape> shapes;
  for (const auto& s : detail::drensky_shapes(n, m)) {
    for (std::uint32_t mask = 0; mask < (1u << free_flags); ++mask) {
      auto shape = s;
      for (int l = 0; l < free_flags; ++l) shape.head_stars[static_cast<std::size_t>(l)] = (mask >> (free_flags - 1 - l)) & 1u;
      shapes.push_back(std::move(shape));
    }
  }
  std::sort(shapes.begin(), shapes.end());
  std::vector<FamilyMember> out;
  for (auto& s : shapes) {
    auto poly = s.to_polynomial();
    out.push_back({std::move(s), std::move(poly)});
  }
  return out;
}

/// Streams all multilinear monomials of degree m: permutations in
/// lexicographic order, then flag vectors (factor 1 most significant).
/// With a degree vector every monomial carries it.
template <typename Fn>
void for_each_monomial(int m, bool star, const std::vector<GroupElement>& degrees, Fn&& fn) {
  if (m < 0) throw InvalidArgument("m must be non-negative");
  if (!degrees.empty() && static_cast<int>(degrees.size()) != m)
    throw InvalidArgument("degree vector length must equal m");
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 1);
  const std::uint64_t flag_count = star ? (std::uint64_t{1} << m) : 1;
  do {
    for (std::uint64_t mask = 0; mask < flag_count; ++mask) {
      std::vector<StarFactor> f(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k) f[static_cast<std::size_t>(k)] = {perm[static_cast<std::size_t>(k)], star && ((mask >> (m - 1 - k)) & 1u)};
      fn(StarMonomial(std::move(f), degrees));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
}

inline std::vector<StarMonomial> enumerate_monomials(int m, bool star,
                                                     const std::vector<std::vector<GroupElement>>& degree_vectors = {}) {
  std::vector<StarMonomial> out;
  auto collect = [&](StarMonomial mono) { out.push_back(std::move(mono)); };
  if (degree_vectors.empty()) {
    for_each_monomial(m, star, {}, collect);
  } else {
    for (const auto& d : degree_vectors) for_each_monomial(m, star, d, collect);
  }
  return out;
}

/// Reverses every monomial and toggles every flag. Variables keep their own
/// degrees; a starred occurrence then lives in degree psi(g), so psi must be
/// defined on every degree that occurs.
inline SparsePolynomial star_of_polynomial(const SparsePolynomial& p, const GroupInvolutionMap* psi = nullptr) {
  SparsePolynomial out;
  for (const auto& [mono, c] : p.terms()) {
    if (mono.graded() != (psi != nullptr))
      throw InvalidArgument("an involution map is required exactly when the polynomial is graded");
    if (psi)
      for (const auto& g : mono.degrees()) psi->at(g);
    std::vector<StarFactor> f(mono.factors().rbegin(), mono.factors().rend());
    for (auto& x : f) x.star = !x.star;
    out.add(StarMonomial(std::move(f), mono.degrees()), c);
  }
  return out;
}

}  // namespace utstar
