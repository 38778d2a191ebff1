#pragma once

// The algebra UT_n of upper-triangular matrices with its matrix units, the
// orthogonal and symplectic involutions, and elementary gradings.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "utstar/common.hpp"
#include "utstar/groups.hpp"

namespace utstar {

enum class InvolutionKind { Orthogonal, Symplectic };

inline const char* to_string(InvolutionKind k) {
  return k == InvolutionKind::Orthogonal ? "orthogonal" : "symplectic";
}

inline bool involution_admissible(InvolutionKind k, int n) { return k == InvolutionKind::Orthogonal || n % 2 == 0; }

inline void require_admissible(InvolutionKind k, int n) {
  if (!involution_admissible(k, n))
    throw InvalidArgument("the symplectic involution requires even n (got n=" + std::to_string(n) + ")");
}

/// Position (i, j), 1-based, i <= j.
struct MatrixUnit {
  int i = 1;
  int j = 1;
  auto operator<=>(const MatrixUnit&) const = default;
};

/// All positions of UT_n in row-major order.
inline std::vector<MatrixUnit> unit_positions(int n) {
  std::vector<MatrixUnit> out;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n; ++j) out.push_back({i, j});
  return out;
}

inline std::size_t unit_count(int n) { return static_cast<std::size_t>(n) * (n + 1) / 2; }

/// Row-major index of (i, j) among unit_positions(n).
inline std::size_t unit_index(int n, int i, int j) {
  // rows 1..i-1 contribute n, n-1, ..., n-i+2 entries
  auto before = static_cast<std::size_t>((i - 1) * n - (i - 1) * (i - 2) / 2);
  return before + static_cast<std::size_t>(j - i);
}

/// Sign d_k of D = diag(1,...,1,-1,...,-1) used by the symplectic involution.
inline int symplectic_sign(int n, int k) { return 2 * k <= n ? 1 : -1; }

/// Image of the matrix unit e_{ij} under the involution: a signed unit.
struct SignedUnit {
  MatrixUnit unit;
  int sign = 1;
  bool operator==(const SignedUnit&) const = default;
};

inline SignedUnit star_unit(int n, MatrixUnit u, InvolutionKind kind) {
  require_admissible(kind, n);
  MatrixUnit r{n - u.j + 1, n - u.i + 1};
  int sign = kind == InvolutionKind::Symplectic ? symplectic_sign(n, r.i) * symplectic_sign(n, r.j) : 1;
  return {r, sign};
}

/// Dense upper-triangular n x n matrix over `T`, packed row-major.
template <typename T>
class UTMatrix {
 public:
  UTMatrix() = default;
  explicit UTMatrix(int n) : n_(n), data_(unit_count(checked(n)), T(0)) {}

  static UTMatrix zero(int n) { return UTMatrix(n); }

  static UTMatrix identity(int n) {
    UTMatrix m(n);
    for (int i = 1; i <= n; ++i) m.set(i, i, T(1));
    return m;
  }

  static UTMatrix unit(int i, int j, int n) {
    if (n < 1 || i < 1 || j > n || i > n || j < 1)
      throw InvalidArgument("matrix unit (" + std::to_string(i) + "," + std::to_string(j) + ") out of range for n=" +
                            std::to_string(n));
    if (i > j)
      throw InvalidArgument("matrix unit (" + std::to_string(i) + "," + std::to_string(j) +
                            ") lies below the diagonal");
    UTMatrix m(n);
    m.set(i, j, T(1));
    return m;
  }

  /// Sum of e_{kk} for k in [from, n].
  static UTMatrix diagonal_tail(int from, int n) {
    UTMatrix m(n);
    for (int k = std::max(from, 1); k <= n; ++k) m.set(k, k, T(1));
    return m;
  }

  int n() const { return n_; }

  const T& at(int i, int j) const { return data_[index(i, j)]; }
  void set(int i, int j, T v) { data_[index(i, j)] = std::move(v); }

  bool is_zero() const {
    for (const auto& v : data_)
      if (v != T(0)) return false;
    return true;
  }

  /// Nonzero entries in row-major order.
  std::vector<std::pair<MatrixUnit, T>> entries() const {
    std::vector<std::pair<MatrixUnit, T>> out;
    std::size_t k = 0;
    for (int i = 1; i <= n_; ++i)
      for (int j = i; j <= n_; ++j, ++k)
        if (data_[k] != T(0)) out.push_back({{i, j}, data_[k]});
    return out;
  }

  const std::vector<T>& packed() const { return data_; }

  bool operator==(const UTMatrix&) const = default;

  UTMatrix& operator+=(const UTMatrix& o) {
    same_size(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  UTMatrix& operator-=(const UTMatrix& o) {
    same_size(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  UTMatrix& operator*=(const T& s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend UTMatrix operator+(UTMatrix a, const UTMatrix& b) { return a += b; }
  friend UTMatrix operator-(UTMatrix a, const UTMatrix& b) { return a -= b; }
  friend UTMatrix operator*(UTMatrix a, const T& s) { return a *= s; }

  friend UTMatrix operator*(const UTMatrix& a, const UTMatrix& b) {
    a.same_size(b);
    const int n = a.n_;
    UTMatrix c(n);
    for (int i = 1; i <= n; ++i) {
      for (int k = i; k <= n; ++k) {
        const T& aik = a.at(i, k);
        if (aik == T(0)) continue;
        for (int j = k; j <= n; ++j) {
          const T& bkj = b.at(k, j);
          if (bkj != T(0)) c.data_[c.index(i, j)] += aik * bkj;
        }
      }
    }
    return c;
  }

  template <typename U>
  UTMatrix<U> cast() const {
    UTMatrix<U> out(n_);
    for (const auto& [u, v] : entries()) out.set(u.i, u.j, U(v));
    return out;
  }

 private:
  static int checked(int n) {
    if (n < 1) throw InvalidArgument("matrix size must be at least 1");
    return n;
  }

  std::size_t index(int i, int j) const {
    if (i < 1 || j > n_ || i > j)
      throw InvalidArgument("position (" + std::to_string(i) + "," + std::to_string(j) +
                            ") is not upper-triangular in UT_" + std::to_string(n_));
    return unit_index(n_, i, j);
  }

  void same_size(const UTMatrix& o) const {
    if (o.n_ != n_) throw InvalidArgument("matrix size mismatch");
  }

  int n_ = 0;
  std::vector<T> data_;
};

using RationalUT = UTMatrix<Rational>;

inline RationalUT matrix_unit(int i, int j, int n) { return RationalUT::unit(i, j, n); }

/// Orthogonal: reflection along the secondary diagonal. Symplectic: the
/// reflection conjugated by D = diag(1,...,1,-1,...,-1).
template <typename T>
UTMatrix<T> apply_star(const UTMatrix<T>& a, InvolutionKind kind) {
  const int n = a.n();
  require_admissible(kind, n);
  UTMatrix<T> out(n);
  for (const auto& [u, v] : a.entries()) {
    auto s = star_unit(n, u, kind);
    out.set(s.unit.i, s.unit.j, s.sign < 0 ? T(-v) : v);
  }
  return out;
}

/// An elementary G-grading of UT_n: deg e_{i,i+1} = h_i, and
/// deg e_{ij} = h_i h_{i+1} ... h_{j-1}.
class ElementaryGrading {
 public:
  ElementaryGrading() = default;

  ElementaryGrading(GroupSpec group, int n, std::vector<GroupElement> superdiagonal)
      : group_(std::move(group)), n_(n), superdiagonal_(std::move(superdiagonal)) {
    if (n < 1) throw InvalidArgument("grading size n must be at least 1");
    if (static_cast<int>(superdiagonal_.size()) != n - 1)
      throw InvalidArgument("a grading of UT_" + std::to_string(n) + " needs " + std::to_string(n - 1) +
                            " superdiagonal degrees, got " + std::to_string(superdiagonal_.size()));
    for (const auto& h : superdiagonal_) group_.require(h);
    build_degrees();
  }

  /// All matrix units of degree 1.
  static ElementaryGrading trivial(int n, GroupSpec group = GroupSpec::cyclic(1)) {
    auto id = group.identity();
    return ElementaryGrading(std::move(group), n, std::vector<GroupElement>(static_cast<std::size_t>(std::max(n - 1, 0)), id));
  }

  /// The fine grading by the free group on r_1, ..., r_{n-1}.
  static ElementaryGrading fine(int n) {
    auto f = GroupSpec::free(std::max(n - 1, 0));
    std::vector<GroupElement> h;
    for (int i = 1; i < n; ++i) h.push_back(f.generator(i));
    return ElementaryGrading(std::move(f), n, std::move(h));
  }

  const GroupSpec& group() const { return group_; }
  int n() const { return n_; }
  const std::vector<GroupElement>& superdiagonal() const { return superdiagonal_; }

  const GroupElement& degree(int i, int j) const {
    if (i < 1 || j > n_ || i > j)
      throw InvalidArgument("position (" + std::to_string(i) + "," + std::to_string(j) + ") out of range for UT_" +
                            std::to_string(n_));
    return degrees_[unit_index(n_, i, j)];
  }
  const GroupElement& degree(MatrixUnit u) const { return degree(u.i, u.j); }

  /// supp, sorted and without repetitions.
  const std::vector<GroupElement>& support() const { return support_; }

  bool in_support(const GroupElement& g) const { return std::binary_search(support_.begin(), support_.end(), g); }

  /// Units of degree g in row-major order; empty when g is outside the support.
  std::vector<MatrixUnit> homogeneous_component(const GroupElement& g) const {
    group_.require(g);
    std::vector<MatrixUnit> out;
    for (const auto& u : unit_positions(n_))
      if (degree(u) == g) out.push_back(u);
    return out;
  }

  bool operator==(const ElementaryGrading& o) const {
    return group_ == o.group_ && n_ == o.n_ && superdiagonal_ == o.superdiagonal_;
  }

 private:
  void build_degrees() {
    degrees_.assign(unit_count(n_), group_.identity());
    for (int i = 1; i <= n_; ++i) {
      GroupElement acc = group_.identity();
      for (int j = i; j <= n_; ++j) {
        if (j > i) acc = group_.mul(acc, superdiagonal_[static_cast<std::size_t>(j - 2)]);
        degrees_[unit_index(n_, i, j)] = acc;
      }
    }
    support_ = degrees_;
    std::sort(support_.begin(), support_.end());
    support_.erase(std::unique(support_.begin(), support_.end()), support_.end());
  }

  GroupSpec group_;
  int n_ = 0;
  std::vector<GroupElement> superdiagonal_;
  std::vector<GroupElement> degrees_;
  std::vector<GroupElement> support_;
};

/// The grading induced from a free-group grading through alpha.
inline ElementaryGrading induce_grading(const ElementaryGrading& fine, const GroupHom& alpha) {
  if (!(fine.group() == alpha.source()))
    throw InvalidArgument("homomorphism source does not match the grading group");
  std::vector<GroupElement> h;
  for (const auto& g : fine.superdiagonal()) h.push_back(alpha.apply(g));
  return ElementaryGrading(alpha.target(), fine.n(), std::move(h));
}

struct HomInvolutionCert {
  ElementaryGrading grading;
  InvolutionKind kind = InvolutionKind::Orthogonal;
  GroupInvolutionMap psi;
};

struct NotHomogeneousReport {
  MatrixUnit first;
  MatrixUnit second;
  std::string reason;
};

using HomogeneityResult = std::variant<HomInvolutionCert, NotHomogeneousReport>;

/// Builds psi from one representative unit per degree, then checks that every
/// unit of that degree is sent into the same component and that psi passes
/// check_involution_map on the support.
inline HomogeneityResult homogeneous_involution_map(const ElementaryGrading& grading, InvolutionKind kind) {
  const int n = grading.n();
  require_admissible(kind, n);
  const auto& group = grading.group();
  GroupInvolutionMap psi;
  std::map<GroupElement, MatrixUnit> representative;
  auto label = [](MatrixUnit u) { return "e" + std::to_string(u.i) + std::to_string(u.j); };
  for (const auto& u : unit_positions(n)) {
    const auto& g = grading.degree(u);
    const auto& image = grading.degree(star_unit(n, u, kind).unit);
    auto rep = representative.find(g);
    if (rep == representative.end()) {
      representative.emplace(g, u);
      psi.set(g, image);
      continue;
    }
    if (psi.at(g) != image) {
      return NotHomogeneousReport{
          rep->second, u,
          label(rep->second) + " and " + label(u) + " have degree " + group.format(g) +
              " but their images have degrees " + group.format(psi.at(g)) + " and " + group.format(image)};
    }
  }
  if (auto v = check_involution_map(group, psi, grading.support())) {
    auto first = representative.at(v->first);
    auto second = representative.count(v->second) ? representative.at(v->second) : first;
    return NotHomogeneousReport{first, second, v->reason};
  }
  return HomInvolutionCert{grading, kind, std::move(psi)};
}

}  // namespace utstar
