#pragma once

// Evaluation of star polynomials on UT_n, evaluation matrices, codimensions
// as ranks, and the checks built on top of them: independence of the
// multilinear families, witness certificates, the lower bound, the
// recurrence, the grading sandwich and asymptotic tables.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "utstar/common.hpp"
#include "utstar/exact_linalg.hpp"
#include "utstar/free_star_algebra.hpp"
#include "utstar/groups.hpp"
#include "utstar/parallel.hpp"
#include "utstar/ut_algebra.hpp"

namespace utstar {

using IntUT = UTMatrix<std::int64_t>;

/// One matrix per variable; tuple[k] is the value of x_{k+1}.
using EvaluationTuple = std::vector<IntUT>;

struct Budget {
  std::uint64_t max_rows = 50'000;        // rows of one evaluation matrix
  std::uint64_t max_columns = 10'000'000;  // discovered columns of one evaluation matrix
  std::uint64_t max_tuples = 10'000'000;   // substitution tuples of one evaluation matrix
};

namespace detail {

inline std::int64_t integer_coefficient(const Rational& c) {
  if (boost::multiprecision::denominator(c) != 1) throw InvalidArgument("evaluation requires integer coefficients");
  auto num = boost::multiprecision::numerator(c);
  if (num > std::numeric_limits<std::int64_t>::max() || num < std::numeric_limits<std::int64_t>::min())
    throw InvalidArgument("coefficient does not fit in 64 bits");
  return static_cast<std::int64_t>(num);
}

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

inline std::uint64_t factorial_saturating(int m) {
  std::uint64_t f = 1;
  for (int k = 2; k <= m; ++k) f = saturating_mul(f, static_cast<std::uint64_t>(k));
  return f;
}

}  // namespace detail

/// Product of the factors in order; starred factors use the involution.
template <typename T>
UTMatrix<T> evaluate_monomial(const StarMonomial& mono, const std::vector<UTMatrix<T>>& tuple,
                              std::optional<InvolutionKind> kind, int n) {
  auto acc = UTMatrix<T>::identity(n);
  for (const auto& f : mono.factors()) {
    if (f.var < 1 || static_cast<std::size_t>(f.var) > tuple.size())
      throw InvalidArgument("evaluation tuple does not assign x" + std::to_string(f.var));
    const auto& x = tuple[static_cast<std::size_t>(f.var - 1)];
    if (x.n() != n) throw InvalidArgument("matrix size mismatch in evaluation tuple");
    if (f.star) {
      if (!kind) throw InvalidArgument("starred variable evaluated without an involution");
      acc = acc * apply_star(x, *kind);
    } else {
      acc = acc * x;
    }
  }
  return acc;
}

inline IntUT evaluate_monomial(const StarMonomial& mono, const EvaluationTuple& tuple,
                               std::optional<InvolutionKind> kind) {
  if (tuple.empty() && mono.length() > 0) throw InvalidArgument("empty evaluation tuple");
  return evaluate_monomial<std::int64_t>(mono, tuple, kind, tuple.empty() ? 1 : tuple.front().n());
}

inline IntUT evaluate_polynomial(const SparsePolynomial& p, const EvaluationTuple& tuple,
                                 std::optional<InvolutionKind> kind, int n) {
  IntUT acc(n);
  for (const auto& [mono, c] : p.terms())
    acc += evaluate_monomial<std::int64_t>(mono, tuple, kind, n) * detail::integer_coefficient(c);
  return acc;
}

/// Evaluates a family member structurally: prefix product times the product
/// of its commutators computed as matrix commutators.
inline IntUT evaluate_shape(const CommutatorShape& shape, const EvaluationTuple& tuple, std::optional<InvolutionKind> kind,
                            int n) {
  auto value = [&](int var, bool star) {
    const auto& x = tuple.at(static_cast<std::size_t>(var - 1));
    if (!star) return x;
    if (!kind) throw InvalidArgument("starred variable evaluated without an involution");
    return apply_star(x, *kind);
  };
  auto acc = IntUT::identity(n);
  for (int v : shape.prefix) acc = acc * value(v, false);
  for (std::size_t c = 0; c < shape.commutators.size(); ++c) {
    const auto& seq = shape.commutators[c];
    auto comm = value(seq[0], shape.head_stars[c]);
    for (std::size_t k = 1; k < seq.size(); ++k) {
      auto y = value(seq[k], false);
      comm = comm * y - y * comm;
    }
    acc = acc * comm;
  }
  return acc;
}

/// The space of substitution tuples: variable k ranges over a fixed list of
/// candidate matrices, and tuples are numbered by an odometer whose last
/// variable turns fastest. Each evaluation entry is keyed by
/// tuple_id * unit_count(n) + unit_index(position).
class EvaluationSpace {
 public:
  EvaluationSpace(int n, std::optional<InvolutionKind> kind, std::vector<std::vector<IntUT>> candidates,
                  std::uint64_t max_tuples = Budget{}.max_tuples)
      : n_(n), kind_(kind) {
    if (n < 1) throw InvalidArgument("n must be at least 1");
    if (kind) require_admissible(*kind, n);
    const std::size_t m = candidates.size();
    stride_.assign(m, 1);
    tuple_count_ = 1;
    for (std::size_t k = m; k-- > 0;) {
      stride_[k] = tuple_count_;
      tuple_count_ = detail::saturating_mul(tuple_count_, std::max<std::size_t>(candidates[k].size(), 1));
    }
    if (tuple_count_ > max_tuples)
      throw BudgetExceeded("substitution space has " + std::to_string(tuple_count_) + " tuples, above the cap of " +
                           std::to_string(max_tuples));
    hits_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      for (auto& per_star : hits_[k]) per_star.assign(static_cast<std::size_t>(n) + 1, {});
      for (std::uint32_t ci = 0; ci < candidates[k].size(); ++ci) {
        const auto& x = candidates[k][ci];
        if (x.n() != n) throw InvalidArgument("candidate matrix size mismatch");
        for (const auto& [u, v] : x.entries()) hits_[k][0][static_cast<std::size_t>(u.i)].push_back({ci, u.j, v});
        if (kind) {
          for (const auto& [u, v] : apply_star(x, *kind).entries())
            hits_[k][1][static_cast<std::size_t>(u.i)].push_back({ci, u.j, v});
        }
      }
    }
  }

  int n() const { return n_; }
  std::size_t variables() const { return hits_.size(); }
  std::uint64_t tuple_count() const { return tuple_count_; }
  std::size_t positions() const { return unit_count(n_); }

  /// Appends (key, coeff * entry) for every tuple and position where the
  /// monomial is nonzero. Keys may repeat across monomials, never within one.
  void accumulate(const StarMonomial& mono, std::int64_t coeff,
                  std::vector<std::pair<std::uint64_t, std::int64_t>>& out) const {
    const auto& f = mono.factors();
    for (const auto& x : f) {
      if (x.var < 1 || static_cast<std::size_t>(x.var) > hits_.size())
        throw InvalidArgument("monomial uses x" + std::to_string(x.var) + " outside the substitution space");
      if (x.star && !kind_) throw InvalidArgument("starred variable evaluated without an involution");
    }
    const auto P = positions();
    if (f.empty()) {
      for (int a = 1; a <= n_; ++a) out.push_back({unit_index(n_, a, a), coeff});
      return;
    }
    auto dfs = [&](auto&& self, std::size_t depth, int start, int row, std::uint64_t tuple, std::int64_t value) -> void {
      if (depth == f.size()) {
        out.push_back({tuple * P + unit_index(n_, start, row), value});
        return;
      }
      const auto& factor = f[depth];
      const auto var = static_cast<std::size_t>(factor.var - 1);
      for (const auto& h : hits_[var][factor.star ? 1 : 0][static_cast<std::size_t>(row)])
        self(self, depth + 1, start, h.col, tuple + h.candidate * stride_[var], value * h.coeff);
    };
    for (int a = 1; a <= n_; ++a) dfs(dfs, 0, a, a, 0, coeff);
  }

  /// Decodes a column key into (tuple id, position).
  std::pair<std::uint64_t, MatrixUnit> decode(std::uint64_t key) const {
    const auto P = positions();
    auto pos = key % P;
    return {key / P, unit_positions(n_)[pos]};
  }

 private:
  struct Hit {
    std::uint32_t candidate;
    int col;
    std::int64_t coeff;
  };

  int n_;
  std::optional<InvolutionKind> kind_;
  std::vector<std::array<std::vector<std::vector<Hit>>, 2>> hits_;
  std::vector<std::uint64_t> stride_;
  std::uint64_t tuple_count_ = 1;
};

/// A row of an evaluation matrix: integer combination of monomials.
using LinearRow = std::vector<std::pair<StarMonomial, std::int64_t>>;

inline LinearRow to_row(const SparsePolynomial& p) {
  LinearRow r;
  for (const auto& [m, c] : p.terms()) r.push_back({m, detail::integer_coefficient(c)});
  return r;
}

inline LinearRow to_row(const StarMonomial& m) { return {{m, 1}}; }

struct EvaluationMatrix {
  IntMatrix matrix;
  std::vector<std::uint64_t> column_keys;  // sorted; column c has key column_keys[c]
  std::uint64_t tuple_count = 0;
};

/// Rows are evaluated independently (in parallel when asked); columns are the
/// sorted keys of all nonzero (tuple, position) pairs, so the matrix does not
/// depend on the thread count.
inline EvaluationMatrix assemble_evaluation_matrix(const std::vector<LinearRow>& rows, const EvaluationSpace& space,
                                                   const Budget& budget = {}, unsigned threads = 1) {
  if (rows.size() > budget.max_rows)
    throw BudgetExceeded("evaluation matrix would have " + std::to_string(rows.size()) + " rows, above the cap of " +
                         std::to_string(budget.max_rows));
  std::vector<std::vector<std::pair<std::uint64_t, std::int64_t>>> evaluated(rows.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    auto& out = evaluated[i];
    for (const auto& [mono, c] : rows[i]) space.accumulate(mono, c, out);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < out.size();) {
      auto key = out[r].first;
      std::int64_t sum = 0;
      for (; r < out.size() && out[r].first == key; ++r) sum += out[r].second;
      if (sum != 0) out[w++] = {key, sum};
    }
    out.resize(w);
  });
  EvaluationMatrix em;
  em.tuple_count = space.tuple_count();
  for (const auto& r : evaluated)
    for (const auto& [k, v] : r) em.column_keys.push_back(k);
  std::sort(em.column_keys.begin(), em.column_keys.end());
  em.column_keys.erase(std::unique(em.column_keys.begin(), em.column_keys.end()), em.column_keys.end());
  if (em.column_keys.size() > budget.max_columns)
    throw BudgetExceeded("evaluation matrix has " + std::to_string(em.column_keys.size()) +
                         " columns, above the cap of " + std::to_string(budget.max_columns));
  em.matrix = IntMatrix(0, em.column_keys.size());
  for (auto& r : evaluated) {
    IntMatrix::Row row;
    row.reserve(r.size());
    for (const auto& [k, v] : r) {
      auto c = std::lower_bound(em.column_keys.begin(), em.column_keys.end(), k) - em.column_keys.begin();
      row.push_back({static_cast<std::uint32_t>(c), v});
    }
    em.matrix.push_row(std::move(row));
    r.clear();
    r.shrink_to_fit();
  }
  return em;
}

/// Matrix units of UT_n, optionally restricted to the component of degree g.
inline std::vector<IntUT> unit_candidates(int n, const ElementaryGrading* grading = nullptr,
                                          const GroupElement* degree = nullptr) {
  std::vector<IntUT> out;
  for (const auto& u : unit_positions(n))
    if (!grading || grading->degree(u) == *degree) out.push_back(IntUT::unit(u.i, u.j, n));
  return out;
}

namespace detail {

inline int row_degree(const std::vector<LinearRow>& rows) {
  int m = 0;
  for (const auto& r : rows)
    for (const auto& [mono, c] : r)
      for (const auto& f : mono.factors()) m = std::max(m, f.var);
  return m;
}

}  // namespace detail

/// Evaluation matrix of `rows` over all matrix-unit tuples compatible with
/// the rows' degree vector (all unit tuples when ungraded).
inline EvaluationMatrix evaluation_matrix(const std::vector<LinearRow>& rows, int n,
                                          const ElementaryGrading* grading, std::optional<InvolutionKind> kind,
                                          const Budget& budget = {}, unsigned threads = 1) {
  const int m = detail::row_degree(rows);
  std::optional<std::vector<GroupElement>> degrees;
  for (const auto& r : rows)
    for (const auto& [mono, c] : r) {
      if (mono.graded() != (grading != nullptr))
        throw InvalidArgument("rows must carry degree vectors exactly when a grading is given");
      if (!grading) continue;
      if (!degrees) degrees = mono.degrees();
      if (*degrees != mono.degrees()) throw InvalidArgument("rows mix different degree vectors");
    }
  if (grading && grading->n() != n) throw InvalidArgument("grading size differs from n");
  std::vector<std::vector<IntUT>> candidates;
  for (int k = 0; k < m; ++k) {
    if (grading && degrees) {
      if (static_cast<int>(degrees->size()) < m) throw InvalidArgument("degree vector shorter than m");
      candidates.push_back(unit_candidates(n, grading, &(*degrees)[static_cast<std::size_t>(k)]));
    } else {
      candidates.push_back(unit_candidates(n));
    }
  }
  EvaluationSpace space(n, kind, std::move(candidates), budget.max_tuples);
  return assemble_evaluation_matrix(rows, space, budget, threads);
}

template <typename Row>
EvaluationMatrix evaluation_matrix(const std::vector<Row>& rows, int n, const ElementaryGrading* grading,
                                   std::optional<InvolutionKind> kind, const Budget& budget = {}, unsigned threads = 1) {
  std::vector<LinearRow> lr;
  lr.reserve(rows.size());
  for (const auto& r : rows) lr.push_back(to_row(r));
  return evaluation_matrix(lr, n, grading, kind, budget, threads);
}

/// Symmetric and skew elements spanning UT_n under the involution.
struct SymmetricSkewBasis {
  std::vector<IntUT> symmetric;
  std::vector<IntUT> skew;
};

inline SymmetricSkewBasis symmetric_skew_basis(int n, InvolutionKind kind) {
  require_admissible(kind, n);
  SymmetricSkewBasis b;
  for (const auto& u : unit_positions(n)) {
    auto s = star_unit(n, u, kind);
    if (s.unit < u) continue;
    auto e = IntUT::unit(u.i, u.j, n);
    if (s.unit == u) {
      (s.sign > 0 ? b.symmetric : b.skew).push_back(e);
      continue;
    }
    auto image = IntUT::unit(s.unit.i, s.unit.j, n) * std::int64_t{s.sign};
    b.symmetric.push_back(e + image);
    b.skew.push_back(e - image);
  }
  return b;
}

enum class CodimMethod { Auto, Direct, SymmetricSkew };

inline const char* to_string(CodimMethod m) {
  switch (m) {
    case CodimMethod::Auto: return "auto";
    case CodimMethod::Direct: return "direct";
    case CodimMethod::SymmetricSkew: return "symmetric-skew";
  }
  return "?";
}

struct CodimRequest {
  int n = 1;
  int m = 1;
  std::optional<ElementaryGrading> grading;  // nullopt: trivial grading
  std::optional<InvolutionKind> involution;
  RankPolicy policy;
  Budget budget;
  unsigned threads = 1;
  CodimMethod method = CodimMethod::Auto;
  bool use_symmetry = true;  // rank one representative per S_m-orbit of blocks
};

struct CodimBlock {
  std::string label;
  std::uint64_t multiplicity = 1;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t rank = 0;
  RankMode mode = RankMode::Exact;
  bool operator==(const CodimBlock&) const = default;
};

struct CodimReport {
  int n = 1;
  int m = 1;
  std::string grading = "trivial";
  std::string involution = "none";
  std::string method;
  std::uint64_t value = 0;
  RankMode mode = RankMode::Exact;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<CodimBlock> blocks;
  double elapsed_ms = 0;  // never compared or serialized by default

  bool operator==(const CodimReport& o) const {
    return n == o.n && m == o.m && grading == o.grading && involution == o.involution && method == o.method &&
           value == o.value && mode == o.mode && rows == o.rows && cols == o.cols && blocks == o.blocks;
  }
};

namespace detail {

inline std::string describe_grading(const std::optional<ElementaryGrading>& g) {
  if (!g) return "trivial";
  std::string out = std::string(to_string(g->group().kind()));
  if (g->group().kind() == GroupKind::Free) out += "(" + std::to_string(g->group().rank()) + ")";
  else out += "(" + std::to_string(g->group().order()) + ")";
  out += ":[";
  for (std::size_t k = 0; k < g->superdiagonal().size(); ++k) {
    if (k) out += ',';
    out += g->group().format(g->superdiagonal()[k]);
  }
  return out + "]";
}

inline CodimMethod resolve_method(const CodimRequest& req) {
  if (req.method != CodimMethod::Auto) return req.method;
  return (!req.grading && req.involution) ? CodimMethod::SymmetricSkew : CodimMethod::Direct;
}

inline std::uint64_t block_rows(int m, bool star) {
  auto rows = factorial_saturating(m);
  if (star) rows = saturating_mul(rows, m >= 64 ? std::numeric_limits<std::uint64_t>::max() : (std::uint64_t{1} << m));
  return rows;
}

inline void check_rows(std::uint64_t rows, const Budget& budget) {
  if (rows > budget.max_rows)
    throw BudgetExceeded("an evaluation matrix would have " +
                         (rows == std::numeric_limits<std::uint64_t>::max() ? std::string("more than 2^64")
                                                                            : std::to_string(rows)) +
                         " rows, above the cap of " + std::to_string(budget.max_rows));
}

inline CodimBlock rank_block(std::string label, std::uint64_t multiplicity, const std::vector<LinearRow>& rows,
                             const EvaluationSpace& space, const CodimRequest& req) {
  auto em = assemble_evaluation_matrix(rows, space, req.budget, req.threads);
  auto r = rank_certified(em.matrix, req.policy);
  return CodimBlock{std::move(label), multiplicity, em.matrix.rows(), em.matrix.cols(), r.value, r.mode};
}

inline void validate(const CodimRequest& req) {
  if (req.n < 1) throw InvalidArgument("n must be at least 1");
  if (req.m < 0) throw InvalidArgument("m must be non-negative");
  if (req.involution) require_admissible(*req.involution, req.n);
  if (req.grading) {
    if (req.grading->n() != req.n) throw InvalidArgument("grading is for UT_" + std::to_string(req.grading->n()) +
                                                         " but n=" + std::to_string(req.n));
    if (req.involution) {
      auto h = homogeneous_involution_map(*req.grading, *req.involution);
      if (auto* bad = std::get_if<NotHomogeneousReport>(&h))
        throw InvalidArgument(std::string("the ") + to_string(*req.involution) +
                              " involution is not homogeneous for this grading: " + bad->reason);
    }
  }
  if (req.method == CodimMethod::SymmetricSkew && (req.grading || !req.involution))
    throw InvalidArgument("the symmetric/skew decomposition needs an involution and the trivial grading");
}

inline std::uint64_t multinomial(const std::vector<std::size_t>& idx) {
  std::uint64_t out = factorial_saturating(static_cast<int>(idx.size()));
  std::size_t run = 1;
  for (std::size_t k = 1; k <= idx.size(); ++k) {
    if (k < idx.size() && idx[k] == idx[k - 1]) {
      ++run;
    } else {
      out /= factorial_saturating(static_cast<int>(run));
      run = 1;
    }
  }
  return out;
}

}  // namespace detail

/// Upper bound on the rows of the largest evaluation matrix codim(req) builds.
inline std::uint64_t planned_block_rows(const CodimRequest& req) {
  if (detail::resolve_method(req) == CodimMethod::SymmetricSkew) return detail::block_rows(req.m, false);
  return detail::block_rows(req.m, req.involution.has_value());
}

/// c_m as a rank. Ungraded: one block over all monomials, or with an
/// involution the symmetric/skew blocks P_{r,m-r} weighted by binomial(m, r).
/// Graded: one block per degree vector over supp^m.
inline CodimReport codim(const CodimRequest& req) {
  auto started = std::chrono::steady_clock::now();
  detail::validate(req);
  const auto method = detail::resolve_method(req);
  CodimReport rep;
  rep.n = req.n;
  rep.m = req.m;
  rep.grading = detail::describe_grading(req.grading);
  rep.involution = req.involution ? to_string(*req.involution) : "none";
  rep.method = to_string(method);
  const int n = req.n;
  const int m = req.m;
  const bool star = req.involution.has_value();
  detail::check_rows(planned_block_rows(req), req.budget);

  if (m == 0) {
    // P_0 is spanned by the empty monomial, which evaluates to the identity.
    rep.blocks.push_back({"()", 1, 1, static_cast<std::size_t>(n), 1, RankMode::Exact});
  } else if (method == CodimMethod::SymmetricSkew) {
    auto basis = symmetric_skew_basis(n, *req.involution);
    std::vector<LinearRow> rows;
    for_each_monomial(m, false, {}, [&](StarMonomial mono) { rows.push_back(to_row(mono)); });
    auto solve = [&](const std::vector<bool>& symmetric_vars, std::uint64_t multiplicity) {
      std::vector<std::vector<IntUT>> cand;
      std::string label = "(";
      for (bool s : symmetric_vars) {
        cand.push_back(s ? basis.symmetric : basis.skew);
        label += s ? 's' : 'k';
      }
      EvaluationSpace space(n, std::nullopt, std::move(cand), req.budget.max_tuples);
      rep.blocks.push_back(detail::rank_block(label + ")", multiplicity, rows, space, req));
    };
    if (req.use_symmetry) {
      BigInt binom = 1;
      for (int r = 0; r <= m; ++r) {
        std::vector<bool> sym(static_cast<std::size_t>(m), false);
        for (int k = 0; k < r; ++k) sym[static_cast<std::size_t>(k)] = true;
        solve(sym, static_cast<std::uint64_t>(binom));
        binom = binom * (m - r) / (r + 1);
      }
    } else {
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        std::vector<bool> sym(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) sym[static_cast<std::size_t>(k)] = (mask >> (m - 1 - k)) & 1u;
        solve(sym, 1);
      }
    }
  } else if (!req.grading) {
    std::vector<LinearRow> rows;
    for_each_monomial(m, star, {}, [&](StarMonomial mono) { rows.push_back(to_row(mono)); });
    std::vector<std::vector<IntUT>> cand(static_cast<std::size_t>(m), unit_candidates(n));
    EvaluationSpace space(n, req.involution, std::move(cand), req.budget.max_tuples);
    rep.blocks.push_back(detail::rank_block("()", 1, rows, space, req));
  } else {
    const auto& g = *req.grading;
    const auto& supp = g.support();
    std::vector<std::vector<IntUT>> component;
    for (const auto& d : supp) component.push_back(unit_candidates(n, &g, &d));
    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    const std::size_t s = supp.size();
    for (;;) {
      std::vector<GroupElement> degrees;
      std::vector<std::vector<IntUT>> cand;
      std::string label = "(";
      for (std::size_t k = 0; k < idx.size(); ++k) {
        degrees.push_back(supp[idx[k]]);
        cand.push_back(component[idx[k]]);
        if (k) label += ',';
        label += g.group().format(supp[idx[k]]);
      }
      std::vector<LinearRow> rows;
      for_each_monomial(m, star, degrees, [&](StarMonomial mono) { rows.push_back(to_row(mono)); });
      EvaluationSpace space(n, req.involution, std::move(cand), req.budget.max_tuples);
      rep.blocks.push_back(
          detail::rank_block(label + ")", req.use_symmetry ? detail::multinomial(idx) : 1, rows, space, req));
      // next index vector: non-decreasing with symmetry, all vectors otherwise
      std::size_t k = idx.size();
      while (k > 0 && idx[k - 1] + 1 == s) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t j = k; j < idx.size(); ++j) idx[j] = req.use_symmetry ? idx[k - 1] : 0;
    }
  }

  rep.mode = RankMode::Exact;
  for (const auto& b : rep.blocks) {
    rep.value += b.multiplicity * b.rank;
    rep.rows += b.rows;
    rep.cols += b.cols;
    if (b.mode != RankMode::Exact) rep.mode = RankMode::ModularAgreed;
  }
  rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return rep;
}

inline std::uint64_t codim_value(int n, int m, std::optional<InvolutionKind> kind = std::nullopt,
                                 std::optional<ElementaryGrading> grading = std::nullopt, const RankPolicy& policy = {}) {
  CodimRequest req;
  req.n = n;
  req.m = m;
  req.involution = kind;
  req.grading = std::move(grading);
  req.policy = policy;
  return codim(req).value;
}

/// Full-rank certification: one prime reaching rank = rows proves
/// independence over the rationals; otherwise the policy decides.
template <typename T>
RankResult certify_full_rank(const SparseMatrix<T>& m, const RankPolicy& policy) {
  if (policy.method == RankMethod::Exact) return rank_fraction_free(m, policy.max_steps);
  RankResult r;
  auto p = PrimeStream(policy.seed).next();
  r.value = rank_mod_p(m, p, &r.steps, policy.max_steps);
  r.primes.push_back(p);
  if (r.value == m.rows()) {
    r.mode = RankMode::Exact;
    return r;
  }
  return rank_certified(m, policy);
}

struct VerifyResult {
  std::string target;
  bool pass = false;
  std::string evidence;
  std::uint64_t expected = 0;
  std::uint64_t observed = 0;
  RankMode mode = RankMode::Exact;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

namespace detail {

inline std::uint64_t to_u64(const BigInt& v) { return static_cast<std::uint64_t>(v); }

inline VerifyResult family_rank(std::string target, const std::vector<FamilyMember>& family, int n,
                                std::optional<InvolutionKind> kind, const RankPolicy& policy, const Budget& budget,
                                unsigned threads) {
  VerifyResult v;
  v.target = std::move(target);
  v.expected = family.size();
  if (family.empty()) {
    v.pass = true;
    v.evidence = "vacuous: empty family";
    return v;
  }
  std::vector<LinearRow> rows;
  for (const auto& f : family) rows.push_back(to_row(f.polynomial));
  auto em = evaluation_matrix(rows, n, nullptr, kind, budget, threads);
  auto r = certify_full_rank(em.matrix, policy);
  v.observed = r.value;
  v.mode = r.mode;
  v.rows = em.matrix.rows();
  v.cols = em.matrix.cols();
  v.pass = r.value == family.size();
  v.evidence = "rank " + std::to_string(r.value) + " of " + std::to_string(family.size()) + " rows (" +
               std::to_string(v.cols) + " columns, " + to_string(r.mode) + ")";
  return v;
}

}  // namespace detail

inline VerifyResult verify_drensky_independence(int n, int m, const RankPolicy& policy = {}, const Budget& budget = {},
                                                unsigned threads = 1) {
  auto family = drensky_multilinear_family(n, m);
  auto v = detail::family_rank("drensky", family, n, std::nullopt, policy, budget, threads);
  auto q = detail::to_u64(count_qm(n, m));
  if (q != family.size()) {
    v.pass = false;
    v.evidence += "; enumeration gives " + std::to_string(family.size()) + " but counting gives " + std::to_string(q);
  }
  return v;
}

inline VerifyResult verify_star_family(int n, int m, InvolutionKind kind, const RankPolicy& policy = {},
                                       const Budget& budget = {}, unsigned threads = 1) {
  auto family = star_family(n, m, kind);
  auto v = detail::family_rank("star-family", family, n, kind, policy, budget, threads);
  auto expected = detail::to_u64(count_qm(n, m)) << free_flag_count(n);
  if (expected != family.size()) {
    v.pass = false;
    v.evidence += "; family size " + std::to_string(family.size()) + " differs from 2^floor((n-1)/2) q_m = " +
                  std::to_string(expected);
  }
  return v;
}

/// Tuple used to separate one member: prefix variables are the identity,
/// tails of commutator i are e_{i+1,i+1} + ... + e_{nn}, and the head is the
/// matrix whose (possibly starred) value is e_{i,i+1}.
inline EvaluationTuple witness_tuple(const CommutatorShape& shape, int n, std::optional<InvolutionKind> kind) {
  const int m = shape.degree();
  EvaluationTuple t(static_cast<std::size_t>(m), IntUT(n));
  for (int v : shape.prefix) t[static_cast<std::size_t>(v - 1)] = IntUT::identity(n);
  for (std::size_t c = 0; c < shape.commutators.size(); ++c) {
    const int i = static_cast<int>(c) + 1;
    const auto& seq = shape.commutators[c];
    for (std::size_t k = 1; k < seq.size(); ++k) t[static_cast<std::size_t>(seq[k] - 1)] = IntUT::diagonal_tail(i + 1, n);
    auto head = IntUT::unit(i, i + 1, n);
    if (shape.head_stars[c]) {
      if (!kind) throw InvalidArgument("starred head requires an involution");
      head = apply_star(head, *kind);
    }
    t[static_cast<std::size_t>(seq[0] - 1)] = head;
  }
  return t;
}

struct WitnessReport {
  IntMatrix matrix;  // entry (f, t): coefficient of e_{1n} in member f at the witness of member t
  std::size_t size = 0;
  std::size_t rank = 0;
  RankMode mode = RankMode::Exact;
  bool full_rank = false;
  bool diagonal_nonzero = false;
  std::size_t off_diagonal_nonzeros = 0;
  bool triangular = false;  // lower or upper triangular in family order
  bool pass = false;
};

inline WitnessReport witness_matrix(int n, int m, InvolutionKind kind, const RankPolicy& policy = {},
                                    unsigned threads = 1) {
  auto family = star_family(n, m, kind);
  const std::size_t size = family.size();
  std::vector<EvaluationTuple> tuples;
  for (const auto& f : family) tuples.push_back(witness_tuple(f.shape, n, kind));
  std::vector<IntMatrix::Row> rows(size);
  parallel_for(size, threads, [&](std::size_t r) {
    for (std::size_t c = 0; c < size; ++c) {
      auto v = evaluate_shape(family[r].shape, tuples[c], kind, n).at(1, n);
      if (v != 0) rows[r].push_back({static_cast<std::uint32_t>(c), v});
    }
  });
  WitnessReport w;
  w.size = size;
  w.matrix = IntMatrix(0, size);
  bool lower = true, upper = true;
  w.diagonal_nonzero = true;
  for (std::size_t r = 0; r < size; ++r) {
    bool diag = false;
    for (const auto& [c, v] : rows[r]) {
      if (c == r) diag = true;
      else ++w.off_diagonal_nonzeros;
      if (c > r) lower = false;
      if (c < r) upper = false;
    }
    w.diagonal_nonzero = w.diagonal_nonzero && diag;
    w.matrix.push_row(std::move(rows[r]));
  }
  w.triangular = lower || upper;
  auto rank = certify_full_rank(w.matrix, policy);
  w.rank = rank.value;
  w.mode = rank.mode;
  w.full_rank = rank.value == size;
  w.pass = w.full_rank && w.diagonal_nonzero;
  return w;
}

struct BoundCheck {
  bool pass = false;
  std::uint64_t codimension = 0;
  std::uint64_t bound = 0;
  RankMode mode = RankMode::Exact;
};

/// c_m(UT_n, *) >= 2^floor((n-1)/2) q_m.
inline BoundCheck lower_bound_check(int n, int m, InvolutionKind kind, const RankPolicy& policy = {},
                                    const Budget& budget = {}, unsigned threads = 1) {
  if (n < 2) throw InvalidArgument("the lower bound is stated for n >= 2");
  if (m < 2 * (n - 1))
    throw InvalidArgument("the lower bound needs m >= 2(n-1) = " + std::to_string(2 * (n - 1)));
  require_admissible(kind, n);
  CodimRequest req;
  req.n = n;
  req.m = m;
  req.involution = kind;
  req.policy = policy;
  req.budget = budget;
  req.threads = threads;
  auto rep = codim(req);
  BoundCheck b;
  b.codimension = rep.value;
  b.bound = detail::to_u64(count_qm(n, m)) << free_flag_count(n);
  b.mode = rep.mode;
  b.pass = b.codimension >= b.bound;
  return b;
}

struct RecurrenceCheck {
  bool pass = false;
  std::uint64_t codimension = 0;   // c_m(UT_n)
  std::uint64_t qm = 0;            // q_m
  std::uint64_t previous = 0;      // c_m(UT_{n-1})
  RankMode mode = RankMode::Exact;
};

/// c_m(UT_n) = q_m + c_m(UT_{n-1}).
inline RecurrenceCheck recurrence_check(int n, int m, const RankPolicy& policy = {}, const Budget& budget = {},
                                        unsigned threads = 1) {
  if (n < 2) throw InvalidArgument("the recurrence is stated for n >= 2");
  auto run = [&](int size) {
    CodimRequest req;
    req.n = size;
    req.m = m;
    req.policy = policy;
    req.budget = budget;
    req.threads = threads;
    return codim(req);
  };
  auto cur = run(n);
  auto prev = run(n - 1);
  RecurrenceCheck r;
  r.codimension = cur.value;
  r.previous = prev.value;
  r.qm = detail::to_u64(count_qm(n, m));
  r.mode = (cur.mode == RankMode::Exact && prev.mode == RankMode::Exact) ? RankMode::Exact : RankMode::ModularAgreed;
  r.pass = r.codimension == r.qm + r.previous;
  return r;
}

struct SandwichCheck {
  bool pass = false;
  std::uint64_t star = 0;     // c_m(UT_n, *)
  std::uint64_t graded = 0;   // c_m(UT_n, Gamma, *)
  std::uint64_t fine = 0;     // c_m(UT_n, Delta, *)
  RankMode mode = RankMode::Exact;
};

/// c_m(UT_n,*) <= c_m(UT_n,Gamma,*) <= c_m(UT_n,Delta,*).
inline SandwichCheck sandwich_check(int n, int m, const ElementaryGrading& grading, InvolutionKind kind,
                                    const RankPolicy& policy = {}, const Budget& budget = {}, unsigned threads = 1) {
  if (grading.n() != n) throw InvalidArgument("grading size differs from n");
  require_admissible(kind, n);
  if (auto h = homogeneous_involution_map(grading, kind); std::holds_alternative<NotHomogeneousReport>(h))
    throw InvalidArgument("the grading does not admit the " + std::string(to_string(kind)) +
                          " involution as a homogeneous involution: " + std::get<NotHomogeneousReport>(h).reason);
  auto run = [&](std::optional<ElementaryGrading> g) {
    CodimRequest req;
    req.n = n;
    req.m = m;
    req.grading = std::move(g);
    req.involution = kind;
    req.policy = policy;
    req.budget = budget;
    req.threads = threads;
    return codim(req);
  };
  auto a = run(std::nullopt);
  auto b = run(grading);
  auto c = run(ElementaryGrading::fine(n));
  SandwichCheck s;
  s.star = a.value;
  s.graded = b.value;
  s.fine = c.value;
  s.mode = (a.mode == RankMode::Exact && b.mode == RankMode::Exact && c.mode == RankMode::Exact)
               ? RankMode::Exact
               : RankMode::ModularAgreed;
  s.pass = s.star <= s.graded && s.graded <= s.fine;
  return s;
}

namespace detail {

inline BigInt pow_big(std::int64_t base, int e) {
  BigInt r = 1;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

}  // namespace detail

/// 2^floor((n-1)/2) / n^(n-1) * m^(n-1) * n^m.
inline Rational star_target(int n, int m) {
  if (n < 1 || m < 0) throw InvalidArgument("target needs n >= 1 and m >= 0");
  Rational num = Rational(detail::pow_big(2, free_flag_count(n)) * detail::pow_big(m, n - 1) * detail::pow_big(n, m));
  return num / Rational(detail::pow_big(n, n - 1));
}

/// m^(n-1) * n^(m-n+1).
inline Rational ordinary_target(int n, int m) {
  if (n < 1 || m < 0) throw InvalidArgument("target needs n >= 1 and m >= 0");
  Rational t = Rational(detail::pow_big(m, n - 1));
  const int e = m - n + 1;
  if (e >= 0) return t * Rational(detail::pow_big(n, e));
  return t / Rational(detail::pow_big(n, -e));
}

/// Decimal expansion of q rounded half up to `digits` places.
inline std::string decimal(const Rational& q, int digits) {
  BigInt num = boost::multiprecision::numerator(q);
  BigInt den = boost::multiprecision::denominator(q);
  const bool negative = num < 0;
  if (negative) num = -num;
  BigInt scale = detail::pow_big(10, digits);
  BigInt scaled = (num * scale * 2 + den) / (den * 2);
  BigInt whole = scaled / scale;
  BigInt frac = scaled % scale;
  std::string out = (negative ? "-" : "") + whole.str();
  if (digits > 0) {
    auto f = frac.str();
    out += "." + std::string(static_cast<std::size_t>(digits) - f.size(), '0') + f;
  }
  return out;
}

struct AsymptoticRow {
  int m = 0;
  std::uint64_t codimension = 0;
  Rational target;
  std::string ratio;
  RankMode mode = RankMode::Exact;
  bool operator==(const AsymptoticRow&) const = default;
};

struct AsymptoticTable {
  int n = 1;
  std::string grading = "trivial";
  std::string involution = "none";
  std::string target_formula;
  std::vector<AsymptoticRow> rows;
  bool operator==(const AsymptoticTable&) const = default;
};

/// c_m for m = 1..m_max next to the exact target (the star target when an
/// involution is present, the ordinary one otherwise). Informational only.
inline AsymptoticTable asymptotic_report(int n, int m_max, const std::optional<ElementaryGrading>& grading,
                                         std::optional<InvolutionKind> kind, const RankPolicy& policy = {},
                                         const Budget& budget = {}, unsigned threads = 1, int digits = 6) {
  if (m_max < 1) throw InvalidArgument("m-max must be at least 1");
  AsymptoticTable t;
  t.n = n;
  t.grading = detail::describe_grading(grading);
  t.involution = kind ? to_string(*kind) : "none";
  t.target_formula = kind ? "2^floor((n-1)/2)/n^(n-1)*m^(n-1)*n^m" : "m^(n-1)*n^(m-n+1)";
  std::vector<CodimRequest> reqs;
  for (int m = 1; m <= m_max; ++m) {
    CodimRequest req;
    req.n = n;
    req.m = m;
    req.grading = grading;
    req.involution = kind;
    req.policy = policy;
    req.budget = budget;
    req.threads = threads;
    // fail before computing anything if the last row is out of budget
    detail::check_rows(planned_block_rows(req), budget);
    reqs.push_back(std::move(req));
  }
  for (const auto& req : reqs) {
    auto rep = codim(req);
    AsymptoticRow row;
    row.m = req.m;
    row.codimension = rep.value;
    row.target = kind ? star_target(n, req.m) : ordinary_target(n, req.m);
    row.ratio = decimal(Rational(rep.value) / row.target, digits);
    row.mode = rep.mode;
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace utstar
