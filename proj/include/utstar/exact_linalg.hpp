#pragma once

// Sparse rank computation over the rationals (fraction-free elimination) and
// over prime fields, plus the policy that decides which one to trust.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "utstar/common.hpp"

namespace utstar {

template <typename T>
struct SparseEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  T value{};
};

/// Row-compressed sparse matrix. Rows are sorted by column; no stored zeros.
template <typename T>
class SparseMatrix {
 public:
  using Row = std::vector<std::pair<std::uint32_t, T>>;

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows) {}

  static SparseMatrix from_entries(std::size_t rows, std::size_t cols, const std::vector<SparseEntry<T>>& entries) {
    SparseMatrix m(rows, cols);
    for (const auto& e : entries) {
      if (e.row >= rows || e.col >= cols) throw InvalidArgument("sparse entry out of bounds");
      if (e.value == T(0)) continue;
      m.rows_[e.row].push_back({static_cast<std::uint32_t>(e.col), e.value});
    }
    for (auto& r : m.rows_) {
      std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t k = 1; k < r.size(); ++k)
        if (r[k].first == r[k - 1].first) throw InvalidArgument("duplicate sparse entry");
    }
    return m;
  }

  static SparseMatrix from_dense(const std::vector<std::vector<T>>& dense) {
    std::size_t cols = dense.empty() ? 0 : dense.front().size();
    std::vector<SparseEntry<T>> e;
    for (std::size_t i = 0; i < dense.size(); ++i) {
      if (dense[i].size() != cols) throw InvalidArgument("ragged dense matrix");
      for (std::size_t j = 0; j < cols; ++j) e.push_back({i, j, dense[i][j]});
    }
    return from_entries(dense.size(), cols, e);
  }

  /// Appends a row given as (column, value) pairs in any order.
  void push_row(Row row) {
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Row clean;
    for (auto& [c, v] : row) {
      if (c >= cols_) throw InvalidArgument("sparse entry out of bounds");
      if (!clean.empty() && clean.back().first == c) throw InvalidArgument("duplicate sparse entry");
      if (v != T(0)) clean.push_back({c, std::move(v)});
    }
    rows_.push_back(std::move(clean));
  }

  void set_cols(std::size_t cols) { cols_ = cols; }

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
  }
  const std::vector<Row>& row_data() const { return rows_; }

  std::vector<SparseEntry<T>> entries() const {
    std::vector<SparseEntry<T>> out;
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& [c, v] : rows_[i]) out.push_back({i, c, v});
    return out;
  }

  SparseMatrix transpose() const {
    SparseMatrix t(cols_, rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& [c, v] : rows_[i]) t.rows_[c].push_back({static_cast<std::uint32_t>(i), v});
    return t;
  }

  /// Coordinate text: header "rows cols nnz", then "row col value" per line.
  void dump(std::ostream& os) const {
    os << rows() << ' ' << cols() << ' ' << nnz() << '\n';
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& [c, v] : rows_[i]) os << i << ' ' << c << ' ' << v << '\n';
  }

  static SparseMatrix load(std::istream& is) {
    std::size_t r = 0, c = 0, nnz = 0;
    if (!(is >> r >> c >> nnz)) throw ParseError("missing matrix dump header");
    std::vector<SparseEntry<T>> e;
    for (std::size_t k = 0; k < nnz; ++k) {
      SparseEntry<T> x;
      if (!(is >> x.row >> x.col >> x.value)) throw ParseError("truncated matrix dump");
      e.push_back(x);
    }
    return from_entries(r, c, e);
  }

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t cols_ = 0;
  std::vector<Row> rows_;
};

using IntMatrix = SparseMatrix<std::int64_t>;
using RationalMatrix = SparseMatrix<Rational>;

enum class RankMode { Exact, ModularAgreed };

inline const char* to_string(RankMode m) { return m == RankMode::Exact ? "exact" : "modular-agreed"; }

struct RankResult {
  std::size_t value = 0;
  RankMode mode = RankMode::Exact;
  std::vector<std::uint64_t> primes;
  std::uint64_t steps = 0;
};

enum class RankMethod { Exact, Modular, Auto };

struct RankPolicy {
  RankMethod method = RankMethod::Auto;
  std::size_t exact_threshold = 5000;  // rows; Auto switches to primes above it
  int prime_count = 2;
  std::uint64_t seed = 0x5eed'0f'c0d1'a11dULL;
  std::uint64_t max_steps = 0;  // 0 = unlimited
};

namespace detail {

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t p) { return a * b % p; }

inline std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  a %= p;
  while (e) {
    if (e & 1) r = mul_mod(r, a, p);
    a = mul_mod(a, a, p);
    e >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin for 32-bit moduli (bases 2, 7, 61).
inline bool is_prime_u32(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL})
    if (n % q == 0) return n == q;
  std::uint64_t d = n - 1;
  int s = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 7ULL, 61ULL}) {
    if (a % n == 0) continue;
    auto x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

inline std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t p) { return pow_mod(a, p - 2, p); }

inline std::uint64_t residue(std::int64_t v, std::uint64_t p) {
  auto r = v % static_cast<std::int64_t>(p);
  return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(p) : r);
}

inline std::uint64_t residue(const BigInt& v, std::uint64_t p) {
  BigInt r = v % p;
  if (r < 0) r += p;
  return static_cast<std::uint64_t>(r);
}

inline std::uint64_t residue(const Rational& v, std::uint64_t p) {
  auto den = residue(BigInt(boost::multiprecision::denominator(v)), p);
  if (den == 0) throw InvalidArgument("prime " + std::to_string(p) + " divides a denominator");
  return mul_mod(residue(BigInt(boost::multiprecision::numerator(v)), p), inverse_mod(den, p), p);
}

inline void charge(std::uint64_t& steps, std::uint64_t amount, std::uint64_t max_steps) {
  steps += amount;
  if (max_steps && steps > max_steps)
    throw BudgetExceeded("elimination exceeded the step budget of " + std::to_string(max_steps));
}

template <typename V>
struct Lines {
  std::size_t dim = 0;
  std::vector<std::vector<std::pair<std::uint32_t, V>>> lines;
};

// Eliminates along the longer side so that each line lives in the smaller
// dimension. Lines are processed sparsest first; coordinates are relabelled
// so that the sparsest coordinates become pivot candidates first. Ties are
// broken by the original index, which keeps the run deterministic.
template <typename T, typename V, typename Convert>
Lines<V> oriented_lines(const SparseMatrix<T>& m, Convert&& convert) {
  const SparseMatrix<T>* src = &m;
  SparseMatrix<T> transposed;
  if (m.rows() < m.cols()) {
    transposed = m.transpose();
    src = &transposed;
  }
  Lines<V> out;
  out.dim = src->cols();
  std::vector<std::size_t> count(out.dim, 0);
  for (const auto& r : src->row_data())
    for (const auto& [c, v] : r) ++count[c];
  std::vector<std::uint32_t> order(out.dim);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return count[a] < count[b]; });
  std::vector<std::uint32_t> relabel(out.dim);
  for (std::uint32_t k = 0; k < order.size(); ++k) relabel[order[k]] = k;

  std::vector<std::size_t> line_order(src->rows());
  std::iota(line_order.begin(), line_order.end(), 0u);
  std::stable_sort(line_order.begin(), line_order.end(),
                   [&](auto a, auto b) { return src->row_data()[a].size() < src->row_data()[b].size(); });
  for (auto i : line_order) {
    const auto& r = src->row_data()[i];
    if (r.empty()) continue;
    std::vector<std::pair<std::uint32_t, V>> line;
    line.reserve(r.size());
    for (const auto& [c, v] : r) line.push_back({relabel[c], convert(v)});
    std::sort(line.begin(), line.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    out.lines.push_back(std::move(line));
  }
  return out;
}

inline std::size_t modular_rank(const Lines<std::uint64_t>& in, std::uint64_t p, std::uint64_t& steps,
                                std::uint64_t max_steps) {
  const std::size_t dim = in.dim;
  // pivots[c]: normalized line with leading coordinate c (entry 1 omitted)
  std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> pivots(dim);
  std::vector<char> has_pivot(dim, 0);
  std::vector<std::uint64_t> acc(dim, 0);
  std::vector<char> queued(dim, 0);
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> heap;
  std::size_t rank = 0;
  for (const auto& line : in.lines) {
    if (rank == dim) break;
    for (const auto& [c, v] : line) {
      acc[c] = v % p;
      if (!queued[c]) {
        queued[c] = 1;
        heap.push(c);
      }
    }
    charge(steps, line.size(), max_steps);
    while (!heap.empty()) {
      auto c = heap.top();
      heap.pop();
      queued[c] = 0;
      auto a = acc[c];
      if (a == 0) continue;
      if (!has_pivot[c]) {
        // new pivot: c is the leading coordinate, everything still queued is larger
        auto inv = inverse_mod(a, p);
        std::vector<std::pair<std::uint32_t, std::uint64_t>> piv;
        acc[c] = 0;
        while (!heap.empty()) {
          auto k = heap.top();
          heap.pop();
          queued[k] = 0;
          if (acc[k]) piv.push_back({k, mul_mod(acc[k], inv, p)});
          acc[k] = 0;
        }
        charge(steps, piv.size(), max_steps);
        pivots[c] = std::move(piv);
        has_pivot[c] = 1;
        ++rank;
        break;
      }
      acc[c] = 0;
      const auto& piv = pivots[c];
      for (const auto& [k, v] : piv) {
        acc[k] = (acc[k] + (p - mul_mod(a, v, p))) % p;
        if (!queued[k]) {
          queued[k] = 1;
          heap.push(k);
        }
      }
      charge(steps, piv.size(), max_steps);
    }
  }
  return rank;
}

inline BigInt content(const std::map<std::uint32_t, BigInt>& line) {
  BigInt g = 0;
  for (const auto& [c, v] : line) {
    g = boost::multiprecision::gcd(g, v);
    if (g == 1) break;
  }
  return g;
}

// Fraction-free forward elimination over the integers. Each reduction step
// replaces the working line by (lead * line - a * pivot) / gcd(lead, a), and
// stored pivots are kept primitive.
inline std::size_t integer_rank(const Lines<BigInt>& in, std::uint64_t& steps, std::uint64_t max_steps) {
  std::vector<std::map<std::uint32_t, BigInt>> pivots(in.dim);
  std::vector<char> has_pivot(in.dim, 0);
  std::size_t rank = 0;
  for (const auto& line : in.lines) {
    if (rank == in.dim) break;
    std::map<std::uint32_t, BigInt> acc;
    for (const auto& [c, v] : line)
      if (v != 0) acc.emplace(c, v);
    charge(steps, line.size(), max_steps);
    while (!acc.empty()) {
      auto lead = acc.begin();
      const auto c = lead->first;
      if (!has_pivot[c]) {
        auto g = content(acc);
        if (acc.begin()->second < 0) g = -g;
        for (auto& [k, v] : acc) v /= g;
        charge(steps, acc.size(), max_steps);
        pivots[c] = std::move(acc);
        has_pivot[c] = 1;
        ++rank;
        break;
      }
      const auto& piv = pivots[c];
      const BigInt& p_lead = piv.begin()->second;
      BigInt a = lead->second;
      BigInt g = boost::multiprecision::gcd(p_lead, a);
      BigInt scale = p_lead / g;
      BigInt factor = a / g;
      if (scale != 1)
        for (auto& [k, v] : acc) v *= scale;
      for (const auto& [k, v] : piv) {
        auto [it, inserted] = acc.try_emplace(k, 0);
        it->second -= factor * v;
        if (it->second == 0) acc.erase(it);
      }
      charge(steps, piv.size() + (scale != 1 ? acc.size() : 0), max_steps);
      auto h = content(acc);
      if (h > 1)
        for (auto& [k, v] : acc) v /= h;
    }
  }
  return rank;
}

template <typename T>
std::vector<std::pair<std::uint32_t, BigInt>> integer_line(const std::vector<std::pair<std::uint32_t, T>>& line) {
  std::vector<std::pair<std::uint32_t, BigInt>> out;
  if constexpr (std::is_same_v<T, Rational>) {
    BigInt lcm = 1;
    for (const auto& [c, v] : line) lcm = boost::multiprecision::lcm(lcm, BigInt(boost::multiprecision::denominator(v)));
    for (const auto& [c, v] : line)
      out.push_back({c, BigInt(boost::multiprecision::numerator(v)) * (lcm / boost::multiprecision::denominator(v))});
  } else {
    for (const auto& [c, v] : line) out.push_back({c, BigInt(v)});
  }
  return out;
}

}  // namespace detail

/// Rank over the rationals by fraction-free elimination. `max_steps` = 0 means unlimited.
template <typename T>
RankResult rank_fraction_free(const SparseMatrix<T>& m, std::uint64_t max_steps = 0) {
  // Rows are scaled to integers first; orientation and ordering follow the modular path.
  SparseMatrix<BigInt> integral(0, m.cols());
  for (const auto& r : m.row_data()) integral.push_row(detail::integer_line(r));
  auto lines = detail::oriented_lines<BigInt, BigInt>(integral, [](const BigInt& v) { return v; });
  RankResult r;
  r.value = detail::integer_rank(lines, r.steps, max_steps);
  r.mode = RankMode::Exact;
  return r;
}

/// Rank over the field with p elements.
template <typename T>
std::size_t rank_mod_p(const SparseMatrix<T>& m, std::uint64_t p, std::uint64_t* steps_out = nullptr,
                       std::uint64_t max_steps = 0) {
  if (!detail::is_prime_u32(p) || p >= (1ULL << 32)) throw InvalidArgument("modulus must be a prime below 2^32");
  auto lines = detail::oriented_lines<T, std::uint64_t>(m, [p](const T& v) { return detail::residue(v, p); });
  std::uint64_t steps = 0;
  auto r = detail::modular_rank(lines, p, steps, max_steps);
  if (steps_out) *steps_out += steps;
  return r;
}

/// Deterministic stream of primes in (2^30, 2^31).
class PrimeStream {
 public:
  explicit PrimeStream(std::uint64_t seed) : rng_(seed) {}
  std::uint64_t next() {
    std::uniform_int_distribution<std::uint64_t> dist((1ULL << 30) + 1, (1ULL << 31) - 1);
    for (;;) {
      auto c = dist(rng_) | 1ULL;
      if (detail::is_prime_u32(c)) return c;
    }
  }

 private:
  std::mt19937_64 rng_;
};

/// Exact below the policy threshold (or when asked), otherwise the maximum of
/// several random-prime ranks. A modular rank equal to min(rows, cols) is a
/// proof of full rank and is reported as exact.
template <typename T>
RankResult rank_certified(const SparseMatrix<T>& m, const RankPolicy& policy = {}) {
  const bool exact = policy.method == RankMethod::Exact ||
                     (policy.method == RankMethod::Auto && m.rows() <= policy.exact_threshold);
  if (exact) return rank_fraction_free(m, policy.max_steps);
  if (policy.prime_count < 1) throw InvalidArgument("at least one prime is required");
  const std::size_t full = std::min(m.rows(), m.cols());
  RankResult r;
  r.mode = RankMode::ModularAgreed;
  PrimeStream primes(policy.seed);
  std::vector<std::size_t> ranks;
  int skipped = 0;
  auto take = [&] {
    for (;;) {
      auto p = primes.next();
      try {
        ranks.push_back(rank_mod_p(m, p, &r.steps, policy.max_steps));
        r.primes.push_back(p);
        return;
      } catch (const InvalidArgument&) {
        if (++skipped > 16) throw Error("primes exhausted: every candidate divides a denominator");
      }
    }
  };
  auto reached_full = [&] { return !ranks.empty() && ranks.back() == full; };
  while (static_cast<int>(ranks.size()) < policy.prime_count && !reached_full()) take();
  // disagreement: one more prime, then report the maximum
  if (!reached_full() && std::adjacent_find(ranks.begin(), ranks.end(), std::not_equal_to<>()) != ranks.end()) take();
  r.value = *std::max_element(ranks.begin(), ranks.end());
  if (r.value == full) r.mode = RankMode::Exact;
  return r;
}

}  // namespace utstar
