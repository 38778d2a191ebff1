// Randomized invariant checks. Every property runs kCases independent cases
// from a fixed seed, so failures are reproducible.

#include <gtest/gtest.h>

#include <random>
#include <variant>

#include "oracles.hpp"
#include "utstar/codimension.hpp"

using namespace utstar;

namespace {

constexpr int kCases = 250;

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

IntUT random_ut(Rng& rng, int n, int spread = 4) {
  IntUT a(n);
  for (const auto& u : unit_positions(n)) a.set(u.i, u.j, uniform(rng, -spread, spread));
  return a;
}

oracle::Dense to_dense(const IntUT& a) {
  auto d = oracle::zero(a.n());
  for (const auto& [u, v] : a.entries()) d[u.i - 1][u.j - 1] = v;
  return d;
}

InvolutionKind random_kind(Rng& rng, int n) {
  if (n % 2 == 0 && uniform(rng, 0, 1)) return InvolutionKind::Symplectic;
  return InvolutionKind::Orthogonal;
}

GroupSpec klein() { return GroupSpec::table({{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}}, 0); }

ElementaryGrading random_grading(Rng& rng, int n) {
  std::vector<GroupElement> h;
  switch (uniform(rng, 0, 3)) {
    case 0: {
      auto q = static_cast<std::uint32_t>(uniform(rng, 1, 5));
      for (int i = 1; i < n; ++i) h.push_back(GroupElement::cyclic(static_cast<std::uint32_t>(uniform(rng, 0, static_cast<int>(q) - 1))));
      return ElementaryGrading(GroupSpec::cyclic(q), n, h);
    }
    case 1: {
      const int r = uniform(rng, 1, 3);
      auto f = GroupSpec::free(r);
      for (int i = 1; i < n; ++i) {
        std::vector<int> letters;
        for (int k = uniform(rng, 0, 2); k > 0; --k) letters.push_back(uniform(rng, 1, r) * (uniform(rng, 0, 1) ? 1 : -1));
        h.push_back(GroupElement::free_word(letters));
      }
      return ElementaryGrading(f, n, h);
    }
    case 2: {
      for (int i = 1; i < n; ++i) h.push_back(GroupElement::table(static_cast<std::uint32_t>(uniform(rng, 0, 3))));
      return ElementaryGrading(klein(), n, h);
    }
    default: {
      // symmetric superdiagonal: h_i = h_{n-i}, which always admits the orthogonal involution
      auto q = static_cast<std::uint32_t>(uniform(rng, 2, 4));
      h.resize(static_cast<std::size_t>(std::max(n - 1, 0)));
      for (int i = 1; i < n; ++i) {
        if (i > n - i) h[static_cast<std::size_t>(i - 1)] = h[static_cast<std::size_t>(n - i - 1)];
        else h[static_cast<std::size_t>(i - 1)] = GroupElement::cyclic(static_cast<std::uint32_t>(uniform(rng, 0, static_cast<int>(q) - 1)));
      }
      return ElementaryGrading(GroupSpec::cyclic(q), n, h);
    }
  }
}

SparsePolynomial random_polynomial(Rng& rng, int vars, int max_terms) {
  SparsePolynomial p;
  for (int t = uniform(rng, 1, max_terms); t > 0; --t) {
    std::vector<int> order(static_cast<std::size_t>(vars));
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(static_cast<std::size_t>(uniform(rng, 0, vars)));
    std::vector<StarFactor> f;
    for (int v : order) f.push_back({v, uniform(rng, 0, 1) == 1});
    p.add(StarMonomial(f), Rational(uniform(rng, -3, 3)));
  }
  return p;
}

}  // namespace

TEST(Property, InvolutionAxioms) {
  Rng rng(1);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 1, 6);
    const auto kind = random_kind(rng, n);
    auto a = random_ut(rng, n);
    auto b = random_ut(rng, n);
    auto sa = apply_star(a, kind);
    EXPECT_EQ(apply_star(sa, kind), a);
    EXPECT_EQ(apply_star(a * b, kind), apply_star(b, kind) * sa);
    EXPECT_EQ(apply_star(a + b, kind), sa + apply_star(b, kind));
    EXPECT_EQ(to_dense(sa), oracle::star(to_dense(a), kind == InvolutionKind::Orthogonal ? oracle::Orth : oracle::Symp));
  }
}

TEST(Property, MatrixProductMatchesDense) {
  Rng rng(2);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 1, 6);
    auto a = random_ut(rng, n);
    auto b = random_ut(rng, n);
    EXPECT_EQ(to_dense(a * b), oracle::mul(to_dense(a), to_dense(b)));
  }
}

TEST(Property, UnitTupleEvaluationIsSignedUnit) {
  Rng rng(3);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 1, 5);
    const int m = uniform(rng, 1, 5);
    const bool with_star = uniform(rng, 0, 1);
    std::optional<InvolutionKind> kind;
    if (with_star) kind = random_kind(rng, n);
    auto units = unit_positions(n);
    EvaluationTuple t;
    for (int k = 0; k < m; ++k) {
      auto u = units[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(units.size()) - 1))];
      t.push_back(IntUT::unit(u.i, u.j, n));
    }
    std::vector<StarFactor> f;
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), rng);
    for (int v : order) f.push_back({v, with_star && uniform(rng, 0, 1)});
    auto value = evaluate_monomial(StarMonomial(f), t, kind);
    auto e = value.entries();
    ASSERT_LE(e.size(), 1u);
    if (!e.empty()) {
      EXPECT_EQ(std::abs(e[0].second), 1);
      if (e[0].second < 0) EXPECT_EQ(kind, InvolutionKind::Symplectic);
    }
  }
}

TEST(Property, GradingMultiplicativity) {
  Rng rng(4);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 1, 6);
    auto g = random_grading(rng, n);
    const auto& G = g.group();
    for (int i = 1; i <= n; ++i) {
      EXPECT_EQ(g.degree(i, i), G.identity());
      for (int j = i; j <= n; ++j)
        for (int k = j; k <= n; ++k) EXPECT_EQ(g.degree(i, k), G.mul(g.degree(i, j), g.degree(j, k)));
    }
    std::size_t total = 0;
    for (const auto& d : g.support()) total += g.homogeneous_component(d).size();
    EXPECT_EQ(total, unit_count(n));
  }
}

TEST(Property, InducedGradingCommutesWithDegrees) {
  Rng rng(5);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 1, 6);
    auto fine = ElementaryGrading::fine(n);
    const auto q = static_cast<std::uint32_t>(uniform(rng, 1, 6));
    std::vector<GroupElement> images;
    for (int i = 1; i < n; ++i) images.push_back(GroupElement::cyclic(static_cast<std::uint32_t>(uniform(rng, 0, static_cast<int>(q) - 1))));
    auto alpha = GroupHom::from_generators(fine.group(), GroupSpec::cyclic(q), images);
    auto induced = induce_grading(fine, alpha);
    for (const auto& u : unit_positions(n)) EXPECT_EQ(induced.degree(u), alpha.apply(fine.degree(u)));
  }
}

TEST(Property, PsiCertificateConsistency) {
  Rng rng(6);
  int certified = 0, conflicts = 0;
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 1, 6);
    auto g = random_grading(rng, n);
    const auto kind = random_kind(rng, n);
    auto r = homogeneous_involution_map(g, kind);
    if (auto* cert = std::get_if<HomInvolutionCert>(&r)) {
      ++certified;
      for (const auto& u : unit_positions(n))
        EXPECT_EQ(g.degree(star_unit(n, u, kind).unit), cert->psi.at(g.degree(u)));
      EXPECT_FALSE(check_involution_map(g.group(), cert->psi, g.support()));
    } else {
      ++conflicts;
      const auto& bad = std::get<NotHomogeneousReport>(r);
      EXPECT_FALSE(bad.reason.empty());
      if (bad.first != bad.second && g.degree(bad.first) == g.degree(bad.second))
        EXPECT_NE(g.degree(star_unit(n, bad.first, kind).unit), g.degree(star_unit(n, bad.second, kind).unit));
    }
  }
  EXPECT_GT(certified, 0);
  EXPECT_GT(conflicts, 0);
}

TEST(Property, FineGradingAlwaysCertifies) {
  Rng rng(7);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 1, 7);
    EXPECT_TRUE(std::holds_alternative<HomInvolutionCert>(
        homogeneous_involution_map(ElementaryGrading::fine(n), random_kind(rng, n))));
  }
}

TEST(Property, CommutatorExpansion) {
  Rng rng(8);
  for (int c = 0; c < kCases; ++c) {
    const int t = uniform(rng, 2, 8);
    std::vector<int> idx(static_cast<std::size_t>(t));
    std::iota(idx.begin(), idx.end(), 1);
    std::shuffle(idx.begin(), idx.end(), rng);
    auto p = expand_commutator(idx, uniform(rng, 0, 1) == 1);
    EXPECT_EQ(p.size(), std::size_t{1} << (t - 1));
    Rational sum = 0;
    for (const auto& [m, coef] : p.terms()) {
      EXPECT_EQ(abs(coef), 1);
      EXPECT_TRUE(m.covers(t));
      sum += coef;
    }
    EXPECT_EQ(sum, 0);
  }
}

TEST(Property, StarOfPolynomialIsInvolutiveAndAntiMultiplicative) {
  Rng rng(9);
  for (int c = 0; c < kCases; ++c) {
    auto p = random_polynomial(rng, 4, 5);
    auto q = random_polynomial(rng, 3, 3);
    EXPECT_EQ(star_of_polynomial(star_of_polynomial(p)), p);
    // rename q's variables to 5.. so the product stays multilinear
    SparsePolynomial shifted;
    for (const auto& [m, coef] : q.terms()) {
      auto f = m.factors();
      for (auto& x : f) x.var += 4;
      shifted.add(StarMonomial(f), coef);
    }
    EXPECT_EQ(star_of_polynomial(p * shifted), star_of_polynomial(shifted) * star_of_polynomial(p));
  }
}

TEST(Property, StarOfPolynomialMatchesMatrixInvolution) {
  Rng rng(10);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 1, 4);
    const auto kind = random_kind(rng, n);
    auto p = random_polynomial(rng, 4, 4);
    EvaluationTuple t;
    for (int k = 0; k < 4; ++k) t.push_back(random_ut(rng, n, 2));
    EXPECT_EQ(evaluate_polynomial(star_of_polynomial(p), t, kind, n), apply_star(evaluate_polynomial(p, t, kind, n), kind));
  }
}

TEST(Property, GradedStarOfPolynomialRoundTrip) {
  Rng rng(11);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 2, 5);
    auto fine = ElementaryGrading::fine(n);
    auto cert = std::get<HomInvolutionCert>(homogeneous_involution_map(fine, InvolutionKind::Orthogonal));
    std::vector<GroupElement> deg;
    for (int k = 0; k < 3; ++k)
      deg.push_back(fine.support()[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(fine.support().size()) - 1))]);
    SparsePolynomial p;
    const auto base = random_polynomial(rng, 3, 4);
    for (const auto& [m, coef] : base.terms()) p.add(StarMonomial(m.factors(), deg), coef);
    auto s = star_of_polynomial(p, &cert.psi);
    EXPECT_EQ(star_of_polynomial(s, &cert.psi), p);
    for (const auto& [m, coef] : s.terms())
      for (const auto& f : m.factors()) {
        auto d = occurrence_degree(m, f, cert.psi);
        EXPECT_TRUE(cert.psi.find(d).has_value() || !fine.in_support(d));
      }
  }
}

TEST(Property, RankBackendsAgree) {
  Rng rng(12);
  for (int c = 0; c < kCases; ++c) {
    const int rows = uniform(rng, 0, 9);
    const int cols = uniform(rng, 1, 9);
    const int true_rank = uniform(rng, 0, std::min(rows, cols));
    // product of random rows x r and r x cols factors, plus sparsity
    std::vector<std::vector<long long>> left(static_cast<std::size_t>(rows), std::vector<long long>(static_cast<std::size_t>(true_rank)));
    std::vector<std::vector<long long>> right(static_cast<std::size_t>(true_rank), std::vector<long long>(static_cast<std::size_t>(cols)));
    for (auto& r : left)
      for (auto& x : r) x = uniform(rng, -1, 1) * uniform(rng, 0, 50);
    for (auto& r : right)
      for (auto& x : r) x = uniform(rng, 0, 2) ? 0 : uniform(rng, -9, 9);
    std::vector<std::vector<std::int64_t>> dense(static_cast<std::size_t>(rows), std::vector<std::int64_t>(static_cast<std::size_t>(cols), 0));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        for (int k = 0; k < true_rank; ++k) dense[i][j] += left[i][k] * right[k][j];
    std::vector<std::vector<long long>> as_ll;
    for (const auto& r : dense) as_ll.emplace_back(r.begin(), r.end());
    auto m = IntMatrix::from_dense(dense);
    m.set_cols(static_cast<std::size_t>(cols));
    const auto expected = rows == 0 ? 0 : oracle::rank_rational(as_ll);
    EXPECT_EQ(rank_fraction_free(m).value, expected);
    EXPECT_EQ(rank_mod_p(m, 2147483647ULL), expected);
    RankPolicy modular;
    modular.method = RankMethod::Modular;
    EXPECT_EQ(rank_certified(m, modular).value, expected);
    EXPECT_EQ(rank_fraction_free(m.transpose()).value, expected);
  }
}

TEST(Property, FreeGroupAxioms) {
  Rng rng(13);
  auto f = GroupSpec::free(3);
  auto word = [&] {
    std::vector<int> l;
    for (int k = uniform(rng, 0, 5); k > 0; --k) l.push_back(uniform(rng, 1, 3) * (uniform(rng, 0, 1) ? 1 : -1));
    return GroupElement::free_word(l);
  };
  for (int c = 0; c < kCases; ++c) {
    auto a = word(), b = word(), d = word();
    EXPECT_EQ(f.mul(f.mul(a, b), d), f.mul(a, f.mul(b, d)));
    EXPECT_EQ(f.mul(a, f.inverse(a)), f.identity());
    EXPECT_EQ(f.parse(f.format(a)), a);
    EXPECT_EQ(f.inverse(f.mul(a, b)), f.mul(f.inverse(b), f.inverse(a)));
  }
}

TEST(Property, RelabelingInvariance) {
  Rng rng(14);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform(rng, 1, 3);
    const int m = uniform(rng, 1, 3);
    std::optional<InvolutionKind> kind;
    if (uniform(rng, 0, 1)) kind = random_kind(rng, n);
    std::vector<SparsePolynomial> rows;
    for (int r = uniform(rng, 1, 5); r > 0; --r) {
      SparsePolynomial p;
      const auto base = random_polynomial(rng, m, 3);
      for (const auto& [mono, coef] : base.terms()) {
        if (!mono.covers(m)) continue;
        if (!kind) {
          auto f = mono.factors();
          for (auto& x : f) x.star = false;
          p.add(StarMonomial(f), coef);
        } else {
          p.add(mono, coef);
        }
      }
      if (!p.is_zero()) rows.push_back(p);
    }
    if (rows.empty()) continue;
    std::vector<int> sigma(static_cast<std::size_t>(m));
    std::iota(sigma.begin(), sigma.end(), 1);
    std::shuffle(sigma.begin(), sigma.end(), rng);
    std::vector<SparsePolynomial> renamed;
    for (const auto& p : rows) {
      SparsePolynomial q;
      for (const auto& [mono, coef] : p.terms()) {
        auto f = mono.factors();
        for (auto& x : f) x.var = sigma[static_cast<std::size_t>(x.var - 1)];
        q.add(StarMonomial(f), coef);
      }
      renamed.push_back(q);
    }
    auto a = evaluation_matrix(rows, n, nullptr, kind);
    auto b = evaluation_matrix(renamed, n, nullptr, kind);
    EXPECT_EQ(rank_fraction_free(a.matrix).value, rank_fraction_free(b.matrix).value);
  }
}

TEST(Property, StarExtensionMonotonicity) {
  for (int n = 1; n <= 4; ++n)
    for (int m = 1; m <= (n <= 2 ? 5 : 3); ++m) {
      auto plain = codim_value(n, m);
      EXPECT_GE(codim_value(n, m, InvolutionKind::Orthogonal), plain);
      if (n % 2 == 0) EXPECT_GE(codim_value(n, m, InvolutionKind::Symplectic), plain);
    }
}
