#include <doctest.h>

#include <functional>

#include "cmrm/error.hpp"
#include "cmrm/rmt.hpp"
#include "cmrm/weingarten.hpp"

using namespace cmrm;

namespace {

// Plain Gauss-Jordan on the full k! x k! Gram matrix.
std::vector<std::vector<Rational>> full_inverse(const std::vector<std::vector<BigInt>>& g) {
  const std::size_t m = g.size();
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(2 * m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) a[i][j] = Rational(g[i][j]);
    a[i][m + i] = 1;
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t p = c;
    while (a[p][c] == 0) ++p;
    std::swap(a[p], a[c]);
    Rational inv = 1 / a[c][c];
    for (auto& x : a[c]) x *= inv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c || a[r][c] == 0) continue;
      Rational f = a[r][c];
      for (std::size_t j = 0; j < 2 * m; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<std::vector<Rational>> out(m, std::vector<Rational>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i][j] = a[i][m + j];
  return out;
}

Eigen::MatrixXcd random_matrix(long n, RngStream& rng) {
  Eigen::MatrixXcd m(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) m(i, j) = {rng.normal(1.0), rng.normal(1.0)};
  return m;
}

// Entry-level Weingarten sum: expand every M_a = A_a U B_a U* into indices and
// contract E[U..U conj(U)..conj(U)] pair by pair.
Complex index_oracle(const TraceWordSpec& spec) {
  const int k = spec.sigma.degree();
  const long n = spec.a_list[0].rows();
  auto perms = enumerate_permutations(k);
  Complex total = 0.0;
  std::vector<long> r(static_cast<std::size_t>(k)), z(static_cast<std::size_t>(k));
  std::function<void(int, const std::function<void()>&, std::vector<long>&)> loop =
      [&](int d, const std::function<void()>& body, std::vector<long>& idx) {
        if (d == k) {
          body();
          return;
        }
        for (long v = 0; v < n; ++v) {
          idx[static_cast<std::size_t>(d)] = v;
          loop(d + 1, body, idx);
        }
      };
  for (const auto& alpha : perms)
    for (const auto& beta : perms) {
      const double wg = weingarten_exact(alpha * beta.inverse(), n).convert_to<double>();
      // x_a = r_{sigma(alpha(a))}: M_a's column index is r_{sigma(a)}, and the first U
      // of factor a pairs with the conj(U) of factor alpha(a).
      Complex a_part = 0.0;
      loop(0, [&] {
        Complex p = 1.0;
        for (int a = 0; a < k; ++a)
          p *= spec.a_list[static_cast<std::size_t>(a)](r[static_cast<std::size_t>(a)],
                                                        r[static_cast<std::size_t>(spec.sigma(alpha(a)))]);
        a_part += p;
      }, r);
      Complex b_part = 0.0;
      loop(0, [&] {
        Complex p = 1.0;
        for (int a = 0; a < k; ++a)
          p *= spec.b_list[static_cast<std::size_t>(a)](z[static_cast<std::size_t>(beta(a))],
                                                        z[static_cast<std::size_t>(a)]);
        b_part += p;
      }, z);
      total += wg * a_part * b_part;
    }
  return total;
}

}  // namespace

TEST_CASE("gram matrix entries") {
  auto g = gram_matrix(2, 5);
  REQUIRE(g.size() == 2);
  CHECK(g[0][0] == 25);
  CHECK(g[0][1] == 5);
  CHECK(g[1][0] == 5);
  CHECK(g[1][1] == 25);
  CHECK_THROWS_AS(gram_matrix(7, 10), CapacityError);
}

TEST_CASE("k=1,2,3 closed forms") {
  for (long n = 3; n <= 12; ++n) {
    Rational N(n);
    CHECK(weingarten_exact(Permutation::identity(1), n) == 1 / N);
    CHECK(weingarten_exact(Permutation::identity(2), n) == 1 / (N * N - 1));
    CHECK(weingarten_exact(Permutation::from_cycles(2, {{0, 1}}), n) == -1 / (N * (N * N - 1)));
    const Rational den = N * (N * N - 1) * (N * N - 4);
    CHECK(weingarten_exact(Permutation::identity(3), n) == (N * N - 2) / den);
    CHECK(weingarten_exact(Permutation::from_cycles(3, {{0, 1}}), n) == -N / den);
    CHECK(weingarten_exact(Permutation::from_cycles(3, {{0, 1, 2}}), n) == 2 / den);
  }
  CHECK(weingarten_exact(Permutation::identity(2), 2) == Rational(1, 3));
}

TEST_CASE("class-reduced solve equals the full Gram inverse") {
  for (int k = 1; k <= 4; ++k)
    for (long n = k; n <= k + 3; ++n) {
      auto perms = enumerate_permutations(k);
      auto inv = full_inverse(gram_matrix(k, n));
      WeingartenTable t(k, n);
      for (std::size_t i = 0; i < perms.size(); ++i)
        for (std::size_t j = 0; j < perms.size(); ++j)
          CHECK(inv[i][j] == t(perms[i].inverse() * perms[j]));
    }
}

TEST_CASE("biorthogonality and symmetry") {
  for (int k = 1; k <= 4; ++k)
    for (long n = k; n <= 10; ++n) {
      auto perms = enumerate_permutations(k);
      auto g = gram_matrix(k, n);
      WeingartenTable t(k, n);
      for (std::size_t i = 0; i < perms.size(); ++i) {
        Rational s = 0;
        for (std::size_t j = 0; j < perms.size(); ++j) s += Rational(g[i][j]) * t(perms[j]);
        CHECK(s == (perms[i].is_identity() ? 1 : 0));
        CHECK(t(perms[i]) == t(perms[i].inverse()));
        for (const auto& h : perms) CHECK(t(h * perms[i] * h.inverse()) == t(perms[i]));
      }
    }
}

TEST_CASE("n < k is rejected") {
  CHECK_THROWS_AS(WeingartenTable(3, 2), DomainError);
  CHECK_THROWS_AS(WeingartenTable(4, 1), DomainError);
}

TEST_CASE("cached tables and csv") {
  auto a = WeingartenTable::cached(3, 4);
  auto b = WeingartenTable::cached(3, 4);
  CHECK(a.get() == b.get());
  CHECK(a->to_csv() == "cycle_type,numerator,denominator\n3,1,360\n2 1,-1,180\n1 1 1,7,360\n");
  CHECK(a->by_cycle_type({2, 1}) == Rational(-1, 180));
}

TEST_CASE("asymptotic error shrinks with n") {
  for (int k = 1; k <= 3; ++k)
    for (const auto& s : enumerate_permutations(k)) {
      auto err = [&](long n) {
        double scaled = weingarten_exact(s, n).convert_to<double>() * std::pow(double(n), k + length(s));
        return std::abs(scaled - static_cast<double>(moebius(s)));
      };
      CHECK(err(16) * 3.0 <= err(8) + 1e-15);
      CHECK(err(32) * 3.0 <= err(16) + 1e-15);
      CHECK(weingarten_asymptotic(s, 32) ==
            doctest::Approx(moebius(s).convert_to<double>() * std::pow(32.0, -(k + length(s)))).epsilon(1e-14));
    }
}

TEST_CASE("tr_sigma follows cycles") {
  RngStream rng(3, 0);
  MatrixList m{random_matrix(3, rng), random_matrix(3, rng), random_matrix(3, rng)};
  auto s = Permutation::from_cycles(3, {{0, 2}});
  Complex want = (m[0] * m[2]).trace() * m[1].trace();
  CHECK(std::abs(tr_sigma(m, s) - want) < 1e-10);
  auto c = Permutation::from_cycles(3, {{0, 1, 2}});
  CHECK(std::abs(tr_sigma(m, c) - (m[0] * m[1] * m[2]).trace()) < 1e-10);
}

TEST_CASE("expected_trace_product k=1") {
  RngStream rng(5, 0);
  TraceWordSpec spec{Permutation::identity(1), {random_matrix(4, rng)}, {random_matrix(4, rng)}};
  Complex want = spec.a_list[0].trace() * spec.b_list[0].trace() / 4.0;
  CHECK(std::abs(expected_trace_product(spec) - want) < 1e-10);
}

TEST_CASE("expected_trace_product against the entry-level sum") {
  RngStream rng(9, 0);
  for (int k = 1; k <= 3; ++k)
    for (long n : {long(k), 3L}) {
      if (n < k) continue;
      for (const auto& s : enumerate_permutations(k)) {
        TraceWordSpec spec{s, {}, {}};
        for (int i = 0; i < k; ++i) {
          spec.a_list.push_back(random_matrix(n, rng));
          spec.b_list.push_back(random_matrix(n, rng));
        }
        Complex got = expected_trace_product(spec);
        Complex want = index_oracle(spec);
        CHECK(std::abs(got - want) <= 1e-9 * (1.0 + std::abs(want)));
      }
    }
}

TEST_CASE("expected_trace_product against Monte Carlo") {
  RngStream rng(21, 0);
  const long n = 3;
  TraceWordSpec spec{Permutation::from_cycles(2, {{0, 1}}), {}, {}};
  for (int i = 0; i < 2; ++i) {
    Eigen::MatrixXcd a = random_matrix(n, rng), b = random_matrix(n, rng);
    spec.a_list.push_back(a + a.adjoint());
    spec.b_list.push_back(b + b.adjoint());
  }
  const Complex exact = expected_trace_product(spec);
  const int samples = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < samples; ++t) {
    auto u = sample_haar_unitary(n, rng);
    Eigen::MatrixXcd m = spec.a_list[0] * u * spec.b_list[0] * u.adjoint() * spec.a_list[1] * u *
                         spec.b_list[1] * u.adjoint();
    double x = m.trace().real();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / samples;
  const double se = std::sqrt((sum2 / samples - mean * mean) / (samples - 1));
  CHECK(std::abs(exact.imag()) < 1e-9);
  CHECK(std::abs(mean - exact.real()) < 5.0 * se);
}
