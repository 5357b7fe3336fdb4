#include <doctest.h>

#include <sstream>

#include <Eigen/Eigenvalues>

#include "cmrm/error.hpp"
#include "cmrm/rmt.hpp"
#include "cmrm/weingarten.hpp"

using namespace cmrm;

namespace {

std::vector<double> reference_eigenvalues(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  double x = a.normal(), y = b.normal();
  CHECK(x == y);
  CHECK(c.normal() != x);
  CHECK(d.normal() != x);
  CHECK(RngStream::mix({1, 2, 3}) == RngStream::mix({1, 2, 3}));
  CHECK(RngStream::mix({1, 2, 3}) != RngStream::mix({3, 2, 1}));
  auto m1 = sample_ginibre(5, 1.0, a), m2 = sample_ginibre(5, 1.0, b);
  CHECK(m1 == m2);
}

TEST_CASE("ginibre entry statistics") {
  RngStream rng(1, 0);
  const long n = 200;
  auto z = sample_ginibre(n, 2.0, rng);
  const double cnt = double(n) * n;
  CHECK(std::abs(z.mean()) < 4.0 * std::sqrt(2.0 / cnt));
  CHECK(z.cwiseAbs2().mean() == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("haar unitary") {
  RngStream rng(2, 0);
  auto u = sample_haar_unitary(50, rng);
  CHECK((u * u.adjoint() - Eigen::MatrixXcd::Identity(50, 50)).norm() < 1e-12);
  // E|U_11|^2 = 1/n and E[U_11] = 0 for n = 4
  double s = 0.0;
  std::complex<double> m = 0.0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    auto v = sample_haar_unitary(4, rng);
    s += std::norm(v(0, 0));
    m += v(0, 0);
  }
  CHECK(s / trials == doctest::Approx(0.25).epsilon(0.02));
  CHECK(std::abs(m / double(trials)) < 0.02);
}

TEST_CASE("gue and wishart normalizations") {
  RngStream rng(3, 0);
  const long n = 500;
  auto g = sample_gue(n, rng);
  CHECK((g - g.adjoint()).norm() == 0.0);
  CHECK((g * g).trace().real() / n == doctest::Approx(1.0).epsilon(0.03));
  CHECK(std::abs(g.trace().real() / n) < 0.02);
  auto x = sample_wishart(n, rng);
  CHECK(x.trace().real() / n == doctest::Approx(1.0).epsilon(0.05));
  CHECK((x * x).trace().real() / n == doctest::Approx(2.0).epsilon(0.05));
  RngStream r2(4, 0);
  auto top = hermitian_eigenvalues_raw(sample_wishart(1000, r2)).back();
  CHECK(top == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("dyadic diagonal and sample dispatch") {
  auto d = dyadic_diag(3);
  CHECK(d(0, 0) == 0.5);
  CHECK(d(1, 1) == 0.25);
  CHECK(d(2, 2) == 0.125);
  CHECK(d(0, 1) == 0.0);
  RngStream rng(5, 0);
  EnsembleSpec spec;
  spec.kind = EnsembleKind::fixed;
  spec.n = 2;
  spec.payload = Eigen::MatrixXcd::Identity(3, 3);
  CHECK_THROWS_AS(sample(spec, rng), DimensionError);
  spec.kind = EnsembleKind::identity;
  CHECK(sample(spec, rng) == Eigen::MatrixXcd::Identity(2, 2));
  for (auto k : {EnsembleKind::ginibre, EnsembleKind::haar_unitary, EnsembleKind::gue, EnsembleKind::wishart,
                 EnsembleKind::dyadic_diag, EnsembleKind::fixed, EnsembleKind::identity})
    CHECK(ensemble_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(ensemble_kind_from_string("nope"));
}

TEST_CASE("eigensolver examples") {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = -1;
  auto s = hermitian_eigenvalues(d);
  CHECK(s.pos == std::vector<double>{3});
  CHECK(s.neg == std::vector<double>{-1});
  RngStream rng(6, 0);
  auto u = sample_haar_unitary(3, rng);
  auto r = hermitian_eigenvalues_raw(u * d * u.adjoint());
  CHECK(max_diff(r, {-1, 0, 3}) < 1e-8);
  Eigen::MatrixXcd x(2, 2);
  x << 0, 1, 1, 0;
  CHECK(max_diff(hermitian_eigenvalues_raw(x), {-1, 1}) < 1e-15);
  Eigen::MatrixXcd one(1, 1);
  one << 2.5;
  CHECK(hermitian_eigenvalues_raw(one) == std::vector<double>{2.5});
  CHECK(hermitian_eigenvalues_raw(Eigen::MatrixXcd(0, 0)).empty());
  Eigen::MatrixXcd bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(hermitian_eigenvalues(bad), DomainError);
  CHECK_THROWS_AS(hermitian_eigenvalues_raw(Eigen::MatrixXcd::Zero(2, 3)), DimensionError);
}

TEST_CASE("eigensolver against a reference solver") {
  RngStream rng(7, 0);
  for (long n : {2L, 3L, 5L, 17L, 64L, 200L}) {
    auto g = sample_gue(n, rng);
    CHECK(max_diff(hermitian_eigenvalues_raw(g), reference_eigenvalues(g)) < 1e-12 * n);
    // degenerate and graded spectra
    Eigen::VectorXd diag(n);
    for (long i = 0; i < n; ++i) diag(i) = (i % 3 == 0) ? 1.0 : std::ldexp(1.0, -static_cast<int>(i));
    auto u = sample_haar_unitary(n, rng);
    Eigen::MatrixXcd m = u * diag.cast<std::complex<double>>().asDiagonal() * u.adjoint();
    m = ((m + m.adjoint()) * 0.5).eval();
    CHECK(max_diff(hermitian_eigenvalues_raw(m), reference_eigenvalues(m)) < 1e-12 * n);
  }
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(6, 6);
  CHECK(hermitian_eigenvalues_raw(z) == std::vector<double>(6, 0.0));
}

TEST_CASE("eigensolver on a large graded anticommutator") {
  RngStream rng(8, 0);
  const long n = 300;
  auto u = sample_haar_unitary(n, rng);
  Eigen::MatrixXcd a = u * dyadic_diag(n) * u.adjoint();
  a = ((a + a.adjoint()) * 0.5).eval();
  auto x = sample_wishart(n, rng);
  Eigen::MatrixXcd m = a * x + x * a;
  CHECK(max_diff(hermitian_eigenvalues_raw(m), reference_eigenvalues(m)) < 1e-11);
}

TEST_CASE("matrix words") {
  RngStream rng(9, 0);
  Assignment as;
  auto a = sample_ginibre(3, 1.0, rng), b = sample_ginibre(3, 1.0, rng);
  as[GeneratorKey::of(parse_word("a")[0])] = Eigen::MatrixXcd::Identity(3, 3);
  as[GeneratorKey::of(parse_word("b")[0])] = b;
  as[GeneratorKey::of(parse_word("a2")[0])] = a;
  CHECK(evaluate_matrix_word(parse_word("a"), as) == Eigen::MatrixXcd::Identity(3, 3));
  CHECK((evaluate_matrix_word(parse_word("a b*"), as) - b.adjoint()).norm() < 1e-15);
  CHECK((evaluate_matrix_word(parse_word("a2 b a2*"), as) - a * b * a.adjoint()).norm() < 1e-12);
  auto p = Polynomial::word(parse_word("a2 b"), {0, 1}) - Polynomial::word(parse_word("b a2"), {0, 1});
  CHECK((evaluate_matrix_polynomial(p, as) - std::complex<double>(0, 1) * (a * b - b * a)).norm() < 1e-12);
  CHECK_THROWS_AS(evaluate_matrix_word(parse_word("b@1"), as), DomainError);
}

TEST_CASE("matrix serialization round trips") {
  RngStream rng(10, 0);
  auto m = sample_ginibre(7, 1.0, rng);
  std::stringstream ss;
  write_matrix_binary(ss, m);
  CHECK(ss.str().size() == 16 + 7 * 7 * 16);
  CHECK(read_matrix_binary(ss) == m);
  std::stringstream bad("NOTAMATRIX000000");
  CHECK_THROWS(read_matrix_binary(bad));
  CHECK(matrix_from_json(nlohmann::json::parse(matrix_to_json(m).dump())) == m);
}

TEST_CASE("weingarten oracle invariances") {
  RngStream rng(11, 0);
  const long n = 4;
  for (const auto& s : enumerate_permutations(3)) {
    TraceWordSpec spec{s, {}, {}};
    for (int i = 0; i < 3; ++i) {
      spec.a_list.push_back(sample_ginibre(n, 1.0, rng));
      spec.b_list.push_back(sample_ginibre(n, 1.0, rng));
    }
    Complex base = expected_trace_product(spec);
    auto v = sample_haar_unitary(n, rng);
    TraceWordSpec rotated = spec;
    for (auto& b : rotated.b_list) b = v * b * v.adjoint();
    CHECK(std::abs(expected_trace_product(rotated) - base) < 1e-10 * (1 + std::abs(base)));

    TraceWordSpec unit = spec;
    for (auto& b : unit.b_list) b = Eigen::MatrixXcd::Identity(n, n);
    Complex direct = tr_sigma(unit.a_list, s);
    CHECK(std::abs(expected_trace_product(unit) - direct) < 1e-10 * (1 + std::abs(direct)));
  }
  TraceWordSpec ones{Permutation::from_cycles(2, {{0, 1}}),
                     {Eigen::MatrixXcd::Identity(5, 5), Eigen::MatrixXcd::Identity(5, 5)},
                     {Eigen::MatrixXcd::Identity(5, 5), Eigen::MatrixXcd::Identity(5, 5)}};
  CHECK(std::abs(expected_trace_product(ones) - 5.0) < 1e-12);
  TraceWordSpec mismatch = ones;
  mismatch.b_list[1] = Eigen::MatrixXcd::Identity(4, 4);
  CHECK_THROWS_AS(expected_trace_product(mismatch), DimensionError);
  TraceWordSpec small = ones;
  for (auto& m : small.a_list) m = Eigen::MatrixXcd::Identity(1, 1);
  for (auto& m : small.b_list) m = Eigen::MatrixXcd::Identity(1, 1);
  CHECK_THROWS_AS(expected_trace_product(small), DomainError);
}
