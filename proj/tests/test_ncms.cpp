#include <doctest.h>

#include <random>

#include "cmrm/error.hpp"
#include "cmrm/ncms.hpp"
#include "cmrm/rmt.hpp"
#include "cmrm/symgroup.hpp"

using namespace cmrm;

namespace {

Eigen::MatrixXcd random_hermitian(long n, RngStream& rng) {
  Eigen::MatrixXcd z = sample_ginibre(n, 1.0, rng);
  return (z + z.adjoint()) * 0.5;
}

Complex rel(Complex a, Complex b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace

TEST_CASE("word parsing and printing") {
  auto w = parse_word("a b2* a2 b@1");
  REQUIRE(w.size() == 4);
  CHECK(w[0] == Letter{Family::A, 0, false, 0});
  CHECK(w[1] == Letter{Family::B, 1, true, 0});
  CHECK(w[2] == Letter{Family::A, 1, false, 0});
  CHECK(w[3] == Letter{Family::B, 0, false, 1});
  CHECK(parse_word(to_string(w)) == w);
  CHECK(parse_word("aba") == parse_word("a b a"));
  CHECK_THROWS_AS(parse_word("a c"), ConfigError);
  CHECK_THROWS_AS(parse_word("a0"), ConfigError);
  auto adj = adjoint(parse_word("a b*"));
  CHECK(adj == parse_word("b a*"));
  CHECK(contains_family(w, Family::A));
  CHECK_FALSE(contains_family(parse_word("b b"), Family::A));
}

TEST_CASE("polynomial algebra") {
  auto a = Polynomial::letter(parse_word("a")[0]);
  auto b = Polynomial::letter(parse_word("b")[0]);
  auto p = (a * b + b * a).simplified();
  CHECK(p.terms.size() == 2);
  auto sq = pow(p, 2).simplified();
  CHECK(sq.terms.size() == 4);
  auto z = (p - p).simplified();
  CHECK(z.terms.empty());
  auto c = (a * b * Complex(0, 1)).adjoint();
  REQUIRE(c.terms.size() == 1);
  CHECK(c.terms[0].first == Complex(0, -1));
  CHECK(c.terms[0].second == parse_word("b* a*"));
}

TEST_CASE("closed-form functionals") {
  auto om = dyadic_omega();
  CHECK(om(parse_word("a")).real() == doctest::Approx(1.0));
  CHECK(om(parse_word("a a a")).real() == doctest::Approx(1.0 / 7.0));
  auto mp = marchenko_pastur_tau();
  CHECK(mp(Word{}).real() == 1.0);
  CHECK(mp(parse_word("b b b")).real() == doctest::Approx(5.0));
  auto sc = semicircle_tau(2.0);
  CHECK(sc(parse_word("b b b b")).real() == doctest::Approx(8.0));
  CHECK(sc(parse_word("b b b")).real() == 0.0);
  auto hu = haar_unitary_tau();
  CHECK(hu(parse_word("b b*")).real() == 1.0);
  CHECK(hu(parse_word("b b")).real() == 0.0);
}

TEST_CASE("free product of independent laws") {
  auto sc0 = semicircle_tau(), sc1 = semicircle_tau();
  auto fp = free_product({sc0, sc1});
  CHECK(std::abs(fp(parse_word("b b@1 b b@1"))) < 1e-14);
  CHECK(fp(parse_word("b b b@1 b@1")).real() == doctest::Approx(1.0));
  auto mp = free_product({marchenko_pastur_tau(), marchenko_pastur_tau()});
  // tau(xyxy) = tau(x^2)tau(y)^2 + tau(x)^2 tau(y^2) - tau(x)^2 tau(y)^2
  CHECK(mp(parse_word("b b@1 b b@1")).real() == doctest::Approx(3.0));
  auto hu = free_product({haar_unitary_tau(), haar_unitary_tau()});
  CHECK(std::abs(hu(parse_word("b b@1 b* b@1*"))) < 1e-14);
  CHECK(hu(parse_word("b b@1 b@1* b*")).real() == doctest::Approx(1.0));
}

TEST_CASE("free product matches large random matrices") {
  RngStream rng(4, 0);
  const long n = 400;
  Eigen::MatrixXcd x = sample_wishart(n, rng);
  Eigen::MatrixXcd u = sample_haar_unitary(n, rng);
  Eigen::MatrixXcd y = u * sample_wishart(n, rng) * u.adjoint();
  auto fp = free_product({marchenko_pastur_tau(), marchenko_pastur_tau()});
  Complex want = fp(parse_word("b b@1 b b b@1"));
  Complex got = (x * y * x * x * y).trace() / static_cast<double>(n);
  CHECK(std::abs(got - want) < 0.15 * std::abs(want));
}

TEST_CASE("cyclic monotone factorization examples") {
  RngStream rng(5, 0);
  auto om = matrix_functional(Family::A, {random_hermitian(4, rng), random_hermitian(4, rng)});
  auto tau = matrix_functional(Family::B, {random_hermitian(5, rng), random_hermitian(5, rng), random_hermitian(5, rng)});
  auto W = [](const char* s) { return parse_word(s); };
  auto v = [&](const char* s) { return cyclic_monotone_moment(W(s), om, tau); };

  CHECK(rel(v("a b a2 b2"), om(W("a a2")) * tau(W("b")) * tau(W("b2"))).real() < 1e-12);
  CHECK(rel(v("b a b2"), om(W("a")) * tau(W("b b2"))).real() < 1e-12);
  CHECK(rel(v("b3 a a2 b b2 a b3"), om(W("a a2 a")) * tau(W("b b2")) * tau(W("b3 b3"))).real() < 1e-12);
  CHECK(rel(v("a a2"), om(W("a a2"))).real() < 1e-12);
  CHECK_THROWS_AS(v("b b2"), DomainError);
}

TEST_CASE("non-faithfulness when tau(b) = 0") {
  auto om = dyadic_omega();
  auto tau = semicircle_tau();
  auto c = parse_word("a b a");
  Word c2 = c;
  c2.insert(c2.end(), c.begin(), c.end());
  CHECK(cyclic_monotone_moment(c2, om, tau) == Complex(0.0));
  CHECK(cyclic_monotone_moment(c, om, tau) == Complex(0.0));
  auto rep = gram_psd_check(om, tau, {parse_word("a"), parse_word("a b a")});
  CHECK(rep.pass);
  CHECK(std::abs(rep.gram(1, 1)) == 0.0);
}

TEST_CASE("infinitesimal freeness special case") {
  auto om = matrix_functional(Family::A, {Eigen::MatrixXcd::Identity(2, 2) * 0.5, Eigen::MatrixXcd::Random(2, 2)});
  RngStream rng(9, 0);
  auto tau = matrix_functional(Family::B, {random_hermitian(3, rng), random_hermitian(3, rng)});
  auto W = [](const char* s) { return parse_word(s); };
  CHECK(rel(cyclic_monotone_moment(W("a b a2"), om, tau), om(W("a a2")) * tau(W("b"))).real() < 1e-13);
  CHECK(rel(cyclic_monotone_moment(W("a b a2 b2"), om, tau), om(W("a a2")) * tau(W("b")) * tau(W("b2"))).real() <
        1e-13);
}

TEST_CASE("linearity, traciality and adjoint symmetry") {
  RngStream rng(6, 0);
  auto om = matrix_functional(Family::A, {random_hermitian(3, rng), sample_ginibre(3, 1.0, rng)});
  auto tau = matrix_functional(Family::B, {random_hermitian(4, rng), sample_ginibre(4, 1.0, rng)});
  std::vector<Letter> alphabet;
  for (auto f : {Family::A, Family::B})
    for (int i = 0; i < 2; ++i)
      for (bool s : {false, true}) alphabet.push_back(Letter{f, i, s, 0});

  std::mt19937_64 g(7);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  auto random_word = [&](int len) {
    Word w;
    while (static_cast<int>(w.size()) < len) w.push_back(alphabet[pick(g)]);
    w[0] = alphabet[pick(g) % 4];
    std::shuffle(w.begin(), w.end(), g);
    return w;
  };
  std::vector<std::pair<Word, Word>> pairs;
  for (int t = 0; t < 200; ++t) {
    Word w = random_word(1 + static_cast<int>(g() % 8));
    const auto cut = static_cast<std::ptrdiff_t>(g() % (w.size() + 1));
    pairs.emplace_back(Word(w.begin(), w.begin() + cut), Word(w.begin() + cut, w.end()));

    Complex val = cyclic_monotone_moment(w, om, tau);
    CHECK(std::abs(cyclic_monotone_moment(adjoint(w), om, tau) - std::conj(val)) <= 1e-10 * (1 + std::abs(val)));

    Word w2 = random_word(1 + static_cast<int>(g() % 6));
    Complex c1(0.3, -1.2), c2(-2.0, 0.5);
    auto p = Polynomial::word(w, c1) + Polynomial::word(w2, c2);
    Complex lin = c1 * val + c2 * cyclic_monotone_moment(w2, om, tau);
    CHECK(std::abs(cyclic_monotone_moment(p, om, tau) - lin) <= 1e-10 * (1 + std::abs(lin)));
  }
  auto tr = traciality_check(om, tau, pairs);
  CHECK(tr.pass);
  CHECK(tr.max_deviation <= 1e-10);
}

TEST_CASE("gram positivity over short words") {
  RngStream rng(8, 0);
  std::vector<Letter> alphabet{{Family::A, 0, false, 0}, {Family::A, 0, true, 0}, {Family::B, 0, false, 0},
                               {Family::B, 0, true, 0}};
  auto basis = words_with_a(alphabet, 3);
  for (const auto& w : basis) CHECK(contains_family(w, Family::A));
  CHECK(basis.size() == 4 * 4 * 4 - 2 * 2 * 2 + 4 * 4 - 2 * 2 + 2);
  auto om = matrix_functional(Family::A, {sample_ginibre(4, 1.0, rng)});
  auto tau = matrix_functional(Family::B, {sample_ginibre(5, 1.0, rng)});
  auto rep = gram_psd_check(om, tau, basis);
  CHECK(rep.pass);
  CHECK(rep.min_eigenvalue >= -1e-10);
  CHECK((rep.gram - rep.gram.adjoint()).norm() < 1e-9 * rep.gram.norm());

  auto rep2 = gram_psd_check(dyadic_omega(), marchenko_pastur_tau(), {parse_word("a b"), parse_word("b a")});
  CHECK(rep2.pass);
  CHECK_THROWS_AS(gram_psd_check(dyadic_omega(), marchenko_pastur_tau(), {parse_word("b")}), DomainError);
}

TEST_CASE("memoized functional returns the same values") {
  auto mp = marchenko_pastur_tau();
  auto m = memoized(mp);
  for (const char* s : {"b", "b b", "b b b b", "b b"}) CHECK(m(parse_word(s)) == mp(parse_word(s)));
}
