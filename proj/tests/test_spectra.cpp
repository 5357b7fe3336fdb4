#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cmrm/error.hpp"
#include "cmrm/spectra.hpp"

using namespace cmrm;

namespace {

Spectrum random_spectrum(std::mt19937_64& g, int size) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(static_cast<std::size_t>(size));
  for (auto& x : v) x = u(g);
  return properly_arrange(v);
}

}  // namespace

TEST_CASE("properly_arrange") {
  auto s = properly_arrange({0.5, -1, 0.25});
  CHECK(s.pos == std::vector<double>{0.5, 0.25});
  CHECK(s.neg == std::vector<double>{-1});
  CHECK(properly_arrange({}).empty());
  CHECK(properly_arrange({0.0, 1e-12, -1e-13}).empty());
  CHECK_THROWS_AS(properly_arrange({1.0, std::nan("")}), DomainError);
  CHECK(s.arranged() == std::vector<double>{-1, 0.5, 0.25});
  CHECK(properly_arrange({1, -1}).arranged() == std::vector<double>{1, -1});
}

TEST_CASE("properly_arrange is idempotent and order invariant") {
  std::mt19937_64 g(1);
  for (int t = 0; t < 50; ++t) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> v(20);
    for (auto& x : v) x = u(g);
    auto s = properly_arrange(v);
    s.validate();
    CHECK(properly_arrange(s.arranged()) == s);
    std::shuffle(v.begin(), v.end(), g);
    CHECK(properly_arrange(v) == s);
  }
}

TEST_CASE("validate rejects broken invariants") {
  Spectrum s;
  s.pos = {1, 2};
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.pos = {1};
  s.neg = {0.5};
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("disjoint union") {
  auto s = properly_arrange({3, 2, 1, 1});
  auto t = properly_arrange({2, 1, 1});
  CHECK(disjoint_union(s, t).pos == std::vector<double>{3, 2, 2, 1, 1, 1, 1});
  CHECK(disjoint_union(s, Spectrum{}) == s);
  auto u = disjoint_union(properly_arrange({1, -1}), properly_arrange({1}));
  CHECK(u.pos == std::vector<double>{1, 1});
  CHECK(u.neg == std::vector<double>{-1});
}

TEST_CASE("scale") {
  auto s = properly_arrange({1, -2});
  CHECK(scale(s, 1.0) == s);
  auto f = scale(s, -1.0);
  CHECK(f.pos == std::vector<double>{2});
  CHECK(f.neg == std::vector<double>{-1});
  CHECK(scale(s, 0.0).empty());
  auto h = scale(properly_arrange({4, 2, -1}), -0.5);
  h.validate();
  CHECK(h.pos == std::vector<double>{0.5});
  CHECK(h.neg == std::vector<double>{-2, -1});
}

TEST_CASE("metric_d values") {
  auto one = properly_arrange({1});
  CHECK(metric_d(one, one) == 0.0);
  CHECK(metric_d(one, Spectrum{}) == doctest::Approx(0.25));
  CHECK(metric_d(properly_arrange({-1}), Spectrum{}) == doctest::Approx(0.25));
  // s_k = {-1, 1 - 1/k, 1/2, 1/3, ...} approaches s = {1, -1, 1/2, 1/3, ...}
  auto tail = [](std::vector<double> v) {
    for (int i = 2; i <= 60; ++i) v.push_back(1.0 / i);
    return properly_arrange(v);
  };
  auto s = tail({1.0, -1.0});
  double prev = 1.0;
  for (int k : {2, 4, 16, 256, 65536}) {
    double d = metric_d(tail({-1.0, 1.0 - 1.0 / k}), s);
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("metric_d properties") {
  std::mt19937_64 g(2);
  for (int t = 0; t < 100; ++t) {
    auto a = random_spectrum(g, 10), b = random_spectrum(g, 7), c = random_spectrum(g, 12);
    CHECK(metric_d(a, b) == doctest::Approx(metric_d(b, a)));
    CHECK(metric_d(a, c) <= metric_d(a, b) + metric_d(b, c) + 1e-15);
    CHECK(metric_d(a, b) >= 0.0);
    CHECK(metric_d(a, b) <= 2.0);
  }
}

TEST_CASE("moments and norms") {
  auto pm = properly_arrange({1, -1});
  CHECK(moment(pm, 2) == 2.0);
  CHECK(moment(pm, 3) == 0.0);
  std::vector<double> dy;
  for (int i = 1; i <= 20; ++i) dy.push_back(std::ldexp(1.0, -i));
  CHECK(moment(properly_arrange(dy), 1) == doctest::Approx(1.0 - std::ldexp(1.0, -20)).epsilon(1e-15));
  CHECK(schatten_norm(properly_arrange({3, -4}), 2) == doctest::Approx(5.0));

  std::mt19937_64 g(3);
  for (int t = 0; t < 20; ++t) {
    auto a = random_spectrum(g, 8), b = random_spectrum(g, 5);
    for (int p = 1; p <= 6; ++p) {
      CHECK(moment(disjoint_union(a, b), p) == doctest::Approx(moment(a, p) + moment(b, p)));
      CHECK(moment(scale(a, -1.5), p) == doctest::Approx(std::pow(-1.5, p) * moment(a, p)));
    }
  }
}

TEST_CASE("json and csv") {
  auto s = properly_arrange({0.5, -1, 0.25, 1.0 / 3.0});
  CHECK(spectrum_from_json(to_json(s)) == s);
  CHECK(spectrum_from_json(nlohmann::json::parse(to_json(s).dump())) == s);
  auto csv = to_csv(properly_arrange({0.5, -1}));
  CHECK(csv.rfind("rank,value,sign_part\n", 0) == 0);
  CHECK(csv.find("1,0.5,pos") != std::string::npos);
  CHECK(csv.find("1,-1,neg") != std::string::npos);
}
