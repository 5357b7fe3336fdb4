#include <map>

#include "cmrm/lab.hpp"
#include "cmrm/symgroup.hpp"
#include "cmrm/weingarten.hpp"

namespace cmrm::lab {

SelftestReport run_selftest() {
  SelftestReport rep;
  auto record = [&](bool ok, const std::string& what) {
    rep.pass = rep.pass && ok;
    rep.lines.push_back(std::string(ok ? "PASS " : "FAIL ") + what);
  };

  bool lem1_ok = true;
  for (int n = 0; n <= 40; ++n)
    for (int m = 0; m <= n / 2; ++m)
      if (lem1_lhs(n, m) != binomial(n / 2, m)) lem1_ok = false;
  record(lem1_ok, "lem1_lhs(n,m) = binom(floor(n/2),m) for n <= 40");

  bool nc_ok = true;
  for (int n = 1; n <= 12; ++n) {
    std::map<int, long> by_m;
    std::map<std::pair<int, int>, long> by_ml;
    for (const auto& p : enumerate_nc121(n)) {
      by_m[p.pair_count]++;
      by_ml[{p.pair_count, p.inner_singleton_count}]++;
    }
    for (int m = 0; 2 * m <= n; ++m) {
      if (BigInt(by_m[m]) != binomial(n, 2 * m)) nc_ok = false;
      for (int l = 0; l <= n; ++l) {
        auto it = by_ml.find({m, l});
        BigInt got = it == by_ml.end() ? 0 : it->second;
        if (got != nc121_count_formula(n, m, l)) nc_ok = false;
      }
    }
  }
  record(nc_ok, "NC_{1,2;1}(n) counts match binom(n,2m) and the (m,l) product formula for n <= 12");

  bool bio_ok = true;
  for (int k = 1; k <= 4; ++k) {
    auto perms = enumerate_permutations(k);
    for (long n = k; n <= 10; ++n) {
      auto g = gram_matrix(k, n);
      WeingartenTable wg(k, n);
      for (std::size_t s = 0; s < perms.size(); ++s) {
        Rational acc = 0;
        for (std::size_t t = 0; t < perms.size(); ++t) acc += Rational(g[s][t]) * wg(perms[t]);
        if (acc != (perms[s].is_identity() ? 1 : 0)) bio_ok = false;
      }
    }
  }
  record(bio_ok, "Weingarten biorthogonality for k <= 4, n = k..10");
  return rep;
}

}  // namespace cmrm::lab
