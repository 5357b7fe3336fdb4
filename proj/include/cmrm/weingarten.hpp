#pragma once

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/multiprecision/cpp_int.hpp>

#include "cmrm/symgroup.hpp"

namespace cmrm {

using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

/// G(s,t) = n^{#cycles(s^{-1} t)}, rows and columns in lexicographic order of S_k.
std::vector<std::vector<BigInt>> gram_matrix(int k, long n, int max_degree = kDefaultMaxDegree);

/// Exact Wg(., n) on S_k, one value per conjugacy class.
class WeingartenTable {
 public:
  WeingartenTable(int k, long n, int max_degree = kDefaultMaxDegree);

  /// Shared, lazily built table; safe to call from several threads.
  static std::shared_ptr<const WeingartenTable> cached(int k, long n);

  int k() const { return k_; }
  long n() const { return n_; }
  const Rational& operator()(const Permutation& s) const;
  const Rational& by_cycle_type(const std::vector<int>& type) const;
  const std::map<std::vector<int>, Rational>& values() const { return values_; }

  /// Rows "cycle_type,numerator,denominator" with cycle types written like "2 1".
  std::string to_csv() const;

 private:
  int k_;
  long n_;
  std::map<std::vector<int>, Rational> values_;
};

Rational weingarten_exact(const Permutation& s, long n);

/// Leading term n^{-k-|s|} Moeb(s).
double weingarten_asymptotic(const Permutation& s, long n);

using MatrixList = std::vector<Eigen::MatrixXcd>;

/// prod over cycles (c0 c1 ...) of Tr(M_{c0} M_{c1} ...).
Complex tr_sigma(const MatrixList& mats, const Permutation& s);

struct TraceWordSpec {
  Permutation sigma;
  MatrixList a_list;
  MatrixList b_list;
};

/// E[Tr_sigma(A_1 U B_1 U*, ..., A_k U B_k U*)] over Haar U, exact up to floating traces.
Complex expected_trace_product(const TraceWordSpec& spec, int max_degree = kDefaultMaxDegree);

}  // namespace cmrm
