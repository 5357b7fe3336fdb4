#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cmrm {

using BigInt = boost::multiprecision::cpp_int;

// Capacity limits. Weingarten sums cost (k!)^2, NC enumeration is exponential.
inline constexpr int kDefaultMaxDegree = 6;
inline constexpr int kDefaultMaxNcSize = 14;

/// Element of S_k in one-line notation, 0-based: images[i] = sigma(i).
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> images);

  static Permutation identity(int k);
  /// Build from cycles given with 0-based indices; unlisted points are fixed.
  static Permutation from_cycles(int k, const std::vector<std::vector<int>>& cycles);

  int degree() const { return static_cast<int>(images_.size()); }
  int operator()(int i) const { return images_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& images() const { return images_; }

  Permutation inverse() const;
  /// Cycles in canonical form: each starts at its smallest element, sorted by that element.
  std::vector<std::vector<int>> cycles() const;
  int cycle_count() const;
  /// Cycle lengths sorted nonincreasing (the conjugacy class label).
  std::vector<int> cycle_type() const;
  bool is_identity() const;

  /// Cycle notation with 1-based indices, fixed points included, e.g. "(1 3)(2)".
  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> images_;
};

/// Composition (s * t)(x) = s(t(x)).
Permutation operator*(const Permutation& s, const Permutation& t);

/// Minimal number of transpositions: k - #cycles.
int length(const Permutation& s);

BigInt catalan(int p);
/// Binomial coefficient with binom(p, -1) = [p == -1] and 0 outside 0 <= r <= p otherwise.
BigInt binomial(long p, long r);

/// Product over cycles c of (-1)^{|c|-1} Cat_{|c|-1}.
BigInt moebius(const Permutation& s);

/// All of S_k in lexicographic order of one-line notation.
std::vector<Permutation> enumerate_permutations(int k, int max_degree = kDefaultMaxDegree);

/// Position of a permutation in the lexicographic order (Lehmer rank).
std::size_t lex_rank(const Permutation& s);

struct Nc121Partition {
  std::vector<std::vector<int>> blocks;  // 1-based points, blocks sorted by first element
  int pair_count = 0;
  int inner_singleton_count = 0;
};

/// Noncrossing partitions of {1..n} into singletons and pairs, pairs at depth 0,
/// singletons at depth at most 1.
std::vector<Nc121Partition> enumerate_nc121(int n, int max_n = kDefaultMaxNcSize);

/// Number of NC_{1,2;1}(n) partitions with m pairs and l inner singletons, closed form.
BigInt nc121_count_formula(int n, int m, int l);

/// sum_{l=0}^{n-2m} binom(l+m-1, m-1) binom(n-l-m, m) (-1)^l
BigInt lem1_lhs(int n, int m);

}  // namespace cmrm
