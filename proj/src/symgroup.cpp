#include "cmrm/symgroup.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include "cmrm/error.hpp"

namespace cmrm {

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  const int k = degree();
  std::vector<char> seen(images_.size(), 0);
  for (int v : images_) {
    if (v < 0 || v >= k || seen[static_cast<std::size_t>(v)])
      throw DomainError("permutation images must be a bijection of 0..k-1");
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

Permutation Permutation::identity(int k) {
  std::vector<int> im(static_cast<std::size_t>(k));
  std::iota(im.begin(), im.end(), 0);
  return Permutation(std::move(im));
}

Permutation Permutation::from_cycles(int k, const std::vector<std::vector<int>>& cycles) {
  std::vector<int> im(static_cast<std::size_t>(k));
  std::iota(im.begin(), im.end(), 0);
  std::vector<char> used(static_cast<std::size_t>(k), 0);
  for (const auto& c : cycles) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      int x = c[i];
      if (x < 0 || x >= k || used[static_cast<std::size_t>(x)])
        throw DomainError("cycles must be disjoint and within 0..k-1");
      used[static_cast<std::size_t>(x)] = 1;
      im[static_cast<std::size_t>(x)] = c[(i + 1) % c.size()];
    }
  }
  return Permutation(std::move(im));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) inv[static_cast<std::size_t>(images_[i])] = static_cast<int>(i);
  return Permutation(std::move(inv));
}

std::vector<std::vector<int>> Permutation::cycles() const {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(images_.size(), 0);
  for (int start = 0; start < degree(); ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    std::vector<int> c;
    for (int x = start; !seen[static_cast<std::size_t>(x)]; x = (*this)(x)) {
      seen[static_cast<std::size_t>(x)] = 1;
      c.push_back(x);
    }
    out.push_back(std::move(c));
  }
  return out;
}

int Permutation::cycle_count() const {
  int count = 0;
  std::vector<char> seen(images_.size(), 0);
  for (int start = 0; start < degree(); ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    ++count;
    for (int x = start; !seen[static_cast<std::size_t>(x)]; x = (*this)(x)) seen[static_cast<std::size_t>(x)] = 1;
  }
  return count;
}

std::vector<int> Permutation::cycle_type() const {
  std::vector<int> t;
  for (const auto& c : cycles()) t.push_back(static_cast<int>(c.size()));
  std::sort(t.begin(), t.end(), std::greater<>());
  return t;
}

bool Permutation::is_identity() const {
  for (int i = 0; i < degree(); ++i)
    if ((*this)(i) != i) return false;
  return true;
}

std::string Permutation::to_string() const {
  std::ostringstream os;
  for (const auto& c : cycles()) {
    os << '(';
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? " " : "") << c[i] + 1;
    os << ')';
  }
  return os.str();
}

Permutation operator*(const Permutation& s, const Permutation& t) {
  if (s.degree() != t.degree()) throw DimensionError("composing permutations of different degree");
  std::vector<int> im(static_cast<std::size_t>(s.degree()));
  for (int i = 0; i < s.degree(); ++i) im[static_cast<std::size_t>(i)] = s(t(i));
  return Permutation(std::move(im));
}

int length(const Permutation& s) { return s.degree() - s.cycle_count(); }

BigInt binomial(long p, long r) {
  if (r == -1) return p == -1 ? 1 : 0;
  if (r < 0 || p < 0 || r > p) return 0;
  r = std::min(r, p - r);
  BigInt acc = 1;
  for (long i = 1; i <= r; ++i) {
    acc *= p - r + i;
    acc /= i;
  }
  return acc;
}

BigInt catalan(int p) {
  if (p < 0) throw DomainError("catalan index must be nonnegative");
  return binomial(2L * p, p) / (p + 1);
}

BigInt moebius(const Permutation& s) {
  BigInt acc = 1;
  for (const auto& c : s.cycles()) {
    int len = static_cast<int>(c.size()) - 1;
    BigInt cat = catalan(len);
    acc *= (len % 2 == 0) ? cat : BigInt(-cat);
  }
  return acc;
}

std::vector<Permutation> enumerate_permutations(int k, int max_degree) {
  if (k < 1) throw DomainError("degree must be at least 1");
  if (k > max_degree)
    throw CapacityError("degree " + std::to_string(k) + " exceeds the configured limit K_max=" +
                        std::to_string(max_degree));
  std::vector<int> im(static_cast<std::size_t>(k));
  std::iota(im.begin(), im.end(), 0);
  std::vector<Permutation> out;
  do {
    out.emplace_back(im);
  } while (std::next_permutation(im.begin(), im.end()));
  return out;
}

std::size_t lex_rank(const Permutation& s) {
  const int k = s.degree();
  std::size_t rank = 0;
  std::vector<char> used(static_cast<std::size_t>(k), 0);
  std::size_t fact = 1;
  for (int i = 2; i < k; ++i) fact *= static_cast<std::size_t>(i);
  for (int i = 0; i < k; ++i) {
    int smaller = 0;
    for (int v = 0; v < s(i); ++v)
      if (!used[static_cast<std::size_t>(v)]) ++smaller;
    used[static_cast<std::size_t>(s(i))] = 1;
    rank += static_cast<std::size_t>(smaller) * fact;
    if (k - 1 - i > 0) fact /= static_cast<std::size_t>(k - 1 - i);
  }
  return rank;
}

namespace {

void nc121_rec(int pos, int n, Nc121Partition& cur, std::vector<Nc121Partition>& out) {
  if (pos > n) {
    out.push_back(cur);
    return;
  }
  cur.blocks.push_back({pos});
  nc121_rec(pos + 1, n, cur, out);
  cur.blocks.pop_back();

  // A pair {pos, j}; everything strictly inside is a depth-1 singleton.
  for (int j = pos + 1; j <= n; ++j) {
    const std::size_t mark = cur.blocks.size();
    cur.blocks.push_back({pos, j});
    for (int x = pos + 1; x < j; ++x) cur.blocks.push_back({x});
    cur.pair_count += 1;
    cur.inner_singleton_count += j - pos - 1;
    nc121_rec(j + 1, n, cur, out);
    cur.pair_count -= 1;
    cur.inner_singleton_count -= j - pos - 1;
    cur.blocks.resize(mark);
  }
}

}  // namespace

std::vector<Nc121Partition> enumerate_nc121(int n, int max_n) {
  if (n < 1) throw DomainError("n must be at least 1");
  if (n > max_n)
    throw CapacityError("n=" + std::to_string(n) + " exceeds the configured limit N_max=" + std::to_string(max_n));
  std::vector<Nc121Partition> out;
  Nc121Partition cur;
  nc121_rec(1, n, cur, out);
  for (auto& p : out)
    std::sort(p.blocks.begin(), p.blocks.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

BigInt nc121_count_formula(int n, int m, int l) {
  return binomial(l + m - 1, m - 1) * binomial(n - m - l, m);
}

BigInt lem1_lhs(int n, int m) {
  if (n < 0 || m < 0 || m > n / 2)
    throw DomainError("lem1_lhs requires 0 <= m <= floor(n/2), got n=" + std::to_string(n) +
                      ", m=" + std::to_string(m));
  BigInt acc = 0;
  for (int l = 0; l <= n - 2 * m; ++l) {
    BigInt term = binomial(l + m - 1, m - 1) * binomial(n - l - m, m);
    if (l % 2) acc -= term; else acc += term;
  }
  return acc;
}

}  // namespace cmrm
