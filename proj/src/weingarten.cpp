#include "cmrm/weingarten.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

#include "cmrm/error.hpp"

namespace cmrm {

namespace {

BigInt ipow(long n, int e) {
  BigInt r = 1;
  for (int i = 0; i < e; ++i) r *= n;
  return r;
}

std::string type_string(const std::vector<int>& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? " " : "") + std::to_string(t[i]);
  return s;
}

void check_dims(const MatrixList& mats, long& n) {
  for (const auto& m : mats) {
    if (m.rows() != m.cols()) throw DimensionError("trace arguments must be square");
    if (n < 0) n = m.rows();
    if (m.rows() != n) throw DimensionError("trace arguments must share one dimension");
  }
}

}  // namespace

std::vector<std::vector<BigInt>> gram_matrix(int k, long n, int max_degree) {
  if (n < 1) throw DomainError("dimension n must be positive");
  auto perms = enumerate_permutations(k, max_degree);
  const std::size_t N = perms.size();
  std::vector<std::vector<BigInt>> g(N, std::vector<BigInt>(N));
  for (std::size_t i = 0; i < N; ++i) {
    auto inv = perms[i].inverse();
    for (std::size_t j = 0; j < N; ++j) g[i][j] = ipow(n, (inv * perms[j]).cycle_count());
  }
  return g;
}

// Class-reduced system: for a representative s of each class C,
//   sum_D Wg_D * sum_{t in D} n^{#(s^{-1} t)} = [C = id].
WeingartenTable::WeingartenTable(int k, long n, int max_degree) : k_(k), n_(n) {
  auto perms = enumerate_permutations(k, max_degree);
  if (n < k)
    throw DomainError("Gram matrix is singular for n < k (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");

  std::map<std::vector<int>, std::size_t> class_index;
  std::vector<Permutation> reps;
  std::vector<std::size_t> class_of(perms.size());
  for (std::size_t i = 0; i < perms.size(); ++i) {
    auto t = perms[i].cycle_type();
    auto [it, fresh] = class_index.emplace(t, reps.size());
    if (fresh) reps.push_back(perms[i]);
    class_of[i] = it->second;
  }
  const std::size_t p = reps.size();
  std::vector<std::vector<Rational>> a(p, std::vector<Rational>(p + 1, Rational(0)));
  for (std::size_t c = 0; c < p; ++c) {
    auto inv = reps[c].inverse();
    for (std::size_t j = 0; j < perms.size(); ++j) a[c][class_of[j]] += Rational(ipow(n, (inv * perms[j]).cycle_count()));
    a[c][p] = reps[c].is_identity() ? 1 : 0;
  }

  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    while (piv < p && a[piv][col] == 0) ++piv;
    if (piv == p) throw DomainError("singular Weingarten system");
    std::swap(a[col], a[piv]);
    Rational d = a[col][col];
    for (std::size_t j = col; j <= p; ++j) a[col][j] /= d;
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col];
      for (std::size_t j = col; j <= p; ++j) a[r][j] -= f * a[col][j];
    }
  }
  for (const auto& [type, idx] : class_index) values_.emplace(type, a[idx][p]);
}

std::shared_ptr<const WeingartenTable> WeingartenTable::cached(int k, long n) {
  static std::mutex mu;
  static std::map<std::pair<int, long>, std::shared_ptr<const WeingartenTable>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({k, n});
    if (it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const WeingartenTable>(k, n);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(std::make_pair(k, n), table).first->second;
}

const Rational& WeingartenTable::operator()(const Permutation& s) const {
  if (s.degree() != k_) throw DimensionError("permutation degree does not match the table");
  return by_cycle_type(s.cycle_type());
}

const Rational& WeingartenTable::by_cycle_type(const std::vector<int>& type) const {
  auto it = values_.find(type);
  if (it == values_.end()) throw DomainError("unknown cycle type " + type_string(type));
  return it->second;
}

std::string WeingartenTable::to_csv() const {
  std::ostringstream os;
  os << "cycle_type,numerator,denominator\n";
  // Largest cycle type first reads naturally: identity last.
  for (auto it = values_.rbegin(); it != values_.rend(); ++it)
    os << type_string(it->first) << ',' << numerator(it->second) << ',' << denominator(it->second) << '\n';
  return os.str();
}

Rational weingarten_exact(const Permutation& s, long n) { return (*WeingartenTable::cached(s.degree(), n))(s); }

double weingarten_asymptotic(const Permutation& s, long n) {
  if (n < 1) throw DomainError("dimension n must be positive");
  double m = moebius(s).convert_to<double>();
  return m * std::pow(static_cast<double>(n), -(s.degree() + length(s)));
}

Complex tr_sigma(const MatrixList& mats, const Permutation& s) {
  if (static_cast<int>(mats.size()) != s.degree()) throw DimensionError("need one matrix per point of sigma");
  long n = -1;
  check_dims(mats, n);
  Complex acc = 1.0;
  for (const auto& c : s.cycles()) {
    Eigen::MatrixXcd prod = mats[static_cast<std::size_t>(c[0])];
    for (std::size_t i = 1; i + 1 < c.size(); ++i) prod = prod * mats[static_cast<std::size_t>(c[i])];
    if (c.size() == 1) {
      acc *= prod.trace();
    } else {
      // Tr(P M) without forming the last product.
      const auto& last = mats[static_cast<std::size_t>(c.back())];
      acc *= prod.cwiseProduct(last.transpose()).sum();
    }
  }
  return acc;
}

Complex expected_trace_product(const TraceWordSpec& spec, int max_degree) {
  const int k = spec.sigma.degree();
  if (static_cast<int>(spec.a_list.size()) != k || static_cast<int>(spec.b_list.size()) != k)
    throw DimensionError("a_list and b_list must have k entries");
  long n = -1;
  check_dims(spec.a_list, n);
  check_dims(spec.b_list, n);
  auto perms = enumerate_permutations(k, max_degree);
  auto table = WeingartenTable::cached(k, n);

  std::vector<Complex> tr_a(perms.size()), tr_b(perms.size());
  std::vector<Permutation> inverses;
  inverses.reserve(perms.size());
  for (std::size_t i = 0; i < perms.size(); ++i) {
    tr_a[i] = tr_sigma(spec.a_list, perms[i]);
    tr_b[i] = tr_sigma(spec.b_list, perms[i]);
    inverses.push_back(perms[i].inverse());
  }

  // Group by the class of s3 = s2^{-1} s1^{-1} sigma, then weight once per class.
  std::map<std::vector<int>, Complex> by_class;
  for (std::size_t i = 0; i < perms.size(); ++i) {
    if (tr_a[i] == Complex(0)) continue;
    Permutation left = inverses[i] * spec.sigma;
    for (std::size_t j = 0; j < perms.size(); ++j) {
      Permutation s3 = inverses[j] * left;
      by_class[s3.cycle_type()] += tr_a[i] * tr_b[j];
    }
  }
  Complex total = 0.0;
  for (const auto& [type, sum] : by_class) total += sum * table->by_cycle_type(type).convert_to<double>();
  return total;
}

}  // namespace cmrm
