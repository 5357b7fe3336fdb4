#include "cmrm/ncms.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "cmrm/error.hpp"
#include "cmrm/symgroup.hpp"

namespace cmrm {

namespace {

void require_family(const Word& w, Family f, const std::string& name) {
  for (const auto& l : w)
    if (l.family != f) throw DomainError("functional '" + name + "' received a letter of the other family");
}

double catalan_d(int m) { return catalan(m).convert_to<double>(); }

}  // namespace

MomentFunctional matrix_functional(Family f, std::vector<Eigen::MatrixXcd> mats, std::string name) {
  if (mats.empty()) throw DimensionError("matrix functional needs at least one matrix");
  const auto n = mats.front().rows();
  for (const auto& m : mats)
    if (m.rows() != n || m.cols() != n) throw DimensionError("matrix functional needs square matrices of one size");
  auto shared = std::make_shared<const std::vector<Eigen::MatrixXcd>>(std::move(mats));
  MomentFunctional out;
  out.family = f;
  out.name = name;
  out.eval = [shared, f, name, n](const Word& w) -> Complex {
    require_family(w, f, name);
    const double norm = f == Family::B ? 1.0 / static_cast<double>(n) : 1.0;
    if (w.empty()) return static_cast<double>(n) * norm;
    auto get = [&](const Letter& l) -> Eigen::MatrixXcd {
      if (l.index < 0 || static_cast<std::size_t>(l.index) >= shared->size())
        throw DomainError("letter index outside the matrix model");
      const auto& m = (*shared)[static_cast<std::size_t>(l.index)];
      return l.starred ? Eigen::MatrixXcd(m.adjoint()) : m;
    };
    if (w.size() == 1) return get(w[0]).trace() * norm;
    Eigen::MatrixXcd prod = get(w[0]);
    for (std::size_t i = 1; i + 1 < w.size(); ++i) prod = prod * get(w[i]);
    return prod.cwiseProduct(get(w.back()).transpose()).sum() * norm;
  };
  return out;
}

MomentFunctional power_functional(Family f, std::function<Complex(int)> moments, std::string name) {
  MomentFunctional out;
  out.family = f;
  out.name = name;
  out.eval = [f, moments = std::move(moments), name](const Word& w) -> Complex {
    require_family(w, f, name);
    for (const auto& l : w)
      if (l.index != 0) throw DomainError("functional '" + name + "' has a single generator");
    return moments(static_cast<int>(w.size()));
  };
  return out;
}

MomentFunctional dyadic_omega() {
  return power_functional(
      Family::A,
      [](int m) -> Complex {
        if (m == 0) throw DomainError("dyadic weight is infinite on the unit");
        return 1.0 / (std::ldexp(1.0, m) - 1.0);
      },
      "dyadic");
}

MomentFunctional marchenko_pastur_tau(double mean) {
  return power_functional(
      Family::B, [mean](int m) -> Complex { return std::pow(mean, m) * catalan_d(m); }, "marchenko_pastur");
}

MomentFunctional semicircle_tau(double variance) {
  return power_functional(
      Family::B,
      [variance](int m) -> Complex { return m % 2 ? 0.0 : std::pow(variance, m / 2) * catalan_d(m / 2); },
      "semicircle");
}

MomentFunctional haar_unitary_tau() {
  MomentFunctional out;
  out.family = Family::B;
  out.name = "haar_unitary";
  out.eval = [](const Word& w) -> Complex {
    require_family(w, Family::B, "haar_unitary");
    int balance = 0;
    for (const auto& l : w) balance += l.starred ? -1 : 1;
    return balance == 0 ? 1.0 : 0.0;
  };
  return out;
}

namespace {

struct Run {
  int group;
  Word letters;
};

std::vector<Run> group_runs(const Word& w) {
  std::vector<Run> runs;
  for (const auto& l : w) {
    if (runs.empty() || runs.back().group != l.group) runs.push_back({l.group, {}});
    runs.back().letters.push_back(l);
  }
  return runs;
}

// tau of an alternating product r_1 ... r_m of elements from free subalgebras, from
// tau((r_1 - c_1) ... (r_m - c_m)) = 0 with c_j = tau(r_j).
Complex free_eval(const Word& w, const std::vector<MomentFunctional>& groups,
                  std::map<Word, Complex>& memo) {
  if (w.empty()) return 1.0;
  if (auto it = memo.find(w); it != memo.end()) return it->second;
  auto runs = group_runs(w);
  Complex result;
  if (runs.size() == 1) {
    const int g = runs[0].group;
    if (g < 0 || static_cast<std::size_t>(g) >= groups.size()) throw DomainError("B letter group outside the free product");
    result = groups[static_cast<std::size_t>(g)](runs[0].letters);
  } else {
    const std::size_t m = runs.size();
    std::vector<Complex> c(m);
    for (std::size_t j = 0; j < m; ++j) c[j] = free_eval(runs[j].letters, groups, memo);
    result = 0.0;
    const std::size_t full = (std::size_t{1} << m) - 1;
    for (std::size_t mask = 0; mask < full; ++mask) {
      Complex coef = 1.0;
      Word sub;
      int dropped = 0;
      for (std::size_t j = 0; j < m; ++j) {
        if (mask >> j & 1U) {
          sub.insert(sub.end(), runs[j].letters.begin(), runs[j].letters.end());
        } else {
          coef *= c[j];
          ++dropped;
        }
      }
      if (coef == Complex(0)) continue;
      Complex t = coef * free_eval(sub, groups, memo);
      // sign (-1)^{dropped + 1}
      result += dropped % 2 ? t : -t;
    }
  }
  memo.emplace(w, result);
  return result;
}

}  // namespace

MomentFunctional free_product(std::vector<MomentFunctional> groups) {
  for (const auto& g : groups)
    if (g.family != Family::B) throw DomainError("free product is formed over B functionals");
  auto shared = std::make_shared<const std::vector<MomentFunctional>>(std::move(groups));
  MomentFunctional out;
  out.family = Family::B;
  out.name = "free_product";
  out.eval = [shared](const Word& w) -> Complex {
    require_family(w, Family::B, "free_product");
    std::map<Word, Complex> memo;
    return free_eval(w, *shared, memo);
  };
  return out;
}

MomentFunctional memoized(MomentFunctional f) {
  struct Cache {
    std::mutex mu;
    std::map<Word, Complex> values;
  };
  auto cache = std::make_shared<Cache>();
  auto inner = std::make_shared<const MomentFunctional>(f);
  f.eval = [cache, inner](const Word& w) -> Complex {
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      if (auto it = cache->values.find(w); it != cache->values.end()) return it->second;
    }
    Complex v = (*inner)(w);
    std::lock_guard<std::mutex> lock(cache->mu);
    cache->values.emplace(w, v);
    return v;
  };
  return f;
}

Complex cyclic_monotone_moment(const Word& w, const MomentFunctional& omega, const MomentFunctional& tau) {
  std::size_t first = w.size(), last = 0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i].family == Family::A) {
      if (first == w.size()) first = i;
      last = i;
    }
  if (first == w.size()) throw DomainError("cyclic monotone product is only defined on words containing an A-letter");

  Word a_part;
  Complex tau_prod = 1.0;
  Word b_run;
  for (std::size_t i = first; i <= last; ++i) {
    if (w[i].family == Family::A) {
      if (!b_run.empty()) {
        tau_prod *= tau(b_run);
        b_run.clear();
      }
      a_part.push_back(w[i]);
    } else {
      b_run.push_back(w[i]);
    }
  }
  if (tau_prod == Complex(0)) return 0.0;
  Word boundary(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(first));
  boundary.insert(boundary.end(), w.begin() + static_cast<std::ptrdiff_t>(last) + 1, w.end());
  if (!boundary.empty()) tau_prod *= tau(boundary);
  if (tau_prod == Complex(0)) return 0.0;
  return omega(a_part) * tau_prod;
}

Complex cyclic_monotone_moment(const Polynomial& p, const MomentFunctional& omega, const MomentFunctional& tau) {
  Complex acc = 0.0;
  for (const auto& [c, w] : p.terms)
    if (c != Complex(0)) acc += c * cyclic_monotone_moment(w, omega, tau);
  return acc;
}

GramReport gram_psd_check(const MomentFunctional& omega, const MomentFunctional& tau, const std::vector<Word>& basis,
                          double tol) {
  for (const auto& w : basis)
    if (!contains_family(w, Family::A)) throw DomainError("Gram basis word without an A-letter: " + to_string(w));
  const auto N = static_cast<Eigen::Index>(basis.size());
  GramReport r;
  r.gram.resize(N, N);
  for (Eigen::Index x = 0; x < N; ++x) {
    Word xs = adjoint(basis[static_cast<std::size_t>(x)]);
    for (Eigen::Index y = 0; y < N; ++y) {
      Word xy = xs;
      const auto& wy = basis[static_cast<std::size_t>(y)];
      xy.insert(xy.end(), wy.begin(), wy.end());
      r.gram(x, y) = cyclic_monotone_moment(xy, omega, tau);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r.gram, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = N ? es.eigenvalues().minCoeff() : 0.0;
  r.pass = r.min_eigenvalue >= -tol;
  return r;
}

TracialityReport traciality_check(const MomentFunctional& omega, const MomentFunctional& tau,
                                  const std::vector<std::pair<Word, Word>>& pairs, double tol) {
  TracialityReport r;
  for (const auto& [x, y] : pairs) {
    Word xy = x, yx = y;
    xy.insert(xy.end(), y.begin(), y.end());
    yx.insert(yx.end(), x.begin(), x.end());
    double dev = std::abs(cyclic_monotone_moment(xy, omega, tau) - cyclic_monotone_moment(yx, omega, tau));
    r.max_deviation = std::max(r.max_deviation, dev);
  }
  r.pass = r.max_deviation <= tol;
  return r;
}

std::vector<Word> words_with_a(const std::vector<Letter>& alphabet, int max_len) {
  std::vector<Word> out;
  std::vector<Word> layer{Word{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const auto& w : layer)
      for (const auto& l : alphabet) {
        Word v = w;
        v.push_back(l);
        next.push_back(v);
      }
    for (const auto& w : next)
      if (contains_family(w, Family::A)) out.push_back(w);
    layer = std::move(next);
  }
  return out;
}

}  // namespace cmrm
