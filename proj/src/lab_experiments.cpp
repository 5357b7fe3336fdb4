#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "cmrm/error.hpp"
#include "cmrm/lab.hpp"
#include "cmrm/predict.hpp"
#include "cmrm/weingarten.hpp"

namespace cmrm::lab {

namespace {

using Mat = Eigen::MatrixXcd;
using Clock = std::chrono::steady_clock;

constexpr long kLimitTruncation = 64;
constexpr int kMetricStore = kDefaultMetricTerms;

// Runs body(t) for t in [0, count) on a small pool; results are written by index so the
// caller's aggregation order does not depend on scheduling.
template <class F>
void parallel_for(int count, int threads, F body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int t = 0; t < count; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int t = next++; t < count; t = next++) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct MeanSe {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
};

MeanSe summarize(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  // Deviations from the first sample keep identical samples exactly degenerate.
  const double x0 = xs.front();
  double s = 0.0;
  for (double x : xs) s += x - x0;
  const double dbar = s / static_cast<double>(xs.size());
  r.mean = x0 + dbar;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - x0 - dbar) * (x - x0 - dbar);
    r.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    r.se = r.sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return r;
}

nlohmann::json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

// ---------------------------------------------------------------------------------------
// Sampling

class Sampler {
 public:
  Sampler(const ExperimentConfig& c, long n) : c_(c), n_(n) {
    fixed_.resize(c.generators.size());
    hermitian_.assign(c.generators.size(), false);
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      const auto& spec = c.generators[g];
      if (!is_random(spec.kind) || !spec.resample) fixed_[g] = draw(g, 0);
      switch (spec.kind) {
        case EnsembleKind::gue:
        case EnsembleKind::wishart:
        case EnsembleKind::dyadic_diag:
        case EnsembleKind::identity: hermitian_[g] = true; break;
        case EnsembleKind::fixed:
          hermitian_[g] = (fixed_[g] - fixed_[g].adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + fixed_[g].cwiseAbs().maxCoeff());
          break;
        default: break;
      }
    }
  }

  std::vector<Mat> effective(int trial) const {
    const auto count = c_.generators.size();
    std::vector<Mat> raw(count);
    for (std::size_t g = 0; g < count; ++g)
      raw[g] = fixed_[g].size() ? fixed_[g] : draw(g, static_cast<std::uint64_t>(trial) + 1);
    std::vector<Mat> eff(count);
    for (std::size_t g = 0; g < count; ++g) {
      const auto& spec = c_.generators[g];
      if (spec.rotate.empty() || spec.kind == EnsembleKind::identity) {
        eff[g] = raw[g];
        continue;
      }
      const Mat& u = raw[static_cast<std::size_t>(c_.generator_index(spec.rotate))];
      Mat t = u * raw[g];
      eff[g] = t * u.adjoint();
      if (hermitian_[g]) eff[g] = ((eff[g] + eff[g].adjoint()) * 0.5).eval();
    }
    return eff;
  }

 private:
  Mat draw(std::size_t g, std::uint64_t trial_tag) const {
    const auto& spec = c_.generators[g];
    EnsembleSpec es;
    es.kind = spec.kind;
    es.n = n_;
    es.entry_variance = spec.entry_variance;
    es.payload = spec.payload;
    RngStream rng(c_.seed, RngStream::mix({static_cast<std::uint64_t>(n_), g, trial_tag}));
    return sample(es, rng);
  }

  const ExperimentConfig& c_;
  long n_;
  std::vector<Mat> fixed_;
  std::vector<bool> hermitian_;
};

Mat factor_matrix(const std::vector<Mat>& eff, std::pair<int, bool> f) {
  const Mat& m = eff[static_cast<std::size_t>(f.first)];
  return f.second ? Mat(m.adjoint()) : m;
}

Mat evaluate(const ModelPolynomial& p, const std::vector<Mat>& eff) {
  Mat acc;
  for (const auto& mono : p) {
    Mat prod = factor_matrix(eff, mono.factors[0]);
    for (std::size_t i = 1; i < mono.factors.size(); ++i) prod = prod * factor_matrix(eff, mono.factors[i]);
    if (acc.size() == 0)
      acc = mono.coef * prod;
    else
      acc += mono.coef * prod;
  }
  return acc;
}

std::complex<double> trace_of(const ModelPolynomial& p, const std::vector<Mat>& eff) {
  std::complex<double> acc = 0.0;
  for (const auto& mono : p) {
    const auto& fs = mono.factors;
    if (fs.size() == 1) {
      acc += mono.coef * factor_matrix(eff, fs[0]).trace();
      continue;
    }
    Mat prod = factor_matrix(eff, fs[0]);
    for (std::size_t i = 1; i + 1 < fs.size(); ++i) prod = prod * factor_matrix(eff, fs[i]);
    Mat last = factor_matrix(eff, fs.back());
    acc += mono.coef * prod.cwiseProduct(last.transpose()).sum();
  }
  return acc;
}

Word to_word(const ExperimentConfig& c, const Monomial& m) {
  Word w;
  for (auto [g, star] : m.factors) {
    Letter l;
    l.family = c.generators[static_cast<std::size_t>(g)].family;
    l.index = g;
    l.starred = star;
    w.push_back(l);
  }
  return w;
}

ResultRecord base_record(const ExperimentConfig& c) {
  ResultRecord r;
  r.data = {{"schema_version", 1},
            {"experiment", to_string(c.experiment)},
            {"id", c.id},
            {"seed", c.seed},
            {"config", to_json(c)}};
  return r;
}

// ---------------------------------------------------------------------------------------
// Limits of deterministic generators and B laws

Mat limit_matrix(const GeneratorSpec& g) {
  switch (g.kind) {
    case EnsembleKind::dyadic_diag: return dyadic_diag(kLimitTruncation);
    case EnsembleKind::fixed: return g.payload;
    default:
      throw ConfigError("generator '" + g.name + "' has no compact deterministic limit (kind " + to_string(g.kind) + ")");
  }
}

struct Law {
  double tau_b;
  double tau_b2;
};

std::optional<Law> law_moments(const GeneratorSpec& g) {
  switch (g.kind) {
    case EnsembleKind::wishart: {
      double s = g.entry_variance / 2.0;
      return Law{s, 2.0 * s * s};
    }
    case EnsembleKind::gue: return Law{0.0, 1.0};
    case EnsembleKind::identity: return Law{1.0, 1.0};
    case EnsembleKind::fixed: {
      if ((g.payload - g.payload.adjoint()).cwiseAbs().maxCoeff() > 1e-12) return std::nullopt;
      const double n = static_cast<double>(g.payload.rows());
      return Law{g.payload.trace().real() / n, (g.payload * g.payload).trace().real() / n};
    }
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------------------
// Exact Weingarten column for the moment table

struct ExactPlan {
  bool available = false;
  std::string reason;
  MatrixList a_list, b_list;
};

ExactPlan exact_plan(const ExperimentConfig& c, const Monomial& mono, long n) {
  ExactPlan plan;
  std::string haar;
  for (const auto& g : c.generators)
    if (g.kind == EnsembleKind::haar_unitary) {
      if (!haar.empty()) {
        plan.reason = "more than one Haar unitary";
        return plan;
      }
      haar = g.name;
    }
  if (haar.empty()) {
    plan.reason = "no Haar unitary";
    return plan;
  }
  const auto& fs = mono.factors;
  for (auto [g, s] : fs) {
    const auto& spec = c.generators[static_cast<std::size_t>(g)];
    if (is_random(spec.kind)) {
      plan.reason = "word contains a random generator other than the rotation";
      return plan;
    }
    if (spec.family == Family::A && !spec.rotate.empty()) {
      plan.reason = "A factors must be unrotated";
      return plan;
    }
    if (spec.family == Family::B && spec.rotate != haar) {
      plan.reason = "B factors must all be rotated by the Haar unitary";
      return plan;
    }
  }
  // Rotate cyclically to start at an A factor preceded by a B factor.
  const std::size_t len = fs.size();
  auto fam = [&](std::size_t i) { return c.generators[static_cast<std::size_t>(fs[i % len].first)].family; };
  std::size_t start = len;
  for (std::size_t i = 0; i < len; ++i)
    if (fam(i) == Family::A && fam(i + len - 1) == Family::B) {
      start = i;
      break;
    }
  if (start == len) {
    plan.reason = "word does not alternate";
    return plan;
  }
  std::vector<Mat> raw(c.generators.size());
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    const auto& spec = c.generators[g];
    if (!is_random(spec.kind)) {
      EnsembleSpec es{spec.kind, n, spec.entry_variance, spec.payload};
      RngStream unused(0, 0);
      raw[g] = sample(es, unused);
    }
  }
  std::size_t i = 0;
  while (i < len) {
    Mat a = Mat::Identity(n, n), b = Mat::Identity(n, n);
    while (i < len && fam(start + i) == Family::A) a = a * factor_matrix(raw, fs[(start + i++) % len]);
    while (i < len && fam(start + i) == Family::B) b = b * factor_matrix(raw, fs[(start + i++) % len]);
    plan.a_list.push_back(a);
    plan.b_list.push_back(b);
  }
  const int k = static_cast<int>(plan.a_list.size());
  if (k > kDefaultMaxDegree) {
    plan.reason = "more than " + std::to_string(kDefaultMaxDegree) + " alternations";
    return plan;
  }
  if (n < k) {
    plan.reason = "n < k";
    return plan;
  }
  plan.available = true;
  return plan;
}

// ---------------------------------------------------------------------------------------
// ncms limit of Tr(P) for the tau-prime study

struct LimitPrediction {
  bool available = false;
  std::complex<double> value = 0.0;
  std::string reason;
};

LimitPrediction ncms_limit(const ExperimentConfig& c, const ModelPolynomial& poly) {
  LimitPrediction out;
  std::set<int> used;
  for (const auto& m : poly)
    for (auto [g, s] : m.factors) used.insert(g);
  std::set<std::string> rotations;
  for (const auto& g : c.generators)
    if (!g.rotate.empty()) rotations.insert(g.rotate);

  std::set<std::string> a_classes;
  for (int g : used) {
    const auto& spec = c.generators[static_cast<std::size_t>(g)];
    if (spec.family == Family::A) a_classes.insert(spec.rotate);
  }
  if (a_classes.size() >= 2) {
    out.available = true;
    out.reason = "A factors are rotated by distinct unitaries; mixed traces vanish";
    return out;
  }
  const std::string frame = a_classes.empty() ? std::string() : *a_classes.begin();

  // A side: Tr on limit matrices, one letter index per A generator.
  std::map<int, int> a_index;
  std::vector<Mat> a_mats;
  long a_dim = -1;
  for (int g : used) {
    const auto& spec = c.generators[static_cast<std::size_t>(g)];
    if (spec.family != Family::A) continue;
    if (spec.kind == EnsembleKind::fixed) {
      if (a_dim >= 0 && a_dim != spec.payload.rows()) {
        out.reason = "A payloads of different sizes";
        return out;
      }
      a_dim = spec.payload.rows();
    } else if (spec.kind != EnsembleKind::dyadic_diag) {
      out.reason = "A generator '" + spec.name + "' has no compact deterministic limit";
      return out;
    }
  }
  if (a_dim < 0) a_dim = kLimitTruncation;
  for (int g : used) {
    const auto& spec = c.generators[static_cast<std::size_t>(g)];
    if (spec.family != Family::A) continue;
    a_index[g] = static_cast<int>(a_mats.size());
    a_mats.push_back(spec.kind == EnsembleKind::fixed ? spec.payload : dyadic_diag(a_dim));
  }

  // B side: one free group per random invariant generator, per Haar letter, and per
  // rotation class of deterministic generators.
  std::vector<MomentFunctional> groups;
  std::map<int, std::pair<int, int>> b_slot;  // generator -> (group, index)
  std::map<std::string, int> class_group;
  std::map<int, std::vector<Mat>> class_mats;
  for (int g : used) {
    const auto& spec = c.generators[static_cast<std::size_t>(g)];
    if (spec.family != Family::B) continue;
    switch (spec.kind) {
      case EnsembleKind::wishart:
        b_slot[g] = {static_cast<int>(groups.size()), 0};
        groups.push_back(marchenko_pastur_tau(spec.entry_variance / 2.0));
        break;
      case EnsembleKind::gue:
        b_slot[g] = {static_cast<int>(groups.size()), 0};
        groups.push_back(semicircle_tau(1.0));
        break;
      case EnsembleKind::haar_unitary:
        if (spec.name == frame || rotations.count(spec.name)) {
          out.reason = "Haar generator '" + spec.name + "' is used both as a letter and as a rotation";
          return out;
        }
        b_slot[g] = {static_cast<int>(groups.size()), 0};
        groups.push_back(haar_unitary_tau());
        break;
      case EnsembleKind::ginibre:
        out.reason = "limit law of ginibre B generators is not implemented";
        return out;
      case EnsembleKind::identity:
        b_slot[g] = {static_cast<int>(groups.size()), 0};
        groups.push_back(power_functional(Family::B, [](int) -> Complex { return 1.0; }, "identity"));
        break;
      case EnsembleKind::fixed:
      case EnsembleKind::dyadic_diag: {
        if (spec.rotate == frame) {
          out.reason = "deterministic B generator '" + spec.name + "' is not rotated relative to the A generators";
          return out;
        }
        auto [it, fresh] = class_group.emplace(spec.rotate, static_cast<int>(groups.size()));
        if (fresh) groups.emplace_back();  // filled below
        auto& mats = class_mats[it->second];
        b_slot[g] = {it->second, static_cast<int>(mats.size())};
        mats.push_back(spec.kind == EnsembleKind::fixed ? spec.payload : dyadic_diag(c.n_list.back()));
        break;
      }
    }
  }
  for (auto& [grp, mats] : class_mats) {
    for (const auto& m : mats)
      if (m.rows() != mats.front().rows()) {
        out.reason = "deterministic B generators of one rotation class differ in size";
        return out;
      }
    groups[static_cast<std::size_t>(grp)] = matrix_functional(Family::B, mats, "fixed_b");
  }

  MomentFunctional omega = matrix_functional(Family::A, a_mats, "omega_limit");
  MomentFunctional tau = groups.empty() ? power_functional(Family::B, [](int) -> Complex { return 1.0; }, "unit")
                                        : free_product(groups);
  for (const auto& m : poly) {
    Word w;
    for (auto [g, s] : m.factors) {
      Letter l;
      l.starred = s;
      const auto& spec = c.generators[static_cast<std::size_t>(g)];
      if (spec.family == Family::A) {
        l.family = Family::A;
        l.index = a_index.at(g);
      } else {
        l.family = Family::B;
        l.group = b_slot.at(g).first;
        l.index = b_slot.at(g).second;
      }
      w.push_back(l);
    }
    out.value += m.coef * cyclic_monotone_moment(w, omega, tau);
  }
  out.available = true;
  return out;
}

// ---------------------------------------------------------------------------------------
// Log-log least squares

struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double intercept = 0.0;
};

SlopeFit loglog_fit(const std::vector<long>& ns, const std::vector<double>& ys) {
  const std::size_t m = ns.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::log(static_cast<double>(ns[i]));
    y[i] = std::log(ys[i]);
  }
  double xb = 0, yb = 0;
  for (std::size_t i = 0; i < m; ++i) {
    xb += x[i];
    yb += y[i];
  }
  xb /= static_cast<double>(m);
  yb /= static_cast<double>(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xb) * (x[i] - xb);
    sxy += (x[i] - xb) * (y[i] - yb);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = yb - f.slope * xb;
  double rss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  const double df = static_cast<double>(m) - 2.0;
  f.se = df > 0 ? std::sqrt(rss / df / sxx) : 0.0;
  double t = df > 0 ? boost::math::quantile(boost::math::complement(boost::math::students_t(df), 0.025)) : 0.0;
  f.ci_lo = f.slope - t * f.se;
  f.ci_hi = f.slope + t * f.se;
  return f;
}

nlohmann::json fit_json(const SlopeFit& f) {
  return {{"slope", f.slope}, {"slope_se", f.se}, {"slope_ci95", {f.ci_lo, f.ci_hi}}, {"intercept", f.intercept}};
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

// ---------------------------------------------------------------------------------------

ResultRecord run_moment_table(const ExperimentConfig& c) {
  if (c.experiment != ExperimentKind::moments) throw ConfigError("config is not a moments experiment");
  c.validate();
  const auto t0 = Clock::now();
  ResultRecord rec = base_record(c);
  std::vector<Monomial> words;
  for (const auto& w : c.words) words.push_back(c.parse_polynomial(w).front());

  nlohmann::json per_n = nlohmann::json::array();
  for (long n : c.n_list) {
    Sampler sampler(c, n);
    const std::size_t W = words.size();
    std::vector<std::vector<std::complex<double>>> emp(W, std::vector<std::complex<double>>(static_cast<std::size_t>(c.trials)));
    auto fact = emp;
    parallel_for(c.trials, c.threads, [&](int t) {
      auto eff = sampler.effective(t);
      MomentFunctional omega = matrix_functional(Family::A, eff, "Tr");
      MomentFunctional tau = matrix_functional(Family::B, eff, "tr");
      for (std::size_t w = 0; w < W; ++w) {
        emp[w][static_cast<std::size_t>(t)] = trace_of({words[w]}, eff);
        fact[w][static_cast<std::size_t>(t)] = cyclic_monotone_moment(to_word(c, words[w]), omega, tau);
      }
    });
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t w = 0; w < W; ++w) {
      std::vector<double> er, ei, fr, dr, da;
      for (int t = 0; t < c.trials; ++t) {
        auto e = emp[w][static_cast<std::size_t>(t)], f = fact[w][static_cast<std::size_t>(t)];
        er.push_back(e.real());
        ei.push_back(e.imag());
        fr.push_back(f.real());
        dr.push_back((e - f).real());
        da.push_back(std::abs(e - f));
      }
      auto se = summarize(er), si = summarize(ei), sf = summarize(fr), sd = summarize(dr), sa = summarize(da);
      nlohmann::json row{{"word", c.words[w]},
                         {"empirical_mean", se.mean},
                         {"empirical_mean_imag", si.mean},
                         {"empirical_se", se.se},
                         {"factorized_mean", sf.mean},
                         {"factorized_se", sf.se},
                         {"diff_mean", sd.mean},
                         {"diff_se", sd.se},
                         {"abs_diff_mean", sa.mean},
                         {"abs_diff_se", sa.se}};
      auto plan = exact_plan(c, words[w], n);
      if (plan.available) {
        TraceWordSpec spec;
        spec.a_list = plan.a_list;
        spec.b_list = plan.b_list;
        const int k = static_cast<int>(plan.a_list.size());
        std::vector<int> cyc(static_cast<std::size_t>(k));
        for (int r = 0; r < k; ++r) cyc[static_cast<std::size_t>(r)] = (r + 1) % k;
        spec.sigma = Permutation(cyc);
        auto exact = expected_trace_product(spec);
        row["exact_expectation"] = exact.real();
        row["exact_expectation_imag"] = exact.imag();
        if (se.se > 0) row["exact_z"] = (se.mean - exact.real()) / se.se;
      } else {
        row["exact_unavailable"] = plan.reason;
      }
      rows.push_back(row);
    }
    per_n.push_back({{"n", n}, {"rows", rows}});
  }
  rec.data["results"] = per_n;
  rec.wall_clock_seconds = elapsed(t0);
  return rec;
}

ResultRecord run_spectrum_experiment(const ExperimentConfig& c) {
  if (c.experiment != ExperimentKind::spectrum) throw ConfigError("config is not a spectrum experiment");
  c.validate();
  const auto t0 = Clock::now();
  ResultRecord rec = base_record(c);
  const auto poly = c.parse_polynomial(c.model);
  const auto& pr = c.predictor;
  const int top = std::max(1, c.top);
  const int orders = std::max(1, c.moment_orders);

  std::vector<int> a_idx, b_idx;
  for (const auto& a : pr.a) a_idx.push_back(c.generator_index(a));
  for (const auto& b : pr.b) b_idx.push_back(c.generator_index(b));

  nlohmann::json per_n = nlohmann::json::array();
  for (long n : c.n_list) {
    Sampler sampler(c, n);
    const auto T = static_cast<std::size_t>(c.trials);
    std::vector<Spectrum> spectra(T);
    std::vector<std::vector<double>> pmoments(T, std::vector<double>(static_cast<std::size_t>(orders)));
    std::vector<std::vector<double>> a_moments(T, std::vector<double>(2, 0.0));
    std::vector<Mat> b_gram(T);
    std::vector<std::vector<double>> b_tr(T);

    parallel_for(c.trials, c.threads, [&](int ti) {
      const auto t = static_cast<std::size_t>(ti);
      auto eff = sampler.effective(ti);
      Mat m = evaluate(poly, eff);
      std::vector<double> ev;
      try {
        ev = hermitian_eigenvalues_raw(m);
      } catch (const DomainError& e) {
        throw ConfigError("model \"" + c.model + "\" is not self-adjoint: " + e.what());
      }
      for (int p = 1; p <= orders; ++p) {
        double s = 0.0;
        for (double v : ev) s += std::pow(v, p);
        pmoments[t][static_cast<std::size_t>(p - 1)] = s;
      }
      Spectrum sp = properly_arrange(ev);
      if (sp.pos.size() > static_cast<std::size_t>(kMetricStore)) sp.pos.resize(kMetricStore);
      if (sp.neg.size() > static_cast<std::size_t>(kMetricStore)) sp.neg.resize(kMetricStore);
      spectra[t] = sp;
      if (a_idx.size() == 1) {
        const Mat& a = eff[static_cast<std::size_t>(a_idx[0])];
        a_moments[t][0] = a.trace().real();
        a_moments[t][1] = a.cwiseProduct(a.transpose()).sum().real();
      }
      const auto k = static_cast<Eigen::Index>(b_idx.size());
      b_gram[t] = Mat::Zero(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        const Mat& bi = eff[static_cast<std::size_t>(b_idx[static_cast<std::size_t>(i)])];
        b_tr[t].push_back(bi.trace().real() / static_cast<double>(n));
        for (Eigen::Index j = 0; j < k; ++j) {
          const Mat& bj = eff[static_cast<std::size_t>(b_idx[static_cast<std::size_t>(j)])];
          // tr(B_i* B_j)
          b_gram[t](i, j) = bi.conjugate().cwiseProduct(bj).sum() / static_cast<double>(n);
        }
      }
    });

    // Rank-wise empirical summaries.
    auto rankwise = [&](bool pos, int count) {
      std::vector<MeanSe> out;
      for (int i = 0; i < count; ++i) {
        std::vector<double> xs;
        for (const auto& s : spectra) xs.push_back(pos ? s.pos_at(static_cast<std::size_t>(i)) : s.neg_at(static_cast<std::size_t>(i)));
        out.push_back(summarize(xs));
      }
      return out;
    };
    auto pos_stats = rankwise(true, kMetricStore);
    auto neg_stats = rankwise(false, kMetricStore);
    std::vector<double> mean_all;
    for (const auto& s : pos_stats) mean_all.push_back(s.mean);
    for (const auto& s : neg_stats) mean_all.push_back(s.mean);
    Spectrum mean_spectrum = properly_arrange(mean_all);

    nlohmann::json entry{{"n", n}};
    nlohmann::json emp;
    for (const char* part : {"pos", "neg"}) {
      const auto& st = std::string(part) == "pos" ? pos_stats : neg_stats;
      std::vector<double> mu, sd;
      for (int i = 0; i < top; ++i) {
        mu.push_back(st[static_cast<std::size_t>(i)].mean);
        sd.push_back(st[static_cast<std::size_t>(i)].sd);
      }
      emp[std::string(part) + "_mean"] = mu;
      emp[std::string(part) + "_sd"] = sd;
    }
    entry["empirical"] = emp;

    // B statistics: theory when every b has a known law, else trial means.
    std::vector<double> tau_b(b_idx.size()), tau_b2(b_idx.size());
    Mat gram_emp = Mat::Zero(static_cast<Eigen::Index>(b_idx.size()), static_cast<Eigen::Index>(b_idx.size()));
    for (std::size_t t = 0; t < T; ++t) gram_emp += b_gram[t] / static_cast<double>(T);
    bool theory = pr.b_stats == "theory";
    for (std::size_t i = 0; i < b_idx.size(); ++i) {
      auto law = law_moments(c.generators[static_cast<std::size_t>(b_idx[i])]);
      if (!law) theory = false;
    }
    if (pr.name == "sum_conj_b") {
      std::set<int> distinct(b_idx.begin(), b_idx.end());
      for (int b : b_idx)
        if (!is_random(c.generators[static_cast<std::size_t>(b)].kind)) theory = false;
      if (distinct.size() != b_idx.size()) theory = false;
    }
    Mat beta2 = gram_emp;
    for (std::size_t i = 0; i < b_idx.size(); ++i) {
      if (theory) {
        auto law = *law_moments(c.generators[static_cast<std::size_t>(b_idx[i])]);
        tau_b[i] = law.tau_b;
        tau_b2[i] = law.tau_b2;
      } else {
        std::vector<double> xs;
        for (std::size_t t = 0; t < T; ++t) xs.push_back(b_tr[t][i]);
        tau_b[i] = summarize(xs).mean;
        tau_b2[i] = gram_emp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
      }
    }
    if (theory)
      for (std::size_t i = 0; i < b_idx.size(); ++i)
        for (std::size_t j = 0; j < b_idx.size(); ++j)
          beta2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = i == j ? tau_b2[i] : tau_b[i] * tau_b[j];
    if (!b_idx.empty())
      entry["b_stats"] = {{"source", theory ? "theory" : "empirical"}, {"tau_b", tau_b}, {"tau_b2", tau_b2}};

    std::optional<Spectrum> predicted;
    std::vector<Spectrum> a_limits;
    for (int a : a_idx) a_limits.push_back(hermitian_eigenvalues(limit_matrix(c.generators[static_cast<std::size_t>(a)])));
    nlohmann::json params;
    if (pr.name == "anticommutator") {
      auto [p, q] = anticommutator_coefficients(tau_b[0], tau_b2[0]);
      params = {{"p", p}, {"q", q}};
      predicted = predict_anticommutator(a_limits[0], tau_b[0], tau_b2[0]);
    } else if (pr.name == "commutator") {
      params = {{"r", commutator_coefficient(tau_b[0], tau_b2[0])}};
      predicted = predict_commutator(a_limits[0], tau_b[0], tau_b2[0]);
    } else if (pr.name == "multi_unitary_disjoint") {
      std::vector<double> gamma = pr.gamma.empty() ? std::vector<double>(a_idx.size(), 1.0) : pr.gamma;
      params = {{"gamma", gamma}};
      predicted = predict_multi_unitary_disjoint(a_limits, gamma);
    } else if (pr.name == "sum_a_b_astar" || pr.name == "sum_conj_b") {
      std::vector<Mat> mats;
      for (int a : a_idx) mats.push_back(limit_matrix(c.generators[static_cast<std::size_t>(a)]));
      CompactModel model(mats);
      if (pr.name == "sum_a_b_astar") {
        params = {{"beta", tau_b}};
        predicted = predict_sum_a_b_astar(model, tau_b);
      } else {
        predicted = predict_sum_conj_b(model, BStats::from_beta2((beta2 + beta2.adjoint()) * 0.5));
      }
    }

    if (predicted) {
      predicted->validate();
      entry["predictor"] = pr.name;
      entry["params"] = params;
      entry["predicted"] = to_json(*predicted);
      entry["metric_d_mean_spectrum"] = metric_d(mean_spectrum, *predicted);
      std::vector<double> ds;
      for (const auto& s : spectra) ds.push_back(metric_d(s, *predicted));
      auto sd = summarize(ds);
      entry["metric_d_trials_mean"] = sd.mean;
      entry["metric_d_trials_se"] = sd.se;
    }

    nlohmann::json mrows = nlohmann::json::array();
    for (int p = 1; p <= orders; ++p) {
      std::vector<double> xs;
      for (std::size_t t = 0; t < T; ++t) xs.push_back(pmoments[t][static_cast<std::size_t>(p - 1)]);
      auto s = summarize(xs);
      nlohmann::json row{{"order", p}, {"empirical_mean", s.mean}, {"empirical_se", s.se}};
      if (predicted) row["predicted"] = moment(*predicted, p);
      mrows.push_back(row);
    }
    entry["moments"] = mrows;

    // Fitted coefficients against the limit spectrum of a.
    if ((pr.name == "anticommutator" || pr.name == "commutator") && a_limits[0].neg.empty()) {
      const auto& ap = a_limits[0].pos;
      const int ranks = static_cast<int>(std::min<std::size_t>(
          ap.size(), static_cast<std::size_t>(c.tolerances.count("fit_ranks") ? c.tolerances.at("fit_ranks") : 6)));
      double ph = 0, qh = 0, rh = 0;
      for (int i = 0; i < ranks; ++i) {
        ph += pos_stats[static_cast<std::size_t>(i)].mean / ap[static_cast<std::size_t>(i)];
        qh += neg_stats[static_cast<std::size_t>(i)].mean / ap[static_cast<std::size_t>(i)];
        rh += (pos_stats[static_cast<std::size_t>(i)].mean - neg_stats[static_cast<std::size_t>(i)].mean) /
              (2.0 * ap[static_cast<std::size_t>(i)]);
      }
      nlohmann::json fit{{"ranks", ranks}};
      if (pr.name == "anticommutator") {
        fit["p_hat"] = ranks ? ph / ranks : 0.0;
        fit["q_hat"] = ranks ? qh / ranks : 0.0;
      } else {
        fit["r_hat"] = ranks ? rh / ranks : 0.0;
      }
      // Moment-based per-trial estimates from Tr(P), Tr(P^2), Tr(A), Tr(A^2).
      std::vector<double> pv, qv, rv;
      for (std::size_t t = 0; t < T && orders >= 2; ++t) {
        double s1 = pmoments[t][0] / a_moments[t][0];
        double s2 = pmoments[t][1] / a_moments[t][1];
        double disc = std::sqrt(std::max(2.0 * s2 - s1 * s1, 0.0));
        pv.push_back((s1 + disc) / 2.0);
        qv.push_back((s1 - disc) / 2.0);
        rv.push_back(std::sqrt(std::max(s2 / 2.0, 0.0)));
      }
      if (!pv.empty()) {
        if (pr.name == "anticommutator") {
          fit["p_moment_mean"] = summarize(pv).mean;
          fit["q_moment_mean"] = summarize(qv).mean;
        } else {
          fit["r_moment_mean"] = summarize(rv).mean;
        }
      }
      entry["fit"] = fit;
    }
    per_n.push_back(entry);
  }
  rec.data["results"] = per_n;
  rec.wall_clock_seconds = elapsed(t0);
  return rec;
}

ResultRecord run_decay_study(const ExperimentConfig& c) {
  if (c.experiment != ExperimentKind::decay) throw ConfigError("config is not a decay study");
  c.validate();
  const auto t0 = Clock::now();
  ResultRecord rec = base_record(c);
  const auto poly = c.parse_polynomial(c.model);
  nlohmann::json per_n = nlohmann::json::array();
  std::vector<double> vars, fourths;
  for (long n : c.n_list) {
    Sampler sampler(c, n);
    std::vector<std::complex<double>> tr(static_cast<std::size_t>(c.trials));
    parallel_for(c.trials, c.threads, [&](int t) { tr[static_cast<std::size_t>(t)] = trace_of(poly, sampler.effective(t)); });
    const auto x0 = tr.front();
    std::complex<double> dbar = 0.0;
    for (auto x : tr) dbar += x - x0;
    dbar /= static_cast<double>(tr.size());
    double ss = 0.0, s4 = 0.0;
    for (auto x : tr) {
      double a2 = std::norm(x - x0 - dbar);
      ss += a2;
      s4 += a2 * a2;
    }
    const double var = ss / static_cast<double>(tr.size() - 1);
    const double fourth = s4 / static_cast<double>(tr.size());
    vars.push_back(var);
    fourths.push_back(fourth);
    per_n.push_back({{"n", n},
                     {"mean", complex_json(x0 + dbar)},
                     {"variance", var},
                     {"fourth_centered_abs_moment", fourth}});
  }
  rec.data["results"] = per_n;
  const bool deterministic = std::all_of(vars.begin(), vars.end(), [](double v) { return v == 0.0; });
  rec.data["deterministic"] = deterministic;
  const bool positive = std::all_of(vars.begin(), vars.end(), [](double v) { return v > 0.0; }) &&
                        std::all_of(fourths.begin(), fourths.end(), [](double v) { return v > 0.0; });
  if (positive) {
    rec.data["variance_fit"] = fit_json(loglog_fit(c.n_list, vars));
    rec.data["fourth_moment_fit"] = fit_json(loglog_fit(c.n_list, fourths));
  } else {
    rec.data["variance_fit"] = nullptr;
    rec.data["fourth_moment_fit"] = nullptr;
  }
  rec.wall_clock_seconds = elapsed(t0);
  return rec;
}

ResultRecord run_tau_prime_study(const ExperimentConfig& c) {
  if (c.experiment != ExperimentKind::tau_prime) throw ConfigError("config is not a tau-prime study");
  c.validate();
  const auto t0 = Clock::now();
  ResultRecord rec = base_record(c);
  const auto poly = c.parse_polynomial(c.model);
  nlohmann::json per_n = nlohmann::json::array();
  for (long n : c.n_list) {
    Sampler sampler(c, n);
    std::vector<std::complex<double>> tr(static_cast<std::size_t>(c.trials));
    parallel_for(c.trials, c.threads, [&](int t) { tr[static_cast<std::size_t>(t)] = trace_of(poly, sampler.effective(t)); });
    std::vector<double> re, im, ab;
    for (auto x : tr) {
      re.push_back(x.real());
      im.push_back(x.imag());
      ab.push_back(std::abs(x));
    }
    auto sr = summarize(re), si = summarize(im), sa = summarize(ab);
    per_n.push_back({{"n", n},
                     {"n_tr_mean", complex_json({sr.mean, si.mean})},
                     {"n_tr_se", std::hypot(sr.se, si.se)},
                     {"abs_mean", sa.mean},
                     {"abs_se", sa.se}});
  }
  rec.data["results"] = per_n;
  auto lim = ncms_limit(c, poly);
  nlohmann::json pj{{"available", lim.available}};
  if (lim.available) pj["value"] = complex_json(lim.value);
  if (!lim.reason.empty()) pj["note"] = lim.reason;
  rec.data["prediction"] = pj;
  rec.wall_clock_seconds = elapsed(t0);
  return rec;
}

ResultRecord run_experiment(const ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentKind::moments: return run_moment_table(c);
    case ExperimentKind::spectrum: return run_spectrum_experiment(c);
    case ExperimentKind::decay: return run_decay_study(c);
    case ExperimentKind::tau_prime: return run_tau_prime_study(c);
  }
  throw ConfigError("unknown experiment");
}

std::map<long, std::string> spectrum_csv(const ResultRecord& r) {
  std::map<long, std::string> out;
  if (r.data.at("experiment") != "spectrum") return out;
  for (const auto& e : r.data.at("results")) {
    std::ostringstream os;
    os.precision(17);
    os << "rank,empirical_mean,empirical_sd,predicted\n";
    Spectrum pred;
    if (e.contains("predicted")) pred = spectrum_from_json(e.at("predicted"));
    for (const char* part : {"pos", "neg"}) {
      const bool pos = std::string(part) == "pos";
      auto mu = e.at("empirical").at(std::string(part) + "_mean").get<std::vector<double>>();
      auto sd = e.at("empirical").at(std::string(part) + "_sd").get<std::vector<double>>();
      for (std::size_t i = 0; i < mu.size(); ++i) {
        const long rank = pos ? static_cast<long>(i + 1) : -static_cast<long>(i + 1);
        os << rank << ',' << mu[i] << ',' << sd[i] << ',';
        if (e.contains("predicted")) os << (pos ? pred.pos_at(i) : pred.neg_at(i));
        os << '\n';
      }
    }
    out[e.at("n").get<long>()] = os.str();
  }
  return out;
}

std::string record_csv(const ResultRecord& r) {
  std::ostringstream os;
  os.precision(17);
  const std::string kind = r.data.at("experiment");
  if (kind == "spectrum") {
    auto tables = spectrum_csv(r);
    bool several = tables.size() > 1;
    for (const auto& [n, t] : tables) {
      if (several) os << "# n=" << n << '\n';
      os << t;
    }
  } else if (kind == "moments") {
    os << "n,word,empirical_mean,empirical_se,factorized_mean,diff_mean,diff_se,abs_diff_mean,exact_expectation\n";
    for (const auto& e : r.data.at("results"))
      for (const auto& row : e.at("rows")) {
        os << e.at("n").get<long>() << ",\"" << row.at("word").get<std::string>() << "\","
           << row.at("empirical_mean").get<double>() << ',' << row.at("empirical_se").get<double>() << ','
           << row.at("factorized_mean").get<double>() << ',' << row.at("diff_mean").get<double>() << ','
           << row.at("diff_se").get<double>() << ',' << row.at("abs_diff_mean").get<double>() << ',';
        if (row.contains("exact_expectation")) os << row.at("exact_expectation").get<double>();
        os << '\n';
      }
  } else if (kind == "decay") {
    os << "n,variance,fourth_centered_abs_moment\n";
    for (const auto& e : r.data.at("results"))
      os << e.at("n").get<long>() << ',' << e.at("variance").get<double>() << ','
         << e.at("fourth_centered_abs_moment").get<double>() << '\n';
  } else {
    os << "n,n_tr_mean_re,n_tr_mean_im,n_tr_se,abs_mean,abs_se\n";
    for (const auto& e : r.data.at("results"))
      os << e.at("n").get<long>() << ',' << e.at("n_tr_mean").at("re").get<double>() << ','
         << e.at("n_tr_mean").at("im").get<double>() << ',' << e.at("n_tr_se").get<double>() << ','
         << e.at("abs_mean").get<double>() << ',' << e.at("abs_se").get<double>() << '\n';
  }
  return os.str();
}

}  // namespace cmrm::lab
