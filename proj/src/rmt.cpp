#include "cmrm/rmt.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include <Eigen/QR>

#include "cmrm/error.hpp"

namespace cmrm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

constexpr char kMagic[8] = {'C', 'M', 'R', 'M', 'M', 'A', 'T', '1'};

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(seeded_engine(seed, stream)) {}

std::uint64_t RngStream::mix(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

std::string to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::ginibre: return "ginibre";
    case EnsembleKind::haar_unitary: return "haar_unitary";
    case EnsembleKind::gue: return "gue";
    case EnsembleKind::wishart: return "wishart";
    case EnsembleKind::dyadic_diag: return "dyadic_diag";
    case EnsembleKind::fixed: return "fixed";
    case EnsembleKind::identity: return "identity";
  }
  return "?";
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
  for (auto k : {EnsembleKind::ginibre, EnsembleKind::haar_unitary, EnsembleKind::gue, EnsembleKind::wishart,
                 EnsembleKind::dyadic_diag, EnsembleKind::fixed, EnsembleKind::identity})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown ensemble kind '" + s + "'");
}

bool is_random(EnsembleKind k) {
  return k == EnsembleKind::ginibre || k == EnsembleKind::haar_unitary || k == EnsembleKind::gue ||
         k == EnsembleKind::wishart;
}

Eigen::MatrixXcd sample_ginibre(long n, double entry_variance, RngStream& rng) {
  if (n < 1) throw DomainError("dimension must be positive");
  if (!(entry_variance > 0)) throw DomainError("entry variance must be positive");
  const double sd = std::sqrt(entry_variance / 2.0);
  Eigen::MatrixXcd z(n, n);
  // Fill row by row so the draw order matches the serialized layout.
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      double re = rng.normal(sd);
      double im = rng.normal(sd);
      z(i, j) = {re, im};
    }
  return z;
}

Eigen::MatrixXcd sample_haar_unitary(long n, RngStream& rng) {
  Eigen::MatrixXcd z = sample_ginibre(n, 1.0, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (long j = 0; j < n; ++j) {
    std::complex<double> d = r(j, j);
    double a = std::abs(d);
    q.col(j) *= a > 0 ? d / a : 1.0;
  }
  return q;
}

Eigen::MatrixXcd sample_gue(long n, RngStream& rng) {
  Eigen::MatrixXcd z = sample_ginibre(n, 2.0 / static_cast<double>(n), rng);
  Eigen::MatrixXcd g = (z + z.adjoint()) * 0.5;
  return g;
}

Eigen::MatrixXcd sample_wishart(long n, RngStream& rng, double entry_variance) {
  Eigen::MatrixXcd z = sample_ginibre(n, entry_variance, rng);
  Eigen::MatrixXcd x = z * z.adjoint() / (2.0 * static_cast<double>(n));
  return (x + x.adjoint()) * 0.5;
}

Eigen::MatrixXcd dyadic_diag(long n) {
  if (n < 1) throw DomainError("dimension must be positive");
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  for (long i = 0; i < n; ++i) d(i, i) = std::ldexp(1.0, static_cast<int>(-(i + 1)));
  return d;
}

Eigen::MatrixXcd sample(const EnsembleSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case EnsembleKind::ginibre: return sample_ginibre(spec.n, spec.entry_variance, rng);
    case EnsembleKind::haar_unitary: return sample_haar_unitary(spec.n, rng);
    case EnsembleKind::gue: return sample_gue(spec.n, rng);
    case EnsembleKind::wishart: return sample_wishart(spec.n, rng, spec.entry_variance);
    case EnsembleKind::dyadic_diag: return dyadic_diag(spec.n);
    case EnsembleKind::identity: return Eigen::MatrixXcd::Identity(spec.n, spec.n);
    case EnsembleKind::fixed:
      if (spec.payload.rows() != spec.n || spec.payload.cols() != spec.n)
        throw DimensionError("fixed payload does not match n");
      return spec.payload;
  }
  throw DomainError("unhandled ensemble kind");
}

Spectrum hermitian_eigenvalues(const Eigen::MatrixXcd& m, double zero_tolerance) {
  return properly_arrange(hermitian_eigenvalues_raw(m), zero_tolerance);
}

Eigen::MatrixXcd evaluate_matrix_word(const Word& w, const Assignment& assignment) {
  if (w.empty()) throw DomainError("cannot evaluate the empty word without a dimension");
  Eigen::MatrixXcd out;
  for (const auto& l : w) {
    auto it = assignment.find(GeneratorKey::of(l));
    if (it == assignment.end()) throw DomainError("unassigned generator " + to_string(Word{l}));
    const auto& m = it->second;
    if (m.rows() != m.cols()) throw DimensionError("assigned matrices must be square");
    if (out.size() == 0) {
      out = l.starred ? Eigen::MatrixXcd(m.adjoint()) : m;
      continue;
    }
    if (m.rows() != out.rows()) throw DimensionError("assigned matrices differ in dimension");
    if (l.starred)
      out = out * m.adjoint();
    else
      out = out * m;
  }
  return out;
}

Eigen::MatrixXcd evaluate_matrix_polynomial(const Polynomial& p, const Assignment& assignment) {
  Eigen::MatrixXcd acc;
  for (const auto& [c, w] : p.terms) {
    Eigen::MatrixXcd t = evaluate_matrix_word(w, assignment) * c;
    if (acc.size() == 0)
      acc = t;
    else
      acc += t;
  }
  if (acc.size() == 0) throw DomainError("empty polynomial");
  return acc;
}

void write_matrix_binary(std::ostream& os, const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw DimensionError("only square matrices are serialized");
  std::uint64_t n = static_cast<std::uint64_t>(m.rows());
  os.write(kMagic, sizeof kMagic);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double re = m(i, j).real(), im = m(i, j).imag();
      os.write(reinterpret_cast<const char*>(&re), sizeof re);
      os.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
}

Eigen::MatrixXcd read_matrix_binary(std::istream& is) {
  char magic[8];
  std::uint64_t n = 0;
  is.read(magic, sizeof magic);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw DomainError("not a serialized matrix");
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double re = 0, im = 0;
      is.read(reinterpret_cast<char*>(&re), sizeof re);
      is.read(reinterpret_cast<char*>(&im), sizeof im);
      m(i, j) = {re, im};
    }
  if (!is) throw DomainError("truncated matrix data");
  return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m) {
  std::vector<std::vector<double>> re(static_cast<std::size_t>(m.rows())), im(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re[static_cast<std::size_t>(i)].push_back(m(i, j).real());
      im[static_cast<std::size_t>(i)].push_back(m(i, j).imag());
    }
  return {{"n", m.rows()}, {"re", re}, {"im", im}};
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
  const long n = j.at("n").get<long>();
  auto re = j.at("re").get<std::vector<std::vector<double>>>();
  std::vector<std::vector<double>> im;
  if (j.contains("im")) im = j.at("im").get<std::vector<std::vector<double>>>();
  if (static_cast<long>(re.size()) != n || (!im.empty() && static_cast<long>(im.size()) != n))
    throw DimensionError("matrix JSON rows do not match n");
  Eigen::MatrixXcd m(n, n);
  for (long i = 0; i < n; ++i) {
    auto r = static_cast<std::size_t>(i);
    if (static_cast<long>(re[r].size()) != n || (!im.empty() && static_cast<long>(im[r].size()) != n))
      throw DimensionError("matrix JSON columns do not match n");
    for (long c = 0; c < n; ++c)
      m(i, c) = {re[r][static_cast<std::size_t>(c)], im.empty() ? 0.0 : im[r][static_cast<std::size_t>(c)]};
  }
  return m;
}

}  // namespace cmrm
