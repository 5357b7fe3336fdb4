#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "cmrm/spectra.hpp"
#include "cmrm/word.hpp"

namespace cmrm {

/// Seeded generator; (seed, stream) pins the sequence on a given platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  /// Stream id from a list of integer coordinates (trial, dimension, generator, ...).
  static std::uint64_t mix(std::initializer_list<std::uint64_t> parts);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  double normal(double sd = 1.0) { return sd * normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

enum class EnsembleKind { ginibre, haar_unitary, gue, wishart, dyadic_diag, fixed, identity };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::ginibre;
  long n = 1;
  double entry_variance = 1.0;
  Eigen::MatrixXcd payload;
};

std::string to_string(EnsembleKind k);
EnsembleKind ensemble_kind_from_string(const std::string& s);
bool is_random(EnsembleKind k);

/// Entries iid complex Gaussian with E|z|^2 = entry_variance.
Eigen::MatrixXcd sample_ginibre(long n, double entry_variance, RngStream& rng);
/// QR of a Ginibre matrix with the R-diagonal phases moved into Q.
Eigen::MatrixXcd sample_haar_unitary(long n, RngStream& rng);
/// Hermitian, off-diagonal E|g_ij|^2 = 1/n so that tr(G^2) -> 1.
Eigen::MatrixXcd sample_gue(long n, RngStream& rng);
/// Z Z* / (2n) with Z Ginibre of the given entry variance.
Eigen::MatrixXcd sample_wishart(long n, RngStream& rng, double entry_variance = 2.0);
/// diag(2^-1, ..., 2^-n)
Eigen::MatrixXcd dyadic_diag(long n);
Eigen::MatrixXcd sample(const EnsembleSpec& spec, RngStream& rng);

/// Eigenvalues of a Hermitian matrix, ascending. Householder reduction to a real
/// tridiagonal matrix followed by implicit QL.
std::vector<double> hermitian_eigenvalues_raw(const Eigen::MatrixXcd& m);
/// Same as above, properly arranged. Non-Hermitian input (max entry deviation > 1e-8)
/// is a domain error.
Spectrum hermitian_eigenvalues(const Eigen::MatrixXcd& m, double zero_tolerance = kDefaultZeroTolerance);

struct GeneratorKey {
  Family family = Family::A;
  int group = 0;
  int index = 0;

  static GeneratorKey of(const Letter& l) { return {l.family, l.family == Family::B ? l.group : 0, l.index}; }
  friend auto operator<=>(const GeneratorKey&, const GeneratorKey&) = default;
};

using Assignment = std::map<GeneratorKey, Eigen::MatrixXcd>;

/// Ordered product of the assigned matrices, starred letters as adjoints.
Eigen::MatrixXcd evaluate_matrix_word(const Word& w, const Assignment& assignment);
Eigen::MatrixXcd evaluate_matrix_polynomial(const Polynomial& p, const Assignment& assignment);

/// 16-byte header (8-byte magic, uint64 n), then n*n row-major (re, im) float64 pairs.
void write_matrix_binary(std::ostream& os, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd read_matrix_binary(std::istream& is);
nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j);

}  // namespace cmrm
