#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "cmrm/ncms.hpp"
#include "cmrm/spectra.hpp"
#include "cmrm/word.hpp"

namespace cmrm {

/// Finite N x N truncations of the limiting compact operators a_1..a_k.
struct CompactModel {
  std::vector<Eigen::MatrixXcd> a_mats;

  /// Checks squareness, a common size and Hermiticity within 1e-12.
  explicit CompactModel(std::vector<Eigen::MatrixXcd> mats);
  long N() const { return a_mats.empty() ? 0 : static_cast<long>(a_mats.front().rows()); }
  std::size_t k() const { return a_mats.size(); }
};

/// Limiting B statistics: beta_i = tau(b_i), beta2_ij = tau(b_i* b_j), gamma_i = beta2_ii.
struct BStats {
  std::vector<std::complex<double>> beta;
  Eigen::MatrixXcd beta2;
  std::vector<double> gamma;

  static BStats from_beta2(const Eigen::MatrixXcd& beta2, std::vector<std::complex<double>> beta = {});
};

/// Square root of a Hermitian PSD matrix; eigenvalues down to -1e-10 are clamped to 0.
Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& b);

/// EV((sqrt B (x) I) blockdiag(a_1..a_k) (sqrt B (x) I)), limit of sum_i b_i a_i b_i*.
Spectrum predict_sum_conj_b(const CompactModel& model, const BStats& stats);
/// EV(sum_i beta_i a_i a_i*), limit of sum_i a_i b_i a_i*.
Spectrum predict_sum_a_b_astar(const CompactModel& model, const std::vector<double>& beta);

struct AnticommutatorCoefficients {
  double p;
  double q;
};
AnticommutatorCoefficients anticommutator_coefficients(double tau_b, double tau_b2);
double commutator_coefficient(double tau_b, double tau_b2);

/// (p EV(a)) u (q EV(a)) with p = sqrt(tau(b^2)) + tau(b), q = -(sqrt(tau(b^2)) - tau(b)).
Spectrum predict_anticommutator(const Spectrum& spec_a, double tau_b, double tau_b2);
/// (r EV(a)) u (-r EV(a)) with r = sqrt(tau(b^2) - tau(b)^2).
Spectrum predict_commutator(const Spectrum& spec_a, double tau_b, double tau_b2);

/// Limit of sum_i U_i B_i U_i* a_i (U_i B_i U_i*)* for independent U_i. The B matrix is
/// diag(gamma) off the diagonal filled with conj(beta_i) beta_j; without gamma, gamma_i =
/// |beta_i|^2, which collapses to EV(sum |beta_i|^2 a_i).
Spectrum predict_multi_unitary_sum(const CompactModel& model, const std::vector<std::complex<double>>& beta,
                                   const std::optional<std::vector<double>>& gamma = std::nullopt);
/// EV(gamma_1 a_1) u ... u EV(gamma_k a_k)
Spectrum predict_multi_unitary_disjoint(const std::vector<Spectrum>& spec_list, const std::vector<double>& gamma);

inline constexpr std::size_t kDefaultOracleBudget = std::size_t{1} << 22;

/// (omega |> tau)(poly^l) for l = 1..l_max by full word expansion.
std::vector<std::complex<double>> moment_oracle(const Polynomial& poly, const MomentFunctional& omega,
                                                const MomentFunctional& tau, int l_max,
                                                std::size_t budget = kDefaultOracleBudget);

/// Limit law of a single self-adjoint B: its first two moments and a functional.
struct BLaw {
  std::string name;
  double tau_b;
  double tau_b2;
  MomentFunctional tau;
};
/// Wishart Z Z*/(2n), E|z|^2 = entry_variance.
BLaw marchenko_pastur_law(double entry_variance = 2.0);
/// GUE normalized so tr(G^2) -> 1.
BLaw semicircle_law();

nlohmann::json prediction_to_json(const std::string& model, const nlohmann::json& params, const Spectrum& spectrum,
                                  int moment_count = 8);

}  // namespace cmrm
