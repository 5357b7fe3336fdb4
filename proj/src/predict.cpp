#include "cmrm/predict.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "cmrm/error.hpp"
#include "cmrm/rmt.hpp"

namespace cmrm {

CompactModel::CompactModel(std::vector<Eigen::MatrixXcd> mats) : a_mats(std::move(mats)) {
  for (const auto& m : a_mats) {
    if (m.rows() != m.cols() || m.rows() != a_mats.front().rows())
      throw DimensionError("compact model matrices must be square of one size");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("compact model matrices must be Hermitian");
  }
}

BStats BStats::from_beta2(const Eigen::MatrixXcd& beta2, std::vector<std::complex<double>> beta) {
  if (beta2.rows() != beta2.cols()) throw DimensionError("beta2 must be square");
  if (!beta.empty() && static_cast<Eigen::Index>(beta.size()) != beta2.rows())
    throw DimensionError("beta and beta2 sizes differ");
  BStats s;
  s.beta = std::move(beta);
  s.beta2 = beta2;
  for (Eigen::Index i = 0; i < beta2.rows(); ++i) s.gamma.push_back(beta2(i, i).real());
  return s;
}

Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& b) {
  if (b.rows() != b.cols()) throw DimensionError("square root needs a square matrix");
  if (b.size() && (b - b.adjoint()).cwiseAbs().maxCoeff() > 1e-8) throw DomainError("square root needs a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-10) throw DomainError("matrix is not positive semidefinite (eigenvalue " + std::to_string(ev(i)) + ")");
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  Eigen::MatrixXcd r = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return (r + r.adjoint()) * 0.5;
}

Spectrum predict_sum_conj_b(const CompactModel& model, const BStats& stats) {
  const auto k = static_cast<Eigen::Index>(model.k());
  const Eigen::Index N = model.N();
  if (stats.beta2.rows() != k || stats.beta2.cols() != k) throw DimensionError("beta2 must be k x k");
  Eigen::MatrixXcd s = hermitian_sqrt(stats.beta2);
  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(k * N, k * N);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index m = 0; m < k; ++m) {
        std::complex<double> c = s(i, m) * s(m, j);
        if (c != 0.0) big.block(i * N, j * N, N, N) += c * model.a_mats[static_cast<std::size_t>(m)];
      }
  return hermitian_eigenvalues((big + big.adjoint()) * 0.5);
}

Spectrum predict_sum_a_b_astar(const CompactModel& model, const std::vector<double>& beta) {
  if (beta.size() != model.k()) throw DimensionError("need one beta per a_i");
  const Eigen::Index N = model.N();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(N, N);
  for (std::size_t i = 0; i < beta.size(); ++i) acc += beta[i] * model.a_mats[i] * model.a_mats[i].adjoint();
  return hermitian_eigenvalues((acc + acc.adjoint()) * 0.5);
}

namespace {

void check_cauchy_schwarz(double tau_b, double tau_b2) {
  if (tau_b2 < tau_b * tau_b - 1e-12)
    throw DomainError("inconsistent moments: tau(b^2)=" + std::to_string(tau_b2) + " < tau(b)^2=" +
                      std::to_string(tau_b * tau_b));
}

}  // namespace

AnticommutatorCoefficients anticommutator_coefficients(double tau_b, double tau_b2) {
  check_cauchy_schwarz(tau_b, tau_b2);
  const double s = std::sqrt(std::max(tau_b2, 0.0));
  return {s + tau_b, -(s - tau_b)};
}

double commutator_coefficient(double tau_b, double tau_b2) {
  check_cauchy_schwarz(tau_b, tau_b2);
  return std::sqrt(std::max(tau_b2 - tau_b * tau_b, 0.0));
}

Spectrum predict_anticommutator(const Spectrum& spec_a, double tau_b, double tau_b2) {
  auto [p, q] = anticommutator_coefficients(tau_b, tau_b2);
  return disjoint_union(scale(spec_a, p), scale(spec_a, q));
}

Spectrum predict_commutator(const Spectrum& spec_a, double tau_b, double tau_b2) {
  const double r = commutator_coefficient(tau_b, tau_b2);
  return disjoint_union(scale(spec_a, r), scale(spec_a, -r));
}

Spectrum predict_multi_unitary_sum(const CompactModel& model, const std::vector<std::complex<double>>& beta,
                                   const std::optional<std::vector<double>>& gamma) {
  const std::size_t k = model.k();
  if (beta.size() != k || (gamma && gamma->size() != k)) throw DimensionError("need one beta (and gamma) per a_i");
  if (!gamma) {
    // Rank-one B' = (conj(beta_i) beta_j): eigenvalues of sum |beta_i|^2 a_i.
    const Eigen::Index N = model.N();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(N, N);
    for (std::size_t i = 0; i < k; ++i) acc += std::norm(beta[i]) * model.a_mats[i];
    return hermitian_eigenvalues((acc + acc.adjoint()) * 0.5);
  }
  Eigen::MatrixXcd b(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = i == j ? std::complex<double>((*gamma)[i])
                                                                             : std::conj(beta[i]) * beta[j];
  return predict_sum_conj_b(model, BStats::from_beta2(b, beta));
}

Spectrum predict_multi_unitary_disjoint(const std::vector<Spectrum>& spec_list, const std::vector<double>& gamma) {
  if (spec_list.size() != gamma.size()) throw DimensionError("need one gamma per spectrum");
  Spectrum out;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (gamma[i] < 0) throw DomainError("gamma_i = lim tr(B_i* B_i) cannot be negative");
    out = disjoint_union(out, scale(spec_list[i], gamma[i]));
  }
  return out;
}

std::vector<std::complex<double>> moment_oracle(const Polynomial& poly, const MomentFunctional& omega,
                                                const MomentFunctional& tau, int l_max, std::size_t budget) {
  for (const auto& [c, w] : poly.terms)
    if (!contains_family(w, Family::A))
      throw DomainError("every monomial needs an A-letter, offending word: " + to_string(w));
  const std::size_t t = poly.terms.size();
  std::size_t total = 0, count = 1;
  for (int l = 1; l <= l_max; ++l) {
    if (count > budget / std::max<std::size_t>(t, 1)) throw CapacityError("moment oracle expansion exceeds budget");
    count *= t;
    total += count;
    if (total > budget)
      throw CapacityError("moment oracle expansion of " + std::to_string(total) + " words exceeds budget " +
                          std::to_string(budget));
  }
  std::vector<std::complex<double>> out;
  Polynomial power = Polynomial::word({});
  for (int l = 1; l <= l_max; ++l) {
    power = power * poly;
    out.push_back(cyclic_monotone_moment(power, omega, tau));
  }
  return out;
}

BLaw marchenko_pastur_law(double entry_variance) {
  const double s = entry_variance / 2.0;
  return {"marchenko_pastur", s, 2.0 * s * s, marchenko_pastur_tau(s)};
}

BLaw semicircle_law() { return {"semicircle", 0.0, 1.0, semicircle_tau(1.0)}; }

nlohmann::json prediction_to_json(const std::string& model, const nlohmann::json& params, const Spectrum& spectrum,
                                  int moment_count) {
  spectrum.validate();
  std::vector<double> moments;
  for (int p = 1; p <= moment_count; ++p) moments.push_back(moment(spectrum, p));
  return {{"model", model}, {"params", params}, {"spectrum", to_json(spectrum)}, {"moments", moments}};
}

}  // namespace cmrm
