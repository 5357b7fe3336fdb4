#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cmrm/word.hpp"

namespace cmrm {

using Complex = std::complex<double>;

/// A moment map on words of a single family. For B it should be unital; A plays the
/// role of the (possibly unbounded) weight and is never evaluated on the empty word.
struct MomentFunctional {
  Family family = Family::A;
  std::string name;
  std::function<Complex(const Word&)> eval;

  Complex operator()(const Word& w) const { return eval(w); }
};

/// Trace model on concrete matrices: letter index i maps to mats[i].
/// Family A uses the unnormalized trace Tr, family B the normalized trace tr.
MomentFunctional matrix_functional(Family f, std::vector<Eigen::MatrixXcd> mats, std::string name = "matrix");

/// Single self-adjoint generator with moments phi(x^m) = moments(m); stars are ignored.
MomentFunctional power_functional(Family f, std::function<Complex(int)> moments, std::string name);

/// omega(a^m) = sum_{i>=1} 2^{-im} = 1/(2^m - 1) for the dyadic diagonal.
MomentFunctional dyadic_omega();
/// Marchenko-Pastur with ratio 1 and mean s: tau(b^m) = s^m Cat_m.
MomentFunctional marchenko_pastur_tau(double mean = 1.0);
/// Semicircle with variance v: tau(b^{2m}) = v^m Cat_m, odd moments 0.
MomentFunctional semicircle_tau(double variance = 1.0);
/// Haar unitary u (letter b, u* = starred): tau = [#u == #u*].
MomentFunctional haar_unitary_tau();
/// Free product over B groups: groups[g] evaluates words whose letters all have group g.
MomentFunctional free_product(std::vector<MomentFunctional> groups);
/// Thread-safe memo keyed by the word itself.
MomentFunctional memoized(MomentFunctional f);

/// (omega |> tau)(w): A-runs multiplied under omega, interior B-runs under tau,
/// leading and trailing B-runs merged as tau(b_0 b_n).
Complex cyclic_monotone_moment(const Word& w, const MomentFunctional& omega, const MomentFunctional& tau);
Complex cyclic_monotone_moment(const Polynomial& p, const MomentFunctional& omega, const MomentFunctional& tau);

struct GramReport {
  Eigen::MatrixXcd gram;
  double min_eigenvalue = 0.0;
  bool pass = false;
};

/// M_xy = (omega |> tau)(x* y) and its smallest eigenvalue.
GramReport gram_psd_check(const MomentFunctional& omega, const MomentFunctional& tau, const std::vector<Word>& basis,
                          double tol = 1e-10);

struct TracialityReport {
  double max_deviation = 0.0;
  bool pass = false;
};

TracialityReport traciality_check(const MomentFunctional& omega, const MomentFunctional& tau,
                                  const std::vector<std::pair<Word, Word>>& pairs, double tol = 1e-10);

/// All words of length 1..max_len over the given letters that contain an A-letter.
std::vector<Word> words_with_a(const std::vector<Letter>& alphabet, int max_len);

}  // namespace cmrm
