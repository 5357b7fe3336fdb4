#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace cmrm {

inline constexpr double kDefaultZeroTolerance = 1e-10;
inline constexpr int kDefaultMetricTerms = 64;

/// Properly arranged eigenvalue multiset. Both parts carry an implicit zero tail.
/// pos is nonincreasing and > 0, neg is nondecreasing (largest magnitude first) and < 0.
struct Spectrum {
  std::vector<double> pos;
  std::vector<double> neg;

  bool empty() const { return pos.empty() && neg.empty(); }
  std::size_t size() const { return pos.size() + neg.size(); }
  /// i-th entry (0-based) of a part, zero past the stored length.
  double pos_at(std::size_t i) const { return i < pos.size() ? pos[i] : 0.0; }
  double neg_at(std::size_t i) const { return i < neg.size() ? neg[i] : 0.0; }
  /// Merged sequence by nonincreasing |value|, ties positive first.
  std::vector<double> arranged() const;
  /// Throws DomainError if the type invariants are violated.
  void validate() const;

  friend bool operator==(const Spectrum&, const Spectrum&) = default;
};

Spectrum properly_arrange(const std::vector<double>& values, double zero_tolerance = kDefaultZeroTolerance);
Spectrum disjoint_union(const Spectrum& s, const Spectrum& t);
Spectrum scale(const Spectrum& s, double c);
double metric_d(const Spectrum& s, const Spectrum& t, int terms = kDefaultMetricTerms);
/// Sum of signed p-th powers.
double moment(const Spectrum& s, int p);
/// Schatten p-norm (sum |lambda|^p)^{1/p}.
double schatten_norm(const Spectrum& s, int p);

nlohmann::json to_json(const Spectrum& s);
Spectrum spectrum_from_json(const nlohmann::json& j);
/// Rows "rank,value,sign_part" with 1-based ranks within each part.
std::string to_csv(const Spectrum& s);

}  // namespace cmrm
