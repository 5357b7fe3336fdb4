#include "cmrm/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "cmrm/error.hpp"

namespace cmrm {

std::vector<double> Spectrum::arranged() const {
  std::vector<double> out;
  out.reserve(size());
  std::size_t i = 0, j = 0;
  while (i < pos.size() || j < neg.size()) {
    if (j == neg.size() || (i < pos.size() && pos[i] >= -neg[j]))
      out.push_back(pos[i++]);
    else
      out.push_back(neg[j++]);
  }
  return out;
}

void Spectrum::validate() const {
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (!(pos[i] > 0.0) || !std::isfinite(pos[i])) throw DomainError("positive part holds a non-positive or non-finite value");
    if (i && pos[i] > pos[i - 1]) throw DomainError("positive part is not nonincreasing");
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    if (!(neg[i] < 0.0) || !std::isfinite(neg[i])) throw DomainError("negative part holds a non-negative or non-finite value");
    if (i && neg[i] < neg[i - 1]) throw DomainError("negative part is not ordered by decreasing magnitude");
  }
}

Spectrum properly_arrange(const std::vector<double>& values, double zero_tolerance) {
  Spectrum s;
  for (double v : values) {
    if (std::isnan(v)) throw DomainError("NaN eigenvalue");
    if (std::abs(v) <= zero_tolerance) continue;
    (v > 0 ? s.pos : s.neg).push_back(v);
  }
  std::sort(s.pos.begin(), s.pos.end(), std::greater<>());
  std::sort(s.neg.begin(), s.neg.end());
  return s;
}

Spectrum disjoint_union(const Spectrum& s, const Spectrum& t) {
  Spectrum u;
  u.pos.resize(s.pos.size() + t.pos.size());
  std::merge(s.pos.begin(), s.pos.end(), t.pos.begin(), t.pos.end(), u.pos.begin(), std::greater<>());
  u.neg.resize(s.neg.size() + t.neg.size());
  std::merge(s.neg.begin(), s.neg.end(), t.neg.begin(), t.neg.end(), u.neg.begin());
  return u;
}

Spectrum scale(const Spectrum& s, double c) {
  Spectrum out;
  if (c == 0.0) return out;
  auto mul = [c](std::vector<double> v) {
    for (double& x : v) x *= c;
    return v;
  };
  if (c > 0) {
    out.pos = mul(s.pos);
    out.neg = mul(s.neg);
  } else {
    out.pos = mul(s.neg);
    out.neg = mul(s.pos);
  }
  // Underflow to zero drops out of the parts.
  std::erase(out.pos, 0.0);
  std::erase(out.neg, 0.0);
  return out;
}

double metric_d(const Spectrum& s, const Spectrum& t, int terms) {
  if (terms < 1) throw DomainError("metric_d needs at least one term");
  double acc = 0.0, w = 1.0;
  for (int i = 0; i < terms; ++i) {
    w *= 0.5;
    auto idx = static_cast<std::size_t>(i);
    double dp = std::abs(s.pos_at(idx) - t.pos_at(idx));
    double dn = std::abs(s.neg_at(idx) - t.neg_at(idx));
    acc += w * (dp / (1.0 + dp) + dn / (1.0 + dn));
  }
  return acc;
}

double moment(const Spectrum& s, int p) {
  if (p < 1) throw DomainError("moment order must be positive");
  double acc = 0.0;
  for (double v : s.pos) acc += std::pow(v, p);
  for (double v : s.neg) acc += std::pow(v, p);
  return acc;
}

double schatten_norm(const Spectrum& s, int p) {
  if (p < 1) throw DomainError("norm order must be positive");
  double acc = 0.0;
  for (double v : s.pos) acc += std::pow(v, p);
  for (double v : s.neg) acc += std::pow(-v, p);
  return std::pow(acc, 1.0 / p);
}

nlohmann::json to_json(const Spectrum& s) { return {{"pos", s.pos}, {"neg", s.neg}}; }

Spectrum spectrum_from_json(const nlohmann::json& j) {
  Spectrum s;
  s.pos = j.at("pos").get<std::vector<double>>();
  s.neg = j.at("neg").get<std::vector<double>>();
  s.validate();
  return s;
}

std::string to_csv(const Spectrum& s) {
  std::ostringstream os;
  os.precision(17);
  os << "rank,value,sign_part\n";
  for (std::size_t i = 0; i < s.pos.size(); ++i) os << i + 1 << ',' << s.pos[i] << ",pos\n";
  for (std::size_t i = 0; i < s.neg.size(); ++i) os << i + 1 << ',' << s.neg[i] << ",neg\n";
  return os.str();
}

}  // namespace cmrm
