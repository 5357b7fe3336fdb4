#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "cmrm/ncms.hpp"
#include "cmrm/rmt.hpp"
#include "cmrm/spectra.hpp"

namespace cmrm::lab {

enum class ExperimentKind { moments, spectrum, decay, tau_prime };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct GeneratorSpec {
  std::string name;
  EnsembleKind kind = EnsembleKind::ginibre;
  std::optional<long> n;  // only meaningful for fixed payloads
  double entry_variance = 1.0;
  Family family = Family::B;
  std::string rotate;  // name of a haar_unitary generator: use U M U*
  bool resample = true;
  Eigen::MatrixXcd payload;
};

struct PredictorSpec {
  std::string name = "none";  // none | anticommutator | commutator | sum_conj_b | sum_a_b_astar | multi_unitary_disjoint
  std::vector<std::string> a;
  std::vector<std::string> b;
  std::vector<double> gamma;
  std::string b_stats = "theory";  // theory | empirical
};

/// One monomial of a model polynomial: coefficient and (generator index, starred) factors.
struct Monomial {
  std::complex<double> coef = 1.0;
  std::vector<std::pair<int, bool>> factors;
};
using ModelPolynomial = std::vector<Monomial>;

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::spectrum;
  std::string id = "experiment";
  std::string model;
  std::vector<std::string> words;
  std::vector<GeneratorSpec> generators;
  PredictorSpec predictor;
  std::vector<long> n_list;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out;
  int top = 10;
  int moment_orders = 6;
  int threads = 0;
  std::map<std::string, double> tolerances;

  int generator_index(const std::string& name) const;
  /// Parse a polynomial over generator names, e.g. "i D X - i X D" or "D + U D U*".
  ModelPolynomial parse_polynomial(const std::string& text) const;
  /// Throws ConfigError on inconsistencies.
  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

struct ResultRecord {
  nlohmann::json data;  // everything except the wall clock
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json(bool include_wall_clock = true) const;
};

ResultRecord run_moment_table(const ExperimentConfig& config);
ResultRecord run_spectrum_experiment(const ExperimentConfig& config);
ResultRecord run_decay_study(const ExperimentConfig& config);
ResultRecord run_tau_prime_study(const ExperimentConfig& config);
ResultRecord run_experiment(const ExperimentConfig& config);

/// CSV rendering of a record; spectrum records give one table per n, keyed by n.
std::map<long, std::string> spectrum_csv(const ResultRecord& r);
std::string record_csv(const ResultRecord& r);

/// Named preset configurations: anticommutator, commutator, fig5 (alias
/// multi_unitary_disjoint), table1, decay, trivial, tau_prime.
ExperimentConfig preset(const std::string& name, int k = 3);
std::vector<std::string> preset_names();

struct SelftestReport {
  bool pass = true;
  std::vector<std::string> lines;
};
SelftestReport run_selftest();

int cli_main(int argc, char** argv);

}  // namespace cmrm::lab
