#include "cmrm/error.hpp"
#include "cmrm/lab.hpp"

namespace cmrm::lab {

namespace {

GeneratorSpec gen(const std::string& name, EnsembleKind kind, Family family, const std::string& rotate = "") {
  GeneratorSpec g;
  g.name = name;
  g.kind = kind;
  g.family = family;
  g.rotate = rotate;
  g.entry_variance = kind == EnsembleKind::wishart ? 2.0 : 1.0;
  return g;
}

ExperimentConfig example3(const std::string& id, const std::string& model, const std::string& predictor) {
  ExperimentConfig c;
  c.experiment = ExperimentKind::spectrum;
  c.id = id;
  c.model = model;
  c.generators = {gen("D", EnsembleKind::dyadic_diag, Family::A, "U"), gen("U", EnsembleKind::haar_unitary, Family::B),
                  gen("X", EnsembleKind::wishart, Family::B)};
  c.predictor.name = predictor;
  c.predictor.a = {"D"};
  c.predictor.b = {"X"};
  c.n_list = {300};
  c.trials = 10;
  c.seed = 7;
  c.top = 10;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"anticommutator", "commutator", "fig5", "multi_unitary_disjoint", "table1", "decay", "trivial", "tau_prime"};
}

ExperimentConfig preset(const std::string& name, int k) {
  ExperimentConfig c;
  if (name == "anticommutator") {
    c = example3(name, "D X + X D", "anticommutator");
  } else if (name == "commutator") {
    c = example3(name, "i D X - i X D", "commutator");
  } else if (name == "fig5" || name == "multi_unitary_disjoint") {
    if (k < 1) throw ConfigError("fig5 preset needs k >= 1");
    c.experiment = ExperimentKind::spectrum;
    c.id = "fig5_k" + std::to_string(k);
    c.generators.push_back(gen("D0", EnsembleKind::dyadic_diag, Family::A));
    c.model = "D0";
    c.predictor.name = "multi_unitary_disjoint";
    c.predictor.a = {"D0"};
    for (int i = 1; i <= k; ++i) {
      const std::string u = "U" + std::to_string(i), d = "D" + std::to_string(i);
      c.generators.push_back(gen(u, EnsembleKind::haar_unitary, Family::B));
      c.generators.push_back(gen(d, EnsembleKind::dyadic_diag, Family::A, u));
      c.model += " + " + d;
      c.predictor.a.push_back(d);
    }
    c.n_list = {1000};
    c.trials = 3;
    c.seed = 5;
    c.top = 14;
  } else if (name == "table1") {
    c.experiment = ExperimentKind::moments;
    c.id = name;
    c.generators = {gen("D", EnsembleKind::dyadic_diag, Family::A), gen("X1", EnsembleKind::wishart, Family::B),
                    gen("X2", EnsembleKind::wishart, Family::B), gen("X3", EnsembleKind::wishart, Family::B)};
    c.words = {"D X1", "D X1 D", "D X1 D X2", "D X1 D X2 D", "D X1 D X2 D X3"};
    c.n_list = {125, 250, 500};
    c.trials = 20;
    c.seed = 11;
  } else if (name == "decay") {
    c.experiment = ExperimentKind::decay;
    c.id = name;
    c.generators = {gen("D", EnsembleKind::dyadic_diag, Family::A), gen("U", EnsembleKind::haar_unitary, Family::B),
                    gen("X", EnsembleKind::wishart, Family::B, "U")};
    c.model = "D X";
    c.n_list = {64, 128, 256, 512};
    c.trials = 500;
    c.seed = 13;
  } else if (name == "trivial") {
    c.experiment = ExperimentKind::tau_prime;
    c.id = name;
    c.generators = {gen("D1", EnsembleKind::dyadic_diag, Family::A, "U1"),
                    gen("D2", EnsembleKind::dyadic_diag, Family::A, "U2"),
                    gen("U1", EnsembleKind::haar_unitary, Family::B), gen("U2", EnsembleKind::haar_unitary, Family::B),
                    gen("X", EnsembleKind::wishart, Family::B)};
    c.model = "D1 X D2 X";
    c.n_list = {64, 128, 256, 512};
    c.trials = 20;
    c.seed = 17;
  } else if (name == "tau_prime" || name == "tau-prime") {
    c.experiment = ExperimentKind::tau_prime;
    c.id = "tau_prime";
    c.generators = {gen("D", EnsembleKind::dyadic_diag, Family::A), gen("U", EnsembleKind::haar_unitary, Family::B),
                    gen("X", EnsembleKind::wishart, Family::B, "U")};
    c.model = "D X";
    c.n_list = {64, 128, 256, 512};
    c.trials = 20;
    c.seed = 19;
  } else {
    throw ConfigError("unknown model preset '" + name + "'");
  }
  c.validate();
  return c;
}

}  // namespace cmrm::lab
