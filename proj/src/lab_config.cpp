#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "cmrm/error.hpp"
#include "cmrm/lab.hpp"

namespace cmrm::lab {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::moments: return "moments";
    case ExperimentKind::spectrum: return "spectrum";
    case ExperimentKind::decay: return "decay";
    case ExperimentKind::tau_prime: return "tau_prime";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "moments") return ExperimentKind::moments;
  if (s == "spectrum") return ExperimentKind::spectrum;
  if (s == "decay") return ExperimentKind::decay;
  if (s == "tau_prime" || s == "tau-prime") return ExperimentKind::tau_prime;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

int ExperimentConfig::generator_index(const std::string& name) const {
  for (std::size_t i = 0; i < generators.size(); ++i)
    if (generators[i].name == name) return static_cast<int>(i);
  throw ConfigError("unknown generator '" + name + "'");
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

Family family_from_string(const std::string& s) {
  if (s == "A" || s == "a") return Family::A;
  if (s == "B" || s == "b") return Family::B;
  throw ConfigError("family must be \"A\" or \"B\", got '" + s + "'");
}

}  // namespace

ModelPolynomial ExperimentConfig::parse_polynomial(const std::string& text) const {
  ModelPolynomial poly;
  std::size_t i = 0;
  double sign = 1.0;
  Monomial cur;
  bool have_factor = false;
  auto flush = [&] {
    if (!have_factor) throw ConfigError("empty term in polynomial \"" + text + "\"");
    cur.coef *= sign;
    poly.push_back(cur);
    cur = Monomial{};
    have_factor = false;
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '+' || c == '-') {
      if (have_factor) flush();
      else if (!poly.empty() || cur.coef != 1.0) throw ConfigError("dangling sign in polynomial \"" + text + "\"");
      sign = c == '-' ? -1.0 : 1.0;
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = i;
      while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.' || text[i] == 'e' ||
                                 ((text[i] == '-' || text[i] == '+') && text[i - 1] == 'e')))
        ++i;
      double v = 0;
      try {
        v = std::stod(text.substr(start, i - start));
      } catch (const std::exception&) {
        throw ConfigError("bad number in polynomial \"" + text + "\"");
      }
      std::complex<double> z = v;
      if (i < text.size() && text[i] == 'i' && (i + 1 == text.size() || !ident_char(text[i + 1]))) {
        z = {0.0, v};
        ++i;
      }
      cur.coef *= z;
    } else if (ident_start(c)) {
      std::size_t start = i;
      while (i < text.size() && ident_char(text[i])) ++i;
      std::string name = text.substr(start, i - start);
      bool star = false;
      if (i < text.size() && text[i] == '*') {
        star = true;
        ++i;
      }
      if (name == "i") {
        if (star) throw ConfigError("the imaginary unit cannot be starred");
        cur.coef *= std::complex<double>(0.0, 1.0);
      } else {
        cur.factors.emplace_back(generator_index(name), star);
        have_factor = true;
      }
    } else {
      throw ConfigError("unexpected character '" + std::string(1, c) + "' in polynomial \"" + text + "\"");
    }
  }
  flush();
  return poly;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (n_list.empty()) throw ConfigError("n_list must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw ConfigError("dimensions must be positive");
    if (i && n_list[i] <= n_list[i - 1]) throw ConfigError("n_list must be strictly increasing");
  }
  if (generators.empty()) throw ConfigError("no generators declared");
  std::set<std::string> names;
  for (const auto& g : generators) {
    if (g.name.empty() || !ident_start(g.name[0]) ||
        !std::all_of(g.name.begin(), g.name.end(), ident_char) || g.name == "i")
      throw ConfigError("invalid generator name '" + g.name + "'");
    if (!names.insert(g.name).second) throw ConfigError("duplicate generator '" + g.name + "'");
  }
  for (const auto& g : generators) {
    if (!g.rotate.empty()) {
      const auto& u = generators[static_cast<std::size_t>(generator_index(g.rotate))];
      if (u.kind != EnsembleKind::haar_unitary)
        throw ConfigError("generator '" + g.name + "' is rotated by '" + g.rotate + "', which is not haar_unitary");
      if (g.kind == EnsembleKind::haar_unitary) throw ConfigError("haar_unitary generators cannot be rotated");
    }
    if (g.kind == EnsembleKind::fixed) {
      if (g.payload.size() == 0) throw ConfigError("fixed generator '" + g.name + "' needs a payload");
      for (long n : n_list)
        if (n != g.payload.rows())
          throw ConfigError("fixed generator '" + g.name + "' has dimension " + std::to_string(g.payload.rows()) +
                            " but n_list contains " + std::to_string(n));
    }
    if ((g.kind == EnsembleKind::ginibre || g.kind == EnsembleKind::wishart) && !(g.entry_variance > 0))
      throw ConfigError("entry_variance must be positive for '" + g.name + "'");
  }

  auto family_of = [&](int idx) { return generators[static_cast<std::size_t>(idx)].family; };
  switch (experiment) {
    case ExperimentKind::moments:
      if (words.empty()) throw ConfigError("moments experiment needs a word list");
      for (const auto& w : words) {
        auto p = parse_polynomial(w);
        if (p.size() != 1 || p[0].coef != 1.0) throw ConfigError("moment words must be single monomials: \"" + w + "\"");
        bool has_a = false, has_b = false;
        for (auto [g, s] : p[0].factors) (family_of(g) == Family::A ? has_a : has_b) = true;
        if (!has_a || !has_b) throw ConfigError("word \"" + w + "\" does not alternate between A and B generators");
      }
      break;
    case ExperimentKind::spectrum: {
      if (model.empty()) throw ConfigError("spectrum experiment needs a model polynomial");
      parse_polynomial(model);
      const auto& pr = predictor;
      static const std::set<std::string> known{"none", "anticommutator", "commutator", "sum_conj_b", "sum_a_b_astar",
                                               "multi_unitary_disjoint"};
      if (!known.count(pr.name)) throw ConfigError("unknown predictor '" + pr.name + "'");
      for (const auto& a : pr.a)
        if (generators[static_cast<std::size_t>(generator_index(a))].family != Family::A)
          throw ConfigError("predictor argument '" + a + "' must be an A generator");
      for (const auto& b : pr.b)
        if (generators[static_cast<std::size_t>(generator_index(b))].family != Family::B)
          throw ConfigError("predictor argument '" + b + "' must be a B generator");
      if ((pr.name == "anticommutator" || pr.name == "commutator") && (pr.a.size() != 1 || pr.b.size() != 1))
        throw ConfigError("predictor '" + pr.name + "' takes exactly one a and one b");
      if ((pr.name == "sum_conj_b" || pr.name == "sum_a_b_astar") && (pr.a.empty() || pr.a.size() != pr.b.size()))
        throw ConfigError("predictor '" + pr.name + "' needs matching a and b lists");
      if (pr.name == "multi_unitary_disjoint" && (pr.a.empty() || (!pr.gamma.empty() && pr.gamma.size() != pr.a.size())))
        throw ConfigError("predictor 'multi_unitary_disjoint' needs a list of a and optionally one gamma per a");
      if (pr.b_stats != "theory" && pr.b_stats != "empirical") throw ConfigError("b_stats must be theory or empirical");
      break;
    }
    case ExperimentKind::decay:
      if (model.empty()) throw ConfigError("decay study needs a model polynomial");
      parse_polynomial(model);
      if (n_list.size() < 4) throw ConfigError("decay study needs at least 4 dimensions");
      if (n_list.back() < 8 * n_list.front()) throw ConfigError("decay study needs n_list spanning a factor of 8");
      if (trials < 200) throw ConfigError("decay study needs at least 200 trials per n");
      break;
    case ExperimentKind::tau_prime:
      if (model.empty()) throw ConfigError("tau-prime study needs a model polynomial");
      for (const auto& m : parse_polynomial(model)) {
        bool has_a = std::any_of(m.factors.begin(), m.factors.end(),
                                 [&](const auto& f) { return family_of(f.first) == Family::A; });
        if (!has_a) throw ConfigError("every monomial of a tau-prime polynomial needs an A generator");
      }
      break;
  }
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    c.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
    c.id = j.value("id", to_string(c.experiment));
    c.model = j.value("model", std::string());
    c.words = j.value("words", std::vector<std::string>{});
    for (const auto& [name, g] : j.at("generators").items()) {
      GeneratorSpec s;
      s.name = name;
      s.kind = ensemble_kind_from_string(g.at("kind").get<std::string>());
      if (g.contains("n")) s.n = g.at("n").get<long>();
      s.entry_variance = g.value("entry_variance", s.kind == EnsembleKind::wishart ? 2.0 : 1.0);
      const bool a_default = s.kind == EnsembleKind::dyadic_diag || s.kind == EnsembleKind::fixed;
      s.family = family_from_string(g.value("family", std::string(a_default ? "A" : "B")));
      s.rotate = g.value("rotate", std::string());
      s.resample = g.value("resample", true);
      if (g.contains("payload")) {
        s.payload = matrix_from_json(g.at("payload"));
        if (s.n && *s.n != s.payload.rows()) throw ConfigError("payload size differs from n for '" + name + "'");
      }
      c.generators.push_back(std::move(s));
    }
    if (j.contains("predictor")) {
      const auto& p = j.at("predictor");
      c.predictor.name = p.value("name", std::string("none"));
      auto list = [&](const char* key) {
        std::vector<std::string> out;
        if (!p.contains(key)) return out;
        if (p.at(key).is_string()) out.push_back(p.at(key).get<std::string>());
        else out = p.at(key).get<std::vector<std::string>>();
        return out;
      };
      c.predictor.a = list("a");
      c.predictor.b = list("b");
      c.predictor.gamma = p.value("gamma", std::vector<double>{});
      c.predictor.b_stats = p.value("b_stats", std::string("theory"));
    }
    c.n_list = j.at("n_list").get<std::vector<long>>();
    c.trials = j.value("trials", 1);
    c.seed = j.value("seed", std::uint64_t{0});
    c.out = j.value("out", std::string());
    c.top = j.value("top", 10);
    c.moment_orders = j.value("moment_orders", 6);
    c.threads = j.value("threads", 0);
    if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json gens = nlohmann::json::object();
  for (const auto& g : c.generators) {
    nlohmann::json o{{"kind", to_string(g.kind)},
                     {"entry_variance", g.entry_variance},
                     {"family", g.family == Family::A ? "A" : "B"},
                     {"resample", g.resample}};
    if (g.n) o["n"] = *g.n;
    if (!g.rotate.empty()) o["rotate"] = g.rotate;
    if (g.payload.size()) o["payload"] = matrix_to_json(g.payload);
    gens[g.name] = o;
  }
  nlohmann::json j{{"experiment", to_string(c.experiment)},
                   {"id", c.id},
                   {"generators", gens},
                   {"n_list", c.n_list},
                   {"trials", c.trials},
                   {"seed", c.seed},
                   {"top", c.top},
                   {"moment_orders", c.moment_orders}};
  if (!c.model.empty()) j["model"] = c.model;
  if (!c.words.empty()) j["words"] = c.words;
  if (c.predictor.name != "none")
    j["predictor"] = {{"name", c.predictor.name},
                      {"a", c.predictor.a},
                      {"b", c.predictor.b},
                      {"gamma", c.predictor.gamma},
                      {"b_stats", c.predictor.b_stats}};
  if (!c.tolerances.empty()) j["tolerances"] = c.tolerances;
  if (!c.out.empty()) j["out"] = c.out;
  return j;
}

nlohmann::json ResultRecord::to_json(bool include_wall_clock) const {
  nlohmann::json j = data;
  if (include_wall_clock) j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

}  // namespace cmrm::lab
