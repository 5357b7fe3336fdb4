#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cmrm/error.hpp"
#include "cmrm/lab.hpp"
#include "cmrm/weingarten.hpp"

namespace cmrm::lab {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitSelftest = 4;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

std::string with_suffix(const std::string& path, const std::string& suffix, const std::string& ext) {
  std::filesystem::path p(path);
  auto stem = p.parent_path() / p.stem();
  return stem.string() + suffix + ext;
}

struct RunOptions {
  std::string config;
  std::string model;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::vector<long> n;
  std::string out;
  std::string format = "json";
  int k = 3;
  std::optional<int> threads;
};

void emit(const ResultRecord& rec, const RunOptions& o) {
  if (o.format == "csv") {
    if (o.out.empty()) {
      std::cout << record_csv(rec);
      return;
    }
    auto tables = spectrum_csv(rec);
    if (tables.size() > 1) {
      for (const auto& [n, t] : tables) write_text(with_suffix(o.out, "_n" + std::to_string(n), ".csv"), t);
    } else {
      write_text(o.out, record_csv(rec));
    }
    return;
  }
  const std::string json = rec.to_json().dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << json;
    return;
  }
  write_text(o.out, json);
  auto tables = spectrum_csv(rec);
  if (tables.size() > 1) {
    for (const auto& [n, t] : tables) write_text(with_suffix(o.out, "_n" + std::to_string(n), ".csv"), t);
  } else {
    write_text(with_suffix(o.out, "", ".csv"), record_csv(rec));
  }
}

int run_subcommand(ExperimentKind kind, const std::string& default_preset, RunOptions o) {
  ExperimentConfig c = !o.config.empty() ? load_config(o.config) : preset(o.model.empty() ? default_preset : o.model, o.k);
  if (c.experiment != kind)
    throw ConfigError("configuration describes a '" + to_string(c.experiment) + "' experiment, not '" +
                      to_string(kind) + "'");
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (!o.n.empty()) c.n_list = o.n;
  if (o.threads) c.threads = *o.threads;
  if (o.out.empty()) o.out = c.out;
  c.out = o.out;
  c.validate();
  emit(run_experiment(c), o);
  return kExitOk;
}

void add_run_options(CLI::App* sub, RunOptions& o) {
  sub->add_option("--config", o.config, "Experiment config file (JSON)");
  sub->add_option("--model", o.model, "Preset model name");
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--trials", o.trials, "Trials per dimension");
  sub->add_option("--n", o.n, "Dimension list override");
  sub->add_option("--out", o.out, "Output path");
  sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--k", o.k, "Number of unitaries for the fig5 preset");
  sub->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Weingarten calculus, cyclic monotone moments and discrete spectra of random matrix polynomials"};
  app.require_subcommand(1);

  int wg_k = 2;
  long wg_n = 2;
  std::string wg_out, wg_format = "csv";
  auto* wg = app.add_subcommand("wg-table", "Exact Weingarten values by cycle type");
  wg->add_option("--k", wg_k, "Degree of the symmetric group")->required();
  wg->add_option("--n", wg_n, "Matrix dimension")->required();
  wg->add_option("--out", wg_out, "Output path");
  wg->add_option("--format", wg_format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  RunOptions mo, so, de, tp;
  auto* moments = app.add_subcommand("moments", "Empirical versus factorized mixed moments");
  add_run_options(moments, mo);
  auto* spectrum = app.add_subcommand("spectrum", "Empirical versus predicted spectra");
  add_run_options(spectrum, so);
  auto* decay = app.add_subcommand("decay", "Variance and fourth-moment decay rates");
  add_run_options(decay, de);
  auto* tau = app.add_subcommand("tau-prime", "First-order trace corrections");
  add_run_options(tau, tp);
  auto* selftest = app.add_subcommand("selftest", "Exact identity suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (wg->parsed()) {
      WeingartenTable table(wg_k, wg_n);
      std::string text;
      if (wg_format == "csv") {
        text = table.to_csv();
      } else {
        nlohmann::json rows = nlohmann::json::array();
        for (auto it = table.values().rbegin(); it != table.values().rend(); ++it)
          rows.push_back({{"cycle_type", it->first},
                          {"numerator", numerator(it->second).str()},
                          {"denominator", denominator(it->second).str()}});
        text = nlohmann::json{{"k", wg_k}, {"n", wg_n}, {"values", rows}}.dump(2) + "\n";
      }
      if (wg_out.empty()) std::cout << text;
      else write_text(wg_out, text);
      return kExitOk;
    }
    if (moments->parsed()) return run_subcommand(ExperimentKind::moments, "table1", mo);
    if (spectrum->parsed()) return run_subcommand(ExperimentKind::spectrum, "anticommutator", so);
    if (decay->parsed()) return run_subcommand(ExperimentKind::decay, "decay", de);
    if (tau->parsed()) return run_subcommand(ExperimentKind::tau_prime, "tau_prime", tp);
    if (selftest->parsed()) {
      auto rep = run_selftest();
      for (const auto& l : rep.lines) std::cout << l << '\n';
      return rep.pass ? kExitOk : kExitSelftest;
    }
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitConfig;
}

}  // namespace cmrm::lab
