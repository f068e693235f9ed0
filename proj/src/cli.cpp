#include "discfdr/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "discfdr/errors.hpp"
#include "discfdr/estimator.hpp"
#include "discfdr/exact_tests.hpp"
#include "discfdr/io.hpp"
#include "discfdr/procedures.hpp"
#include "discfdr/simulate.hpp"
#include "json.hpp"

namespace discfdr {

namespace {

using nlohmann::json;

// JSON forbids non-finite numbers; degenerate entries become strings.
json json_num(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

std::vector<double> parse_tau_list(const std::string& text) {
  std::vector<double> taus;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string piece = text.substr(start, comma - start);
    double v = 0.0;
    const char* begin = piece.data();
    const char* end = begin + piece.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (piece.empty() || ec != std::errc{} || ptr != end)
      throw config_error("cannot parse tuning value '" + piece +
                         "' in --taus");
    taus.push_back(v);
    start = comma + 1;
  }
  return taus;
}

// Everything a subcommand runs with after merging config file and flags
// (flags win). Echoed verbatim into every report.
struct Effective {
  std::string subcommand;
  std::string input;
  std::string out;            // empty = stdout
  std::string format = "csv"; // csv | json
  std::string procedure = "bh";
  std::string study = "fdr";  // simulate: fdr | bias | condition2
  double alpha = 0.05;
  double storey_tau = 0.5;
  std::vector<double> taus;   // empty = default grid
  SimScenario scenario;
  bool have_scenario = false;
};

// Raw flag values plus their CLI option handles (to detect "was set").
struct Flags {
  std::string input, out, format, procedure, margin_mode, config, taus_text;
  double alpha = 0.05, pi0 = 1.0, effect = 1.0;
  std::uint64_t seed = 1;
  std::size_t reps = 0;
  CLI::Option* o_input = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_format = nullptr;
  CLI::Option* o_procedure = nullptr;
  CLI::Option* o_margin_mode = nullptr;
  CLI::Option* o_taus = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_pi0 = nullptr;
  CLI::Option* o_effect = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_reps = nullptr;
};

template <typename T>
T json_get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw config_error("config key '" + key + "' has the wrong type");
  }
}

SimScenario scenario_from_json(const json& j) {
  SimScenario sc;
  for (const auto& [key, value] : j.items()) {
    if (key == "m") sc.m = json_get<std::size_t>(value, key);
    else if (key == "pi0") sc.pi0 = json_get<double>(value, key);
    else if (key == "n1") sc.n1 = json_get<int>(value, key);
    else if (key == "n2") sc.n2 = json_get<int>(value, key);
    else if (key == "psi") sc.psi = json_get<double>(value, key);
    else if (key == "effect_probs") {
      const auto pair = json_get<std::vector<double>>(value, key);
      if (pair.size() != 2)
        throw config_error("config key 'effect_probs' needs two entries");
      sc.effect_probs = {{pair[0], pair[1]}};
    } else if (key == "q_base") sc.q_base = json_get<double>(value, key);
    else if (key == "alpha") sc.alpha = json_get<double>(value, key);
    else if (key == "taus") sc.taus = json_get<std::vector<double>>(value, key);
    else if (key == "reps") sc.reps = json_get<std::size_t>(value, key);
    else if (key == "seed") sc.seed = json_get<std::uint64_t>(value, key);
    else if (key == "margin_mode") {
      const auto mode = json_get<std::string>(value, key);
      if (mode == "fixed") sc.margin_mode = MarginMode::fixed;
      else if (mode == "unconditional")
        sc.margin_mode = MarginMode::unconditional;
      else
        throw config_error("margin_mode must be 'fixed' or 'unconditional'");
    } else if (key == "margins")
      sc.margins = json_get<std::vector<int>>(value, key);
    else if (key == "storey_tau") sc.storey_tau = json_get<double>(value, key);
    else
      throw config_error("unknown scenario key '" + key + "'");
  }
  return sc;
}

json scenario_to_json(const SimScenario& sc) {
  json j;
  j["m"] = sc.m;
  j["pi0"] = sc.pi0;
  j["n1"] = sc.n1;
  j["n2"] = sc.n2;
  j["psi"] = sc.psi;
  if (sc.effect_probs)
    j["effect_probs"] = {sc.effect_probs->first, sc.effect_probs->second};
  j["q_base"] = sc.q_base;
  j["alpha"] = sc.alpha;
  if (!sc.taus.empty()) j["taus"] = sc.taus;
  j["reps"] = sc.reps;
  j["seed"] = sc.seed;
  j["margin_mode"] = to_string(sc.margin_mode);
  if (!sc.margins.empty()) j["margins"] = sc.margins;
  j["storey_tau"] = sc.storey_tau;
  return j;
}

Effective make_effective(const Flags& f, const std::string& subcommand) {
  Effective e;
  e.subcommand = subcommand;

  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw input_error("cannot open config file '" + f.config + "'");
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& ex) {
      throw config_error(std::string("config file: ") + ex.what());
    }
    if (!cfg.is_object()) throw config_error("config file must hold an object");
    for (const auto& [key, value] : cfg.items()) {
      if (key == "input") e.input = json_get<std::string>(value, key);
      else if (key == "out") e.out = json_get<std::string>(value, key);
      else if (key == "format") e.format = json_get<std::string>(value, key);
      else if (key == "procedure")
        e.procedure = json_get<std::string>(value, key);
      else if (key == "study") e.study = json_get<std::string>(value, key);
      else if (key == "alpha") e.alpha = json_get<double>(value, key);
      else if (key == "storey_tau")
        e.storey_tau = json_get<double>(value, key);
      else if (key == "taus")
        e.taus = json_get<std::vector<double>>(value, key);
      else if (key == "scenario") {
        e.scenario = scenario_from_json(value);
        e.have_scenario = true;
      } else
        throw config_error("unknown config key '" + key + "'");
    }
  }

  // Command-line flags override the config file.
  if (f.o_input && f.o_input->count()) e.input = f.input;
  if (f.o_out && f.o_out->count()) e.out = f.out;
  if (f.o_format && f.o_format->count()) e.format = f.format;
  if (f.o_procedure && f.o_procedure->count()) e.procedure = f.procedure;
  if (f.o_alpha && f.o_alpha->count()) e.alpha = f.alpha;
  if (f.o_taus && f.o_taus->count()) e.taus = parse_tau_list(f.taus_text);

  if (subcommand == "simulate") {
    if (f.o_pi0 && f.o_pi0->count()) e.scenario.pi0 = f.pi0;
    if (f.o_effect && f.o_effect->count()) e.scenario.psi = f.effect;
    if (f.o_seed && f.o_seed->count()) e.scenario.seed = f.seed;
    if (f.o_reps && f.o_reps->count()) e.scenario.reps = f.reps;
    if (f.o_margin_mode && f.o_margin_mode->count()) {
      if (f.margin_mode == "fixed") e.scenario.margin_mode = MarginMode::fixed;
      else if (f.margin_mode == "unconditional")
        e.scenario.margin_mode = MarginMode::unconditional;
      else
        throw config_error("--margin-mode must be 'fixed' or 'unconditional'");
    }
    if (f.o_alpha && f.o_alpha->count()) e.scenario.alpha = f.alpha;
    if (f.o_taus && f.o_taus->count()) e.scenario.taus = e.taus;
  }

  if (e.format != "csv" && e.format != "json")
    throw config_error("format must be 'csv' or 'json'");
  if (!(e.alpha > 0.0 && e.alpha < 1.0))
    throw config_error("alpha must lie in (0, 1)");
  if (!(e.storey_tau > 0.0 && e.storey_tau < 1.0))
    throw config_error("storey_tau must lie in (0, 1)");
  return e;
}

json echo_config(const Effective& e) {
  json j;
  j["subcommand"] = e.subcommand;
  j["format"] = e.format;
  if (!e.input.empty()) j["input"] = e.input;
  if (!e.out.empty()) j["out"] = e.out;
  if (e.subcommand == "estimate" || e.subcommand == "analyze") {
    if (e.taus.empty()) j["taus"] = "default";
    else j["taus"] = e.taus;
    j["storey_tau"] = e.storey_tau;
  }
  if (e.subcommand == "analyze") {
    j["alpha"] = e.alpha;
    j["procedure"] = e.procedure;
  }
  if (e.subcommand == "simulate") {
    j["study"] = e.study;
    if (e.study == "fdr") j["procedure"] = e.procedure;
    j["scenario"] = scenario_to_json(e.scenario);
  }
  return j;
}

void emit(const Effective& e, const std::string& text) {
  if (e.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(e.out, std::ios::binary);
  if (!out) throw input_error("cannot open output file '" + e.out + "'");
  out << text;
}

// ---------------------------------------------------------------- support

int cmd_support(const Effective& e) {
  if (e.input.empty()) throw config_error("support requires --input");
  const auto rows = read_count_file(e.input);
  const json cfg = echo_config(e);

  if (e.format == "json") {
    json out;
    out["config"] = cfg;
    out["rows"] = json::array();
    for (const auto& row : rows) {
      const int c = row.counts.total();
      const auto support =
          fet_support(row.counts.n1, row.counts.n2, c).values();
      json r;
      r["id"] = row.id;
      r["c"] = c;
      r["removed"] = c <= 1;
      r["support"] = support;
      out["rows"].push_back(std::move(r));
    }
    emit(e, out.dump(2) + "\n");
    return 0;
  }

  std::ostringstream os;
  os << "# config " << cfg.dump() << "\n";
  os << "id,c,removed,support\n";
  for (const auto& row : rows) {
    const int c = row.counts.total();
    const auto support = fet_support(row.counts.n1, row.counts.n2, c).values();
    os << csv_escape(row.id) << ',' << c << ','
       << (c <= 1 ? "true" : "false") << ',';
    for (std::size_t k = 0; k < support.size(); ++k) {
      if (k) os << ';';
      os << fmt_exact(support[k]);
    }
    os << '\n';
  }
  emit(e, os.str());
  return 0;
}

// ----------------------------------------------------- estimate / analyze

struct AnalysisData {
  std::vector<CountRow> kept;
  std::vector<std::string> removed;
  std::vector<PValueSupport> supports;
  std::vector<double> pvalues;
  double nu = 0.0;
};

AnalysisData load_analysis(const std::string& input) {
  AnalysisData d;
  for (auto& row : read_count_file(input)) {
    if (row.counts.total() <= 1) {
      d.removed.push_back(row.id);
      continue;
    }
    PValueSupport s =
        fet_support(row.counts.n1, row.counts.n2, row.counts.total());
    d.pvalues.push_back(s.pvalue_of_outcome(row.counts.x1));
    d.nu = std::max(d.nu, s.min_value());
    d.supports.push_back(std::move(s));
    d.kept.push_back(std::move(row));
  }
  return d;
}

int cmd_estimate(const Effective& e) {
  if (e.input.empty()) throw config_error("estimate requires --input");
  const AnalysisData d = load_analysis(e.input);
  if (d.kept.empty())
    throw input_error("no analyzable rows remain after removing totals <= 1");

  std::vector<double> taus = e.taus.empty() ? default_taus(d.nu) : e.taus;
  const TuningGrid grid = build_grid(d.supports, std::move(taus));
  const Pi0Estimate est = pi0_hat_H(d.pvalues, grid);
  const double storey_s_ref = storey_pi0_s(d.pvalues, e.storey_tau);
  const json cfg = echo_config(e);

  if (e.format == "json") {
    json out;
    out["config"] = cfg;
    out["removed"] = d.removed;
    out["m"] = d.kept.size();
    out["nu"] = d.nu;
    out["per_tau"] = json::array();
    for (std::size_t j = 0; j < grid.num_taus(); ++j) {
      json r;
      r["tau"] = grid.taus[j];
      r["eta"] = grid.etas[j];
      r["beta"] = est.betas[j];
      r["storey"] = storey_pi0(d.pvalues, grid.taus[j]);
      r["storey_s"] = storey_pi0_s(d.pvalues, grid.taus[j]);
      out["per_tau"].push_back(std::move(r));
    }
    out["pi0_hat_H"] = est.pi0_hat;
    out["pi0_storey_s"] = storey_s_ref;
    emit(e, out.dump(2) + "\n");
    return 0;
  }

  std::ostringstream os;
  os << "# config " << cfg.dump() << "\n";
  for (const auto& id : d.removed) os << "# removed " << id << "\n";
  os << "# m " << d.kept.size() << "\n";
  os << "# nu " << fmt_exact(d.nu) << "\n";
  os << "# pi0_hat_H " << fmt_sig(est.pi0_hat) << "\n";
  os << "# pi0_storey_s " << fmt_sig(storey_s_ref) << "\n";
  os << "tau,eta,beta,storey,storey_s\n";
  for (std::size_t j = 0; j < grid.num_taus(); ++j) {
    os << fmt_exact(grid.taus[j]) << ',' << fmt_exact(grid.etas[j]) << ','
       << fmt_sig(est.betas[j]) << ','
       << fmt_sig(storey_pi0(d.pvalues, grid.taus[j])) << ','
       << fmt_sig(storey_pi0_s(d.pvalues, grid.taus[j])) << '\n';
  }
  emit(e, os.str());
  return 0;
}

int cmd_analyze(const Effective& e) {
  if (e.input.empty()) throw config_error("analyze requires --input");
  const AnalysisData d = load_analysis(e.input);
  if (d.kept.empty())
    throw input_error("no analyzable rows remain after removing totals <= 1");

  const Procedure proc = procedure_from_string(e.procedure);
  double pi0_hat = 1.0;
  if (proc == Procedure::abh_h || proc == Procedure::abhh_h) {
    std::vector<double> taus = e.taus.empty() ? default_taus(d.nu) : e.taus;
    const TuningGrid grid = build_grid(d.supports, std::move(taus));
    pi0_hat = pi0_hat_H(d.pvalues, grid).pi0_hat;
  } else if (proc == Procedure::abh_storey) {
    pi0_hat = storey_pi0_s(d.pvalues, e.storey_tau);
  }

  RejectionReport report;
  switch (proc) {
    case Procedure::bh:
      report = bh(d.pvalues, e.alpha);
      break;
    case Procedure::abh_h:
    case Procedure::abh_storey:
      report = adaptive_bh(d.pvalues, pi0_hat, e.alpha);
      break;
    case Procedure::bhh:
      report = bhh(d.pvalues, d.supports, e.alpha);
      break;
    case Procedure::abhh_h:
      report = adaptive_bhh(d.pvalues, d.supports, pi0_hat, e.alpha);
      break;
  }
  std::vector<bool> rejected(d.kept.size(), false);
  for (std::size_t k : report.rejected) rejected[k] = true;
  const json cfg = echo_config(e);

  if (e.format == "json") {
    json out;
    out["config"] = cfg;
    out["removed"] = d.removed;
    out["m"] = d.kept.size();
    out["pi0_hat"] = pi0_hat;
    out["k_hat"] = report.k_hat;
    out["rows"] = json::array();
    for (std::size_t i = 0; i < d.kept.size(); ++i) {
      json r;
      r["id"] = d.kept[i].id;
      r["p"] = d.pvalues[i];
      r["adjusted"] = report.adjusted[i];
      r["rejected"] = bool(rejected[i]);
      out["rows"].push_back(std::move(r));
    }
    emit(e, out.dump(2) + "\n");
    return 0;
  }

  std::ostringstream os;
  os << "# config " << cfg.dump() << "\n";
  for (const auto& id : d.removed) os << "# removed " << id << "\n";
  os << "# m " << d.kept.size() << "\n";
  os << "# pi0_hat " << fmt_sig(pi0_hat) << "\n";
  os << "# k_hat " << report.k_hat << "\n";
  os << "id,p,adjusted,rejected\n";
  for (std::size_t i = 0; i < d.kept.size(); ++i) {
    os << csv_escape(d.kept[i].id) << ',' << fmt_exact(d.pvalues[i]) << ','
       << fmt_sig(report.adjusted[i]) << ','
       << (rejected[i] ? "true" : "false") << '\n';
  }
  emit(e, os.str());
  return 0;
}

// --------------------------------------------------------------- simulate

int cmd_simulate(const Effective& e) {
  if (!e.have_scenario)
    throw config_error(
        "simulate requires --config with a 'scenario' block (m, n1, n2, "
        "reps, ...)");
  const json cfg = echo_config(e);

  if (e.study == "fdr") {
    const SimResult res =
        run_fdr_experiment(e.scenario, procedure_from_string(e.procedure));
    if (e.format == "json") {
      json out;
      out["config"] = cfg;
      json r;
      r["procedure"] = res.procedure;
      r["reps"] = res.reps;
      r["fdr_mean"] = json_num(res.fdr_mean);
      r["fdr_se"] = json_num(res.fdr_se);
      r["power_mean"] = json_num(res.power_mean);
      r["power_se"] = json_num(res.power_se);
      r["power_reps"] = res.power_reps;
      r["pi0_hat_mean"] = json_num(res.pi0_hat_mean);
      r["pi0_hat_se"] = json_num(res.pi0_hat_se);
      r["pi0_true_mean"] = json_num(res.pi0_true_mean);
      r["pi0_hat_bias"] = json_num(res.pi0_hat_bias);
      r["m0"] = res.m0s;
      r["V"] = res.Vs;
      r["R"] = res.Rs;
      out["result"] = std::move(r);
      emit(e, out.dump(2) + "\n");
      return 0;
    }
    std::ostringstream os;
    os << "# config " << cfg.dump() << "\n";
    os << "# fdr_mean " << fmt_sig(res.fdr_mean) << "\n";
    os << "# fdr_se " << fmt_sig(res.fdr_se) << "\n";
    os << "# power_mean " << fmt_sig(res.power_mean) << "\n";
    os << "# power_se " << fmt_sig(res.power_se) << "\n";
    os << "# pi0_hat_mean " << fmt_sig(res.pi0_hat_mean) << "\n";
    os << "# pi0_hat_bias " << fmt_sig(res.pi0_hat_bias) << "\n";
    os << "replicate,m0,V,R,fdp\n";
    for (std::size_t r = 0; r < res.reps; ++r) {
      const double fdp =
          static_cast<double>(res.Vs[r]) /
          static_cast<double>(std::max<std::uint32_t>(res.Rs[r], 1));
      os << r << ',' << res.m0s[r] << ',' << res.Vs[r] << ',' << res.Rs[r]
         << ',' << fmt_sig(fdp) << '\n';
    }
    emit(e, os.str());
    return 0;
  }

  if (e.study == "bias") {
    const BiasReport rep = bias_experiment(e.scenario);
    if (e.format == "json") {
      json out;
      out["config"] = cfg;
      json r;
      r["reps"] = rep.reps;
      r["pi0"] = rep.pi0;
      r["pi0_h_mean"] = json_num(rep.pi0_h_mean);
      r["pi0_h_se"] = json_num(rep.pi0_h_se);
      r["comparator_mean"] = json_num(rep.comparator_mean);
      r["comparator_se"] = json_num(rep.comparator_se);
      r["per_tau"] = json::array();
      for (std::size_t j = 0; j < rep.taus.size(); ++j) {
        json row;
        row["tau"] = rep.taus[j];
        row["eta"] = rep.etas[j];
        row["beta_mean"] = json_num(rep.beta_mean[j]);
        row["beta_se"] = json_num(rep.beta_se[j]);
        row["beta_expected"] = json_num(rep.beta_expected[j]);
        row["storey_s_bias"] = json_num(rep.storey_s_bias[j]);
        row["storey_s_se"] = json_num(rep.storey_s_se[j]);
        row["b1"] = json_num(rep.b1[j]);
        row["b2"] = json_num(rep.b2[j]);
        r["per_tau"].push_back(std::move(row));
      }
      out["result"] = std::move(r);
      emit(e, out.dump(2) + "\n");
      return 0;
    }
    std::ostringstream os;
    os << "# config " << cfg.dump() << "\n";
    os << "# pi0 " << fmt_exact(rep.pi0) << "\n";
    os << "# pi0_h_mean " << fmt_sig(rep.pi0_h_mean) << "\n";
    os << "# comparator_mean " << fmt_sig(rep.comparator_mean) << "\n";
    os << "tau,eta,beta_mean,beta_se,beta_expected,storey_s_bias,storey_s_se,"
          "b1,b2\n";
    for (std::size_t j = 0; j < rep.taus.size(); ++j) {
      os << fmt_exact(rep.taus[j]) << ',' << fmt_exact(rep.etas[j]) << ','
         << fmt_sig(rep.beta_mean[j]) << ',' << fmt_sig(rep.beta_se[j]) << ','
         << fmt_sig(rep.beta_expected[j]) << ','
         << fmt_sig(rep.storey_s_bias[j]) << ','
         << fmt_sig(rep.storey_s_se[j]) << ',' << fmt_sig(rep.b1[j]) << ','
         << fmt_sig(rep.b2[j]) << '\n';
    }
    emit(e, os.str());
    return 0;
  }

  if (e.study == "condition2") {
    const ConditionTwoReport rep = check_condition_two(e.scenario);
    if (e.format == "json") {
      json out;
      out["config"] = cfg;
      json r;
      r["reps"] = rep.reps;
      r["pi0"] = rep.pi0;
      r["bound"] = rep.bound;
      r["capped_ok"] = rep.capped_ok;
      r["per_tau_ok"] = rep.per_tau_ok;
      r["per_k"] = json::array();
      for (std::size_t ki = 0; ki < rep.null_indices.size(); ++ki) {
        json row;
        row["k"] = rep.null_indices[ki];
        row["inv_mean"] = json_num(rep.inv_mean[ki]);
        row["inv_se"] = json_num(rep.inv_se[ki]);
        row["per_tau"] = json::array();
        for (std::size_t j = 0; j < rep.inv_beta_mean[ki].size(); ++j) {
          json cell;
          cell["inv_beta_mean"] = json_num(rep.inv_beta_mean[ki][j]);
          cell["inv_beta_se"] = json_num(rep.inv_beta_se[ki][j]);
          row["per_tau"].push_back(std::move(cell));
        }
        r["per_k"].push_back(std::move(row));
      }
      out["result"] = std::move(r);
      emit(e, out.dump(2) + "\n");
      return 0;
    }
    std::ostringstream os;
    os << "# config " << cfg.dump() << "\n";
    os << "# bound " << fmt_exact(rep.bound) << "\n";
    os << "# capped_ok " << (rep.capped_ok ? "true" : "false") << "\n";
    os << "# per_tau_ok " << (rep.per_tau_ok ? "true" : "false") << "\n";
    os << "k,tau_index,kind,mean,se\n";
    for (std::size_t ki = 0; ki < rep.null_indices.size(); ++ki) {
      os << rep.null_indices[ki] << ",,capped," << fmt_sig(rep.inv_mean[ki])
         << ',' << fmt_sig(rep.inv_se[ki]) << '\n';
      for (std::size_t j = 0; j < rep.inv_beta_mean[ki].size(); ++j)
        os << rep.null_indices[ki] << ',' << j << ",raw,"
           << fmt_sig(rep.inv_beta_mean[ki][j]) << ','
           << fmt_sig(rep.inv_beta_se[ki][j]) << '\n';
    }
    emit(e, os.str());
    return 0;
  }

  throw config_error("unknown study '" + e.study +
                     "' (expected fdr, bias, or condition2)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Exact-test multiple testing toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* cmd, bool with_input) {
    if (with_input) cmd->add_option("--input", f.input, "count table (TSV)");
    cmd->add_option("--out", f.out, "output path (default stdout)");
    cmd->add_option("--format", f.format, "csv or json");
    cmd->add_option("--config", f.config, "JSON config file");
  };

  CLI::App* support = app.add_subcommand(
      "support", "attainable p-values per row of a count table");
  add_common(support, true);

  CLI::App* estimate = app.add_subcommand(
      "estimate", "null-proportion estimates for a count table");
  add_common(estimate, true);
  estimate->add_option("--taus", f.taus_text, "comma-separated tuning values");

  CLI::App* analyze = app.add_subcommand(
      "analyze", "multiple-testing analysis of a count table");
  add_common(analyze, true);
  analyze->add_option("--taus", f.taus_text, "comma-separated tuning values");
  analyze->add_option("--alpha", f.alpha, "target FDR level");
  analyze->add_option("--procedure", f.procedure,
                      "bh | abh_h | abh_storey | bhh | abhh_h");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo studies from a scenario");
  add_common(simulate, false);
  simulate->add_option("--taus", f.taus_text, "comma-separated tuning values");
  simulate->add_option("--alpha", f.alpha, "target FDR level");
  simulate->add_option("--procedure", f.procedure,
                       "bh | abh_h | abh_storey | bhh | abhh_h");
  simulate->add_option("--reps", f.reps, "replicates");
  simulate->add_option("--seed", f.seed, "master RNG seed");
  simulate->add_option("--pi0", f.pi0, "true null proportion");
  simulate->add_option("--effect", f.effect, "odds ratio for false nulls");
  simulate->add_option("--margin-mode", f.margin_mode,
                       "fixed or unconditional");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("discfdr");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) return app.exit(ex);  // --help and friends
    std::cerr << "config error: " << ex.what() << "\n";
    return 3;
  }

  // Values land in the shared Flags struct no matter which subcommand's
  // option parsed them; the "was this flag given" handles must come from
  // the subcommand that actually ran.
  CLI::App* active = app.get_subcommands().front();
  const std::string subcommand = active->get_name();
  f.o_input = active->get_option_no_throw("--input");
  f.o_out = active->get_option_no_throw("--out");
  f.o_format = active->get_option_no_throw("--format");
  f.o_taus = active->get_option_no_throw("--taus");
  f.o_alpha = active->get_option_no_throw("--alpha");
  f.o_procedure = active->get_option_no_throw("--procedure");
  f.o_reps = active->get_option_no_throw("--reps");
  f.o_seed = active->get_option_no_throw("--seed");
  f.o_pi0 = active->get_option_no_throw("--pi0");
  f.o_effect = active->get_option_no_throw("--effect");
  f.o_margin_mode = active->get_option_no_throw("--margin-mode");

  try {
    const Effective e = make_effective(f, subcommand);
    if (subcommand == "support") return cmd_support(e);
    if (subcommand == "estimate") return cmd_estimate(e);
    if (subcommand == "analyze") return cmd_analyze(e);
    return cmd_simulate(e);
  } catch (const input_error& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return 2;
  } catch (const config_error& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 3;
  } catch (const json::exception& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 3;
  }
}

}  // namespace discfdr
