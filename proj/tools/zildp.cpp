// Copyright 2026 The zildp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// zildp command-line interface: calibrate, release, tradeoff, estimate and
// experiment subcommands.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "zildp/zildp.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string normalize_key(std::string key) {
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  return key;
}

// Overlays a JSON config file on the flag values; keys use the long flag
// names with '-' or '_'. Config entries win over flags.
json resolve_settings(json flags, const std::string& config_path) {
  if (config_path.empty()) return flags;
  std::ifstream in(config_path);
  if (!in) throw zildp::DataError("cannot open config " + config_path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw zildp::DataError("config " + config_path + ": " + e.what());
  }
  if (!cfg.is_object()) {
    throw zildp::DataError("config " + config_path + " must be a JSON object");
  }
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const std::string key = normalize_key(it.key());
    if (key == "config") continue;
    if (!flags.contains(key)) {
      throw UsageError("config key '" + it.key() +
                       "' is not an option of this subcommand");
    }
    flags[key] = it.value();
  }
  return flags;
}

template <class T>
T get(const json& s, const std::string& key) {
  try {
    return s.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError("option '" + key + "': " + e.what());
  }
}

template <class T>
std::optional<T> get_opt(const json& s, const std::string& key) {
  if (!s.contains(key) || s.at(key).is_null()) return std::nullopt;
  return get<T>(s, key);
}

std::uint64_t resolve_seed(const json& s) {
  if (auto seed = get_opt<std::uint64_t>(s, "seed")) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void announce_seed(std::uint64_t seed) {
  std::cout << "seed: " << seed << "\n";
}

void write_manifest(const std::string& path, const std::string& command,
                    std::uint64_t seed, const json& settings,
                    const std::vector<std::string>& outputs,
                    const json& results = json::object()) {
  json m;
  m["tool"] = "zildp";
  m["version"] = zildp::kVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["generator"] = zildp::kGeneratorName;
  json resolved = settings;
  resolved["seed"] = seed;
  m["settings"] = resolved;
  m["outputs"] = outputs;
  if (!results.empty()) m["results"] = results;
  zildp::write_text_file(path, m.dump(2) + "\n");
  std::cout << "manifest: " << path << "\n";
}

zildp::PrivacyMode parse_mode(const std::string& mode) {
  if (mode == "adp" || mode == "attribute") return zildp::PrivacyMode::kAttribute;
  if (mode == "dp" || mode == "individual") return zildp::PrivacyMode::kIndividual;
  throw UsageError("--mode must be adp or dp");
}

// ---------------------------------------------------------------- calibrate

struct CalibrateFlags {
  double epsilon = 0.0, delta_dp = 0.0, zero_mass = 0.0;
  std::string support, mode = "adp", out, manifest;
  std::optional<std::uint64_t> seed;
};

int run_calibrate(const CalibrateFlags& f, const std::string& config) {
  json flags = {{"epsilon", f.epsilon},     {"delta_dp", f.delta_dp},
                {"zero_mass", f.zero_mass}, {"support", f.support},
                {"mode", f.mode},           {"out", f.out},
                {"manifest", f.manifest},   {"seed", nullptr}};
  if (f.seed) flags["seed"] = *f.seed;
  const json s = resolve_settings(flags, config);
  const std::uint64_t seed = resolve_seed(s);
  announce_seed(seed);
  const std::string support_path = get<std::string>(s, "support");
  if (support_path.empty()) throw UsageError("--support is required");
  const zildp::SupportBox support = zildp::read_support(support_path);
  const zildp::PrivacyBudget target{get<double>(s, "epsilon"),
                                    get<double>(s, "delta_dp")};
  const zildp::Calibration cal =
      zildp::calibrate(target, get<double>(s, "zero_mass"), support,
                       parse_mode(get<std::string>(s, "mode")));
  std::cout << "c_prime: " << zildp::format_double(cal.c_prime) << "\n"
            << "lambda: " << zildp::format_double(cal.lambda) << "\n";
  const json result = {{"c_prime", cal.c_prime}, {"lambda", cal.lambda}};
  std::vector<std::string> outputs;
  std::string out = get<std::string>(s, "out");
  if (!out.empty()) {
    zildp::write_text_file(out, result.dump(2) + "\n");
    outputs.push_back(out);
  }
  std::string manifest = get<std::string>(s, "manifest");
  if (manifest.empty()) {
    manifest = out.empty() ? "calibrate.manifest.json" : out + ".manifest.json";
  }
  write_manifest(manifest, "calibrate", seed, s, outputs, result);
  return kExitOk;
}

// ------------------------------------------------------------------ release

struct ReleaseFlags {
  std::string input, support, out_prefix, manifest;
  double zero_mass = 0.0, lambda = 0.0;
  std::optional<std::uint64_t> seed;
};

int run_release(const ReleaseFlags& f, const std::string& config) {
  json flags = {{"input", f.input},         {"support", f.support},
                {"out_prefix", f.out_prefix}, {"manifest", f.manifest},
                {"zero_mass", f.zero_mass}, {"lambda", f.lambda},
                {"seed", nullptr}};
  if (f.seed) flags["seed"] = *f.seed;
  const json s = resolve_settings(flags, config);
  const std::uint64_t seed = resolve_seed(s);
  announce_seed(seed);
  for (const char* k : {"input", "support", "out_prefix"}) {
    if (get<std::string>(s, k).empty()) {
      throw UsageError(std::string("--") + k + " is required");
    }
  }
  const zildp::SupportBox support =
      zildp::read_support(get<std::string>(s, "support"));
  const zildp::Dataset data =
      zildp::load_dataset(get<std::string>(s, "input"), support);
  const zildp::NoiseParams params{get<double>(s, "zero_mass"),
                                  get<double>(s, "lambda")};
  const zildp::ReleaseBundle bundle =
      zildp::drdp_release(data, params, zildp::RngStream(seed));
  const std::string prefix = get<std::string>(s, "out_prefix");
  std::vector<std::string> outputs;
  for (const auto& p : zildp::write_bundle(bundle, prefix)) {
    outputs.push_back(p.string());
  }
  const json meta = zildp::bundle_meta(bundle);
  std::cout << "rows: " << bundle.x1.rows() << "\n"
            << "c_attribute: " << zildp::format_double(meta["c_attribute"]) << "\n"
            << "c_individual: " << zildp::format_double(meta["c_individual"])
            << "\n";
  std::string manifest = get<std::string>(s, "manifest");
  if (manifest.empty()) manifest = prefix + ".manifest.json";
  write_manifest(manifest, "release", seed, s, outputs,
                 {{"c_attribute", meta["c_attribute"]},
                  {"c_individual", meta["c_individual"]}});
  return kExitOk;
}

// ----------------------------------------------------------------- tradeoff

struct TradeoffFlags {
  std::string kind = "beta", out, manifest;
  double c = 0.5, zero_mass = 0.0, epsilon = 0.0, delta_dp = 0.0;
  int d = 1, n_sim = 100000, points = 1001;
  std::vector<double> profile;
  std::optional<std::uint64_t> seed;
};

int run_tradeoff(const TradeoffFlags& f, const std::string& config) {
  json flags = {{"kind", f.kind},       {"out", f.out},
                {"manifest", f.manifest}, {"c", f.c},
                {"zero_mass", f.zero_mass}, {"epsilon", f.epsilon},
                {"delta_dp", f.delta_dp}, {"d", f.d},
                {"n_sim", f.n_sim},     {"points", f.points},
                {"profile", f.profile}, {"seed", nullptr}};
  if (f.seed) flags["seed"] = *f.seed;
  const json s = resolve_settings(flags, config);
  const std::uint64_t seed = resolve_seed(s);
  announce_seed(seed);
  const std::string kind = get<std::string>(s, "kind");
  const double c = get<double>(s, "c");
  const double zm = get<double>(s, "zero_mass");
  const int points = get<int>(s, "points");
  if (points < 2) throw UsageError("--points must be >= 2");
  const auto grid = zildp::alpha_grid(static_cast<std::size_t>(points));
  const std::string zm_tag = zm > 0.0 ? "," + zildp::format_double(zm) : "";
  zildp::TradeoffCurve curve;
  if (kind == "beta") {
    curve = zildp::tabulate_curve(
        "beta_{" + zildp::format_double(c) + zm_tag + "}",
        [&](double a) {
          return zm > 0.0 ? zildp::beta_c_delta(a, c, zm) : zildp::beta_c(a, c);
        },
        grid);
  } else if (kind == "t1") {
    curve = zildp::tabulate_curve(
        "T_{1," + zildp::format_double(c) + "}",
        [&](double a) { return zildp::t1c_closed_form(a, c); }, grid);
    if (zm > 0.0) curve = zildp::tradeoff_shrink(curve, zm);
  } else if (kind == "empirical") {
    curve = zildp::empirical_tradeoff(get<int>(s, "d"), c, get<int>(s, "n_sim"),
                                      zildp::RngStream(seed));
    if (zm > 0.0) curve = zildp::tradeoff_shrink(curve, zm);
  } else if (kind == "feps") {
    const zildp::PrivacyBudget b{get<double>(s, "epsilon"),
                                 get<double>(s, "delta_dp")};
    curve = zildp::tabulate_curve(
        "f_{" + zildp::format_double(b.epsilon) + "," +
            zildp::format_double(b.delta_dp) + "}",
        [&](double a) { return zildp::f_eps_delta(a, b); }, grid);
  } else {
    throw UsageError("--kind must be beta, t1, empirical or feps");
  }
  json results;
  const auto profile = get<std::vector<double>>(s, "profile");
  if (!profile.empty()) {
    json rows = json::array();
    for (double e : profile) {
      const double dd = zm > 0.0 ? zildp::delta_profile_zil(c, e, zm)
                                 : zildp::delta_profile(c, e);
      std::cout << "epsilon " << zildp::format_double(e) << " delta_dp "
                << zildp::format_double(dd) << "\n";
      rows.push_back({{"epsilon", e}, {"delta_dp", dd}});
    }
    results["profile"] = rows;
  }
  std::vector<std::string> outputs;
  std::string out = get<std::string>(s, "out");
  if (out.empty()) out = "tradeoff.csv";
  zildp::write_curve_csv(out, curve);
  outputs.push_back(out);
  std::cout << "curve: " << out << " (" << curve.size() << " points)\n";
  std::string manifest = get<std::string>(s, "manifest");
  if (manifest.empty()) manifest = out + ".manifest.json";
  write_manifest(manifest, "tradeoff", seed, s, outputs, results);
  return kExitOk;
}

// ----------------------------------------------------------------- estimate

struct EstimateFlags {
  std::string bundle, data, support, loss, method = "drcl", out, manifest,
      optimizer = "multistart";
  std::optional<double> tau;
  int restarts = 5;
  bool sl_omit_laplacian = false;
  std::optional<std::uint64_t> seed;
};

int run_estimate(const EstimateFlags& f, const std::string& config) {
  json flags = {{"bundle", f.bundle},
                {"data", f.data},
                {"support", f.support},
                {"loss", f.loss},
                {"method", f.method},
                {"out", f.out},
                {"manifest", f.manifest},
                {"optimizer", f.optimizer},
                {"tau", nullptr},
                {"restarts", f.restarts},
                {"sl_omit_laplacian", f.sl_omit_laplacian},
                {"seed", nullptr}};
  if (f.tau) flags["tau"] = *f.tau;
  if (f.seed) flags["seed"] = *f.seed;
  const json s = resolve_settings(flags, config);
  const std::uint64_t seed = resolve_seed(s);
  announce_seed(seed);
  std::string loss_name = get<std::string>(s, "loss");
  if (loss_name.empty()) throw UsageError("--loss is required");
  if (auto tau = get_opt<double>(s, "tau")) {
    if (loss_name == "check" || loss_name == "quantile") {
      loss_name += ":" + zildp::format_double(*tau);
    }
  }
  const auto loss = zildp::make_loss(loss_name);
  const zildp::EstimatorMethod method =
      zildp::parse_estimator(get<std::string>(s, "method"));
  const std::string bundle_prefix = get<std::string>(s, "bundle");
  const std::string data_path = get<std::string>(s, "data");
  if (bundle_prefix.empty() == data_path.empty()) {
    throw UsageError("give exactly one of --bundle or --data");
  }
  zildp::EstimationData data;
  if (!bundle_prefix.empty()) {
    data = zildp::estimation_data(zildp::read_bundle(bundle_prefix));
  } else {
    const std::string sp = get<std::string>(s, "support");
    if (sp.empty()) throw UsageError("--data needs --support");
    data = zildp::estimation_data(
        zildp::load_dataset(data_path, zildp::read_support(sp)));
    if (method != zildp::EstimatorMethod::kOracle &&
        method != zildp::EstimatorMethod::kNaive) {
      throw UsageError("--data supports only the oracle and naive methods; "
                       "use --bundle for corrected estimators");
    }
    if (method == zildp::EstimatorMethod::kNaive) data.x1 = data.clean;
  }
  zildp::EstimateOptions opts;
  opts.optim.method = zildp::parse_optim_method(get<std::string>(s, "optimizer"));
  opts.optim.restarts = get<int>(s, "restarts");
  opts.optim.seed = seed;
  opts.sl_omit_laplacian = get<bool>(s, "sl_omit_laplacian");
  const zildp::EstimateReport rep = zildp::estimate(method, *loss, data, opts);
  const json report = rep.to_json();
  std::cout << "theta_hat:";
  for (Eigen::Index k = 0; k < rep.theta_hat.size(); ++k) {
    std::cout << " " << zildp::format_double(rep.theta_hat[k]);
  }
  std::cout << "\nstd_errors:";
  for (Eigen::Index k = 0; k < rep.std_errors.size(); ++k) {
    std::cout << " " << zildp::format_double(rep.std_errors[k]);
  }
  std::cout << "\n";
  std::string out = get<std::string>(s, "out");
  if (out.empty()) out = "report.json";
  zildp::write_text_file(out, report.dump(2) + "\n");
  std::string manifest = get<std::string>(s, "manifest");
  if (manifest.empty()) manifest = out + ".manifest.json";
  write_manifest(manifest, "estimate", seed, s, {out});
  return kExitOk;
}

// --------------------------------------------------------------- experiment

struct ExperimentFlags {
  std::string name = "table1", out_dir = "results";
  std::vector<int> ns;
  std::vector<double> zero_mass, lambda;
  std::vector<std::string> methods;
  int replications = 0, restarts = 5, n_sim = 100000;
  double replication_scale = 1.0;
  std::optional<std::uint64_t> seed;
};

int run_experiment_cmd(const ExperimentFlags& f, const std::string& config) {
  if (f.zero_mass.size() != f.lambda.size()) {
    throw UsageError("--zero-mass and --lambda must be given in pairs");
  }
  json noise = json::array();
  for (std::size_t k = 0; k < f.lambda.size(); ++k) {
    noise.push_back({{"zero_mass", f.zero_mass[k]}, {"lambda", f.lambda[k]}});
  }
  json flags = {{"experiment", f.name},
                {"ns", f.ns},
                {"noise", noise},
                {"methods", f.methods},
                {"replications", f.replications},
                {"restarts", f.restarts},
                {"n_sim", f.n_sim},
                {"replication_scale", f.replication_scale},
                {"output_dir", f.out_dir},
                {"seed", nullptr}};
  if (f.seed) flags["seed"] = *f.seed;
  json s = resolve_settings(flags, config);
  const std::uint64_t seed = resolve_seed(s);
  s["seed"] = seed;
  announce_seed(seed);
  zildp::ExperimentConfig cfg = zildp::ExperimentConfig::from_json(s);
  const json manifest = zildp::run_experiment(cfg);
  for (const auto& p : manifest["outputs"]) {
    std::cout << "wrote " << p.get<std::string>() << "\n";
  }
  std::cout << "manifest: "
            << (std::filesystem::path(cfg.output_dir) / cfg.experiment /
                "manifest.json")
                   .string()
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zildp: zero-inflated Laplace private release, privacy "
               "accounting and corrected-loss estimation"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config;

  auto add_common = [&](CLI::App* sub, std::optional<std::uint64_t>& seed) {
    sub->add_option("--config", config,
                    "JSON file whose entries override the flags");
    sub->add_option("--seed", seed, "random seed (drawn and printed if unset)");
  };

  CalibrateFlags cal;
  auto* c = app.add_subcommand("calibrate", "solve for c' and lambda");
  c->add_option("--epsilon", cal.epsilon, "target epsilon");
  c->add_option("--delta-dp", cal.delta_dp, "target delta");
  c->add_option("--zero-mass", cal.zero_mass, "ZIL zero mass");
  c->add_option("--support", cal.support, "support JSON");
  c->add_option("--mode", cal.mode, "adp (attribute) or dp (individual)");
  c->add_option("--out", cal.out, "result JSON");
  c->add_option("--manifest", cal.manifest, "manifest path");
  add_common(c, cal.seed);

  ReleaseFlags rel;
  auto* r = app.add_subcommand("release", "doubly-random ZIL release");
  r->add_option("--input", rel.input, "input CSV");
  r->add_option("--support", rel.support, "support JSON");
  r->add_option("--zero-mass", rel.zero_mass, "ZIL zero mass");
  r->add_option("--lambda", rel.lambda, "noise scale");
  r->add_option("--out-prefix", rel.out_prefix, "output prefix");
  r->add_option("--manifest", rel.manifest, "manifest path");
  add_common(r, rel.seed);

  TradeoffFlags tr;
  auto* t = app.add_subcommand("tradeoff", "trade-off curves and profiles");
  t->add_option("--kind", tr.kind, "beta | t1 | empirical | feps");
  t->add_option("--c", tr.c, "sensitivity ratio c");
  t->add_option("--zero-mass", tr.zero_mass, "zero mass (0 = none)");
  t->add_option("--d", tr.d, "dimension for empirical curves");
  t->add_option("--n-sim", tr.n_sim, "Monte-Carlo draws per hypothesis");
  t->add_option("--epsilon", tr.epsilon, "epsilon for feps");
  t->add_option("--delta-dp", tr.delta_dp, "delta for feps");
  t->add_option("--points", tr.points, "alpha grid size");
  t->add_option("--profile", tr.profile, "epsilons for the delta profile")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  t->add_option("--out", tr.out, "curve CSV");
  t->add_option("--manifest", tr.manifest, "manifest path");
  add_common(t, tr.seed);

  EstimateFlags est;
  auto* e = app.add_subcommand("estimate", "M-estimation from released data");
  e->add_option("--bundle", est.bundle, "release prefix");
  e->add_option("--data", est.data, "clean CSV (oracle / naive)");
  e->add_option("--support", est.support, "support JSON for --data");
  e->add_option("--loss", est.loss,
                "mean-relu | mean-indicator | mean-abssin | logistic | linear "
                "| check:<tau> | quantile:<tau>");
  e->add_option("--method", est.method, "oracle | naive | sl | drcl | sdrcl");
  e->add_option("--tau", est.tau, "quantile level for check / quantile");
  e->add_option("--optimizer", est.optimizer,
                "multistart | bfgs | subgradient-adaptive | nelder-mead");
  e->add_option("--restarts", est.restarts, "multistart restarts");
  e->add_flag("--sl-omit-laplacian", est.sl_omit_laplacian,
              "sl with losses lacking a Laplacian uses l(x2)");
  e->add_option("--out", est.out, "report JSON");
  e->add_option("--manifest", est.manifest, "manifest path");
  add_common(e, est.seed);

  ExperimentFlags ex;
  auto* x = app.add_subcommand("experiment", "reproduce tables and figure");
  x->add_option("--name", ex.name, "table1 | table2 | table3 | figure1");
  x->add_option("--n", ex.ns, "sample sizes")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  x->add_option("--zero-mass", ex.zero_mass, "zero masses (paired with --lambda)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  x->add_option("--lambda", ex.lambda, "noise scales")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  x->add_option("--methods", ex.methods, "subset of estimators")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  x->add_option("--replications", ex.replications, "replications (0 = default)");
  x->add_option("--replication-scale", ex.replication_scale,
                "multiplier on replications");
  x->add_option("--restarts", ex.restarts, "multistart restarts");
  x->add_option("--n-sim", ex.n_sim, "figure1 Monte-Carlo draws");
  x->add_option("--out-dir", ex.out_dir, "output directory");
  add_common(x, ex.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (c->parsed()) return run_calibrate(cal, config);
    if (r->parsed()) return run_release(rel, config);
    if (t->parsed()) return run_tradeoff(tr, config);
    if (e->parsed()) return run_estimate(est, config);
    if (x->parsed()) return run_experiment_cmd(ex, config);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const zildp::ParameterError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const zildp::CapabilityError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const zildp::DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const zildp::Error& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
