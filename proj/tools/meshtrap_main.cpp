// Command-line front end: every subcommand prints machine-readable JSON on
// stdout, writes files only through an explicit output path, and is
// byte-reproducible for a fixed seed regardless of --jobs.
//
// Exit codes: 0 success, 2 usage/domain error, 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "meshtrap/meshtrap.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

ordered_json json_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

meshtrap::EpsilonSet load_epsilon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw meshtrap::DomainError("cannot open epsilon file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw meshtrap::DomainError(std::string("epsilon file: ") + e.what());
  }
  static const std::vector<std::string> known = {"eps1_c", "eps2_c", "eps1_m", "eps1_g",
                                                 "eps3_g", "eps5_g", "eps1",   "eps2"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw meshtrap::DomainError("epsilon file: unknown key '" + it.key() + "'");
    }
  }
  meshtrap::EpsilonSet eps;
  auto get = [&](const char* key, double* field) {
    if (j.contains(key)) *field = j.at(key).get<double>();
  };
  get("eps1_c", &eps.eps1_c);
  get("eps2_c", &eps.eps2_c);
  get("eps1_m", &eps.eps1_m);
  get("eps1_g", &eps.eps1_g);
  get("eps3_g", &eps.eps3_g);
  get("eps5_g", &eps.eps5_g);
  get("eps1", &eps.eps1);
  get("eps2", &eps.eps2);
  eps.validate();
  return eps;
}

void emit_json(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

int run_threshold(double beta, const std::string& eps_file) {
  const meshtrap::ThresholdPoint point = meshtrap::weak_threshold(beta);
  ordered_json out;
  out["beta_w"] = point.beta_w;
  out["alpha_w"] = point.alpha_w;
  out["residual"] = point.residual;
  out["sign_changes"] = point.sign_changes;
  if (!eps_file.empty()) {
    const meshtrap::EpsilonSet eps = load_epsilon_file(eps_file);
    out["theta_hat_lower"] = meshtrap::theta_lower(beta, eps);
    out["alpha_lower_bound"] = meshtrap::alpha_lower_bound(beta, eps);
    out["theta_hat_upper"] = meshtrap::theta_upper(beta, eps);
    out["alpha_upper_bound"] = meshtrap::alpha_upper_bound(beta, eps);
  }
  emit_json(out);
  return 0;
}

int run_width(long n, long k, const std::string& kind_name, long samples,
              std::uint64_t seed, int jobs) {
  meshtrap::WidthKind kind;
  if (kind_name == "xi") kind = meshtrap::WidthKind::Dual;
  else if (kind_name == "w") kind = meshtrap::WidthKind::Projection;
  else throw meshtrap::DomainError("width: --kind must be xi or w");

  const meshtrap::ConeSpec cone{n, k};
  const meshtrap::WidthEstimate est = meshtrap::estimate_width(cone, kind, samples, seed, jobs);
  ordered_json out;
  out["kind"] = kind_name;
  out["n"] = n;
  out["k"] = k;
  out["num_samples"] = est.num_samples;
  out["seed"] = seed;
  out["mean"] = est.mean;
  out["sample_std"] = est.sample_std;
  out["std_error"] = est.std_error;
  out["concentration_ratio"] = json_or_inf(est.concentration_ratio);
  out["normalized_dimension"] = est.mean * est.mean / static_cast<double>(n);
  emit_json(out);
  return 0;
}

int run_trap(long n, long m, long k, long trials, std::uint64_t seed, int jobs) {
  const meshtrap::ProblemGeometry geom{n, m, k};
  const meshtrap::TrapStats stats = meshtrap::trap_probability(geom, trials, seed, jobs);
  ordered_json out;
  out["n"] = n;
  out["m"] = m;
  out["k"] = k;
  out["trials"] = stats.trials;
  out["seed"] = seed;
  out["trapped"] = stats.trapped;
  out["escaped"] = stats.escaped;
  out["indeterminate"] = stats.indeterminate;
  out["rate"] = stats.rate;
  out["wilson_low"] = stats.wilson_low;
  out["wilson_high"] = stats.wilson_high;
  emit_json(out);
  return 0;
}

int run_recover(long n, long m, long k, long trials, std::uint64_t seed, int jobs) {
  const meshtrap::ProblemGeometry geom{n, m, k};
  geom.validate();
  if (trials < 1) throw meshtrap::DomainError("recover: trials must be >= 1");
  std::vector<int> successes(static_cast<std::size_t>(trials));
  meshtrap::parallel_for(successes.size(), jobs, [&](std::size_t i) {
    successes[i] =
        meshtrap::recovery_trial(geom, meshtrap::derive_seed(seed, i)).success ? 1 : 0;
  });
  long count = 0;
  for (int s : successes) count += s;
  double low = 0.0, high = 0.0;
  meshtrap::wilson_interval(count, trials, &low, &high);
  ordered_json out;
  out["n"] = n;
  out["m"] = m;
  out["k"] = k;
  out["trials"] = trials;
  out["seed"] = seed;
  out["successes"] = count;
  out["rate"] = static_cast<double>(count) / static_cast<double>(trials);
  out["wilson_low"] = low;
  out["wilson_high"] = high;
  emit_json(out);
  return 0;
}

int run_phase(const std::string& config_path, int jobs, bool overlay) {
  const meshtrap::SweepConfig config = meshtrap::load_sweep_config(config_path);
  const meshtrap::SweepResult result = meshtrap::run_sweep(config, jobs);
  std::vector<meshtrap::CurveEntry> curve;
  if (overlay) curve = meshtrap::threshold_curve(config.betas);
  const std::vector<std::string> files = meshtrap::emit(result, config, curve);
  ordered_json out;
  out["cells"] = result.cells.size();
  out["files"] = files;
  emit_json(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-transition toolkit for l1 recovery: thresholds, Gaussian widths, "
               "null-space intersection tests, basis-pursuit trials, phase sweeps"};
  app.require_subcommand(1);

  int jobs = 1;
  app.add_option("--jobs,-j", jobs, "Worker threads (output is independent of this)")
      ->envname("MESHTRAP_JOBS")
      ->check(CLI::PositiveNumber);

  auto* threshold = app.add_subcommand("threshold", "Weak threshold alpha_w(beta_w)");
  double beta = 0.0;
  std::string eps_file;
  threshold->add_option("--beta", beta, "Sparsity ratio beta_w in (0,1)")->required();
  threshold->add_option("--eps-file", eps_file, "JSON file with epsilon constants");

  auto* width = app.add_subcommand("width", "Monte Carlo width estimate");
  long w_n = 0, w_k = 0, w_samples = 0;
  std::string w_kind = "xi";
  std::uint64_t w_seed = 0;
  width->add_option("--n", w_n, "Ambient dimension")->required();
  width->add_option("--k", w_k, "Support size")->required();
  width->add_option("--kind", w_kind, "xi (dual) or w (projection)")
      ->check(CLI::IsMember({"xi", "w"}));
  width->add_option("--samples", w_samples, "Number of Monte Carlo samples")->required();
  width->add_option("--seed", w_seed, "Master seed")->required();

  auto* trap = app.add_subcommand("trap", "Null-space / descent-set intersection trials");
  long t_n = 0, t_m = 0, t_k = 0, t_trials = 0;
  std::uint64_t t_seed = 0;
  trap->add_option("--n", t_n, "Ambient dimension")->required();
  trap->add_option("--m", t_m, "Measurement rows")->required();
  trap->add_option("--k", t_k, "Support size")->required();
  trap->add_option("--trials", t_trials, "Number of trials")->required();
  trap->add_option("--seed", t_seed, "Master seed")->required();

  auto* recover = app.add_subcommand("recover", "Basis-pursuit recovery trials");
  long r_n = 0, r_m = 0, r_k = 0, r_trials = 0;
  std::uint64_t r_seed = 0;
  recover->add_option("--n", r_n, "Ambient dimension")->required();
  recover->add_option("--m", r_m, "Measurement rows")->required();
  recover->add_option("--k", r_k, "Support size")->required();
  recover->add_option("--trials", r_trials, "Number of trials")->required();
  recover->add_option("--seed", r_seed, "Master seed")->required();

  auto* phase = app.add_subcommand("phase", "Run a sweep from a JSON config");
  std::string config_path;
  bool overlay = false;
  phase->add_option("--config", config_path, "Sweep config JSON")->required();
  phase->add_flag("--overlay", overlay, "Also emit the theoretical curve CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (threshold->parsed()) return run_threshold(beta, eps_file);
    if (width->parsed()) return run_width(w_n, w_k, w_kind, w_samples, w_seed, jobs);
    if (trap->parsed()) return run_trap(t_n, t_m, t_k, t_trials, t_seed, jobs);
    if (recover->parsed()) return run_recover(r_n, r_m, r_k, r_trials, r_seed, jobs);
    if (phase->parsed()) return run_phase(config_path, jobs, overlay);
  } catch (const meshtrap::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const meshtrap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
