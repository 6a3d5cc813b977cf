#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "meshtrap/errors.hpp"
#include "meshtrap/geometry.hpp"
#include "meshtrap/l1.hpp"
#include "meshtrap/parallel.hpp"
#include "meshtrap/rng.hpp"
#include "meshtrap/thresholds.hpp"
#include "meshtrap/trap.hpp"
#include "meshtrap/version.hpp"

namespace meshtrap {

enum class SweepMode { Recovery, Trap, Both };

inline const char* sweep_mode_name(SweepMode m) {
  switch (m) {
    case SweepMode::Recovery: return "recovery";
    case SweepMode::Trap: return "trap";
    default: return "both";
  }
}

struct SweepConfig {
  Index n = 0;
  std::vector<double> betas;
  std::vector<double> alphas;
  long trials = 0;
  SweepMode mode = SweepMode::Recovery;
  std::uint64_t seed = 0;
  std::string out;         // output path stem
  bool trial_log = false;  // per-trial CSV next to the aggregates

  void validate() const {
    if (n < 2) throw DomainError("SweepConfig: n must be >= 2");
    if (trials < 1) throw DomainError("SweepConfig: trials must be >= 1");
    if (betas.empty() || alphas.empty()) {
      throw DomainError("SweepConfig: betas and alphas must be non-empty");
    }
    for (double b : betas) {
      if (!(b > 0.0 && b < 1.0)) throw DomainError("SweepConfig: betas must lie in (0, 1)");
    }
    for (double a : alphas) {
      if (!(a > 0.0 && a < 1.0)) throw DomainError("SweepConfig: alphas must lie in (0, 1)");
    }
  }
};

// One (alpha, beta) grid point. Rounding rule: k = round(beta*n),
// m = round(alpha*n), clamped to [1, n-1]; recorded in the output metadata.
struct PhaseCell {
  double beta = 0.0;
  double alpha = 0.0;
  Index n = 0;
  Index m = 0;
  Index k = 0;
  long trials = 0;
  long recovery_successes = 0;
  long trapped = 0;
  long escaped = 0;
  long indeterminate = 0;
  long agreement = 0;
  std::uint64_t seed_base = 0;
};

struct TrialRecord {
  std::size_t cell_index = 0;
  long trial = 0;
  std::uint64_t seed = 0;
  int recovery_success = -1;  // -1 when recovery was not run
  char verdict = '-';         // 'T', 'E', 'I', or '-' when the trap test was not run
  int agree = -1;             // -1 when non-comparable
};

struct SweepResult {
  std::vector<PhaseCell> cells;
  std::vector<TrialRecord> trials;
};

inline ProblemGeometry cell_geometry(Index n, double beta, double alpha) {
  const Index k = std::clamp<Index>(std::llround(beta * static_cast<double>(n)), 0, n);
  const Index m = std::clamp<Index>(std::llround(alpha * static_cast<double>(n)), 1, n - 1);
  return ProblemGeometry{n, m, k};
}

// Sweeps the grid with per-trial seeds hash(master, cell, trial). Trials are
// independent work items; the fold into cells runs in index order, so the
// output is identical for any worker count.
inline SweepResult run_sweep(const SweepConfig& config, int jobs = 1,
                             const RecoveryOptions& rec_opts = {},
                             const TrapOptions& trap_opts = {}) {
  config.validate();
  SweepResult result;
  for (double beta : config.betas) {
    for (double alpha : config.alphas) {
      const ProblemGeometry geom = cell_geometry(config.n, beta, alpha);
      PhaseCell cell;
      cell.beta = beta;
      cell.alpha = alpha;
      cell.n = geom.n;
      cell.m = geom.m;
      cell.k = geom.k;
      cell.trials = config.trials;
      cell.seed_base = derive_seed(config.seed, result.cells.size());
      result.cells.push_back(cell);
    }
  }

  const std::size_t ncells = result.cells.size();
  const std::size_t total = ncells * static_cast<std::size_t>(config.trials);
  result.trials.resize(total);

  parallel_for(total, jobs, [&](std::size_t idx) {
    const std::size_t cell_index = idx / static_cast<std::size_t>(config.trials);
    const long trial = static_cast<long>(idx % static_cast<std::size_t>(config.trials));
    const PhaseCell& cell = result.cells[cell_index];
    const ProblemGeometry geom{cell.n, cell.m, cell.k};
    const std::uint64_t trial_seed =
        derive_seed(cell.seed_base, static_cast<std::uint64_t>(trial));

    TrialRecord rec;
    rec.cell_index = cell_index;
    rec.trial = trial;
    rec.seed = trial_seed;
    try {
      switch (config.mode) {
        case SweepMode::Recovery: {
          rec.recovery_success = recovery_trial(geom, trial_seed, rec_opts).success ? 1 : 0;
          break;
        }
        case SweepMode::Trap: {
          const GaussianMatrix A =
              sample_gaussian(geom.m, geom.n, derive_seed(trial_seed, 0));
          const TrapVerdict v = trap_test(ConeSpec{geom.n, geom.k}, null_space_basis(A), trap_opts);
          rec.verdict = v.outcome == TrapOutcome::Trapped   ? 'T'
                        : v.outcome == TrapOutcome::Escaped ? 'E'
                                                            : 'I';
          break;
        }
        case SweepMode::Both: {
          const AgreementRecord a = recovery_vs_trap(geom, trial_seed, rec_opts, trap_opts);
          rec.recovery_success = a.recovery.success ? 1 : 0;
          rec.verdict = a.trap.outcome == TrapOutcome::Trapped   ? 'T'
                        : a.trap.outcome == TrapOutcome::Escaped ? 'E'
                                                                 : 'I';
          if (a.agree.has_value()) rec.agree = *a.agree ? 1 : 0;
          break;
        }
      }
    } catch (const Error&) {
      // A failed trial is recorded, not fatal: no success, indeterminate verdict.
      if (config.mode != SweepMode::Trap) rec.recovery_success = 0;
      if (config.mode != SweepMode::Recovery) rec.verdict = 'I';
    }
    result.trials[idx] = rec;
  });

  for (const TrialRecord& rec : result.trials) {
    PhaseCell& cell = result.cells[rec.cell_index];
    if (rec.recovery_success == 1) ++cell.recovery_successes;
    if (rec.verdict == 'T') ++cell.trapped;
    else if (rec.verdict == 'E') ++cell.escaped;
    else if (rec.verdict == 'I') ++cell.indeterminate;
    if (rec.agree == 1) ++cell.agreement;
  }
  if (config.mode == SweepMode::Recovery) result.trials.shrink_to_fit();
  return result;
}

// Logistic fit of success rate vs alpha over one beta column; reports the
// 50% crossing and a parametric-bootstrap percentile interval.
struct CrossingFit {
  double alpha_50 = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double intercept = 0.0;
  double slope = 0.0;
};

namespace detail {

struct LogisticFit {
  double b0 = 0.0, b1 = 0.0;
  bool ok = false;
};

inline LogisticFit fit_logistic(const std::vector<double>& x, const std::vector<double>& s,
                                const std::vector<double>& t) {
  const std::size_t n = x.size();
  double total_s = 0.0, total_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_s += s[i];
    total_t += t[i];
  }
  const double pbar = std::clamp(total_s / total_t, 1e-9, 1.0 - 1e-9);
  LogisticFit fit;
  fit.b0 = std::log(pbar / (1.0 - pbar));
  fit.b1 = 0.0;

  for (int it = 0; it < 200; ++it) {
    double g0 = 0.0, g1 = 0.0, h00 = 1e-9, h01 = 0.0, h11 = 1e-9;
    for (std::size_t i = 0; i < n; ++i) {
      const double eta = fit.b0 + fit.b1 * x[i];
      const double p = 0.5 * (1.0 + std::tanh(0.5 * eta));
      const double r = s[i] - t[i] * p;
      const double wgt = std::max(t[i] * p * (1.0 - p), 0.0);
      g0 += r;
      g1 += r * x[i];
      h00 += wgt;
      h01 += wgt * x[i];
      h11 += wgt * x[i] * x[i];
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(std::fabs(det) > 1e-300)) return fit;
    double d0 = (h11 * g0 - h01 * g1) / det;
    double d1 = (h00 * g1 - h01 * g0) / det;
    const double norm = std::hypot(d0, d1);
    if (norm > 50.0) {
      d0 *= 50.0 / norm;
      d1 *= 50.0 / norm;
    }
    fit.b0 += d0;
    fit.b1 += d1;
    if (norm <= 1e-10) break;
  }
  fit.ok = std::isfinite(fit.b0) && std::isfinite(fit.b1);
  return fit;
}

}  // namespace detail

inline CrossingFit fit_crossing(const std::vector<PhaseCell>& cells, long bootstrap = 200,
                                std::uint64_t seed = 0x6d657368ull) {
  if (cells.size() < 5) throw DomainError("fit_crossing: needs at least 5 cells");
  std::vector<PhaseCell> sorted = cells;
  std::sort(sorted.begin(), sorted.end(),
            [](const PhaseCell& a, const PhaseCell& b) { return a.alpha < b.alpha; });

  std::vector<double> x, s, t;
  for (const PhaseCell& c : sorted) {
    if (c.trials < 1) throw DomainError("fit_crossing: cell with no trials");
    x.push_back(c.alpha);
    s.push_back(static_cast<double>(c.recovery_successes));
    t.push_back(static_cast<double>(c.trials));
  }

  const double lo = x.front(), hi = x.back();
  auto crossing_of = [&](const detail::LogisticFit& f) -> double {
    if (!f.ok || !(f.b1 > 1e-9)) return std::numeric_limits<double>::quiet_NaN();
    const double c = -f.b0 / f.b1;
    if (!(c >= lo && c <= hi)) return std::numeric_limits<double>::quiet_NaN();
    return c;
  };

  const detail::LogisticFit fit = detail::fit_logistic(x, s, t);
  const double alpha_50 = crossing_of(fit);
  if (!std::isfinite(alpha_50)) {
    throw NoCrossingError("fit_crossing: no 50% crossing inside the alpha grid");
  }

  // Parametric bootstrap around the empirical rates.
  std::vector<double> crossings;
  crossings.reserve(static_cast<std::size_t>(bootstrap));
  for (long b = 0; b < bootstrap; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::vector<double> sb(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double p = s[i] / t[i];
      long count = 0;
      for (long j = 0; j < static_cast<long>(t[i]); ++j) {
        if (rng.uniform() <= p) ++count;
      }
      sb[i] = static_cast<double>(count);
    }
    const double c = crossing_of(detail::fit_logistic(x, sb, t));
    if (std::isfinite(c)) crossings.push_back(c);
  }

  CrossingFit out;
  out.alpha_50 = alpha_50;
  out.intercept = fit.b0;
  out.slope = fit.b1;
  if (crossings.empty()) {
    out.ci_low = out.ci_high = alpha_50;
  } else {
    std::sort(crossings.begin(), crossings.end());
    const std::size_t nb = crossings.size();
    out.ci_low = crossings[static_cast<std::size_t>(0.025 * static_cast<double>(nb - 1))];
    out.ci_high = crossings[static_cast<std::size_t>(std::ceil(0.975 * static_cast<double>(nb - 1)))];
  }
  return out;
}

// ---- output emission ----

enum class EmitFormat { Csv, Json, Both };

inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("emit: cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error("emit: write failed for " + path);
}

inline std::string cells_csv(const std::vector<PhaseCell>& cells) {
  std::string csv =
      "beta,alpha,n,m,k,trials,recovery_successes,trapped,escaped,indeterminate,"
      "agreement,seed_base\n";
  for (const PhaseCell& c : cells) {
    csv += format_double(c.beta) + ',' + format_double(c.alpha) + ',' +
           std::to_string(c.n) + ',' + std::to_string(c.m) + ',' + std::to_string(c.k) +
           ',' + std::to_string(c.trials) + ',' + std::to_string(c.recovery_successes) +
           ',' + std::to_string(c.trapped) + ',' + std::to_string(c.escaped) + ',' +
           std::to_string(c.indeterminate) + ',' + std::to_string(c.agreement) + ',' +
           std::to_string(c.seed_base) + '\n';
  }
  return csv;
}

inline nlohmann::ordered_json config_json(const SweepConfig& config) {
  nlohmann::ordered_json j;
  j["n"] = config.n;
  j["betas"] = config.betas;
  j["alphas"] = config.alphas;
  j["trials"] = config.trials;
  j["mode"] = sweep_mode_name(config.mode);
  j["seed"] = config.seed;
  j["out"] = config.out;
  j["trial_log"] = config.trial_log;
  return j;
}

inline std::string plot_script(const std::string& stem, bool overlay) {
  std::string py;
  py += "#!/usr/bin/env python3\n";
  py += "# Plots the sweep results emitted next to this script.\n";
  py += "import csv\n";
  py += "import matplotlib.pyplot as plt\n\n";
  py += "rows = list(csv.DictReader(open('" + stem + ".csv')))\n";
  py += "betas = sorted({r['beta'] for r in rows})\n";
  py += "fig, ax = plt.subplots()\n";
  py += "for b in betas:\n";
  py += "    col = [r for r in rows if r['beta'] == b]\n";
  py += "    col.sort(key=lambda r: float(r['alpha']))\n";
  py += "    a = [float(r['alpha']) for r in col]\n";
  py += "    rate = [int(r['recovery_successes']) / max(int(r['trials']), 1) for r in col]\n";
  py += "    ax.plot(a, rate, marker='o', label=f'beta={b} recovery')\n";
  py += "    if any(int(r['trapped']) + int(r['escaped']) + int(r['indeterminate']) for r in col):\n";
  py += "        esc = [int(r['escaped']) / max(int(r['trials']), 1) for r in col]\n";
  py += "        ax.plot(a, esc, marker='x', linestyle='--', label=f'beta={b} escaped')\n";
  if (overlay) {
    py += "curve = list(csv.DictReader(open('" + stem + "_curve.csv')))\n";
    py += "for r in curve:\n";
    py += "    ax.axvline(float(r['alpha_w']), color='gray', linestyle=':',\n";
    py += "               label=f\"alpha_w(beta={r['beta']})\")\n";
  }
  py += "ax.set_xlabel('alpha = m/n')\n";
  py += "ax.set_ylabel('rate')\n";
  py += "ax.legend()\n";
  py += "fig.savefig('" + stem + ".png', dpi=150)\n";
  py += "print('wrote " + stem + ".png')\n";
  return py;
}

}  // namespace detail

// Writes <out>.csv and/or <out>.json, an optional <out>_curve.csv overlay,
// a convenience plotting script, and the per-trial log when enabled.
// Returns the list of paths written. Reruns with the same inputs produce
// byte-identical files.
inline std::vector<std::string> emit(const SweepResult& result, const SweepConfig& config,
                                     const std::vector<CurveEntry>& overlay = {},
                                     EmitFormat format = EmitFormat::Both) {
  if (config.out.empty()) throw DomainError("emit: config.out must be set");
  std::vector<std::string> files;
  const std::string& stem = config.out;

  if (format == EmitFormat::Csv || format == EmitFormat::Both) {
    detail::write_file(stem + ".csv", detail::cells_csv(result.cells));
    files.push_back(stem + ".csv");
  }

  if (format == EmitFormat::Json || format == EmitFormat::Both) {
    nlohmann::ordered_json j;
    j["meta"] = {{"tool", "meshtrap"},
                 {"version", kVersion},
                 {"rounding", "k=round(beta*n); m=round(alpha*n); clamped to [0,n] and [1,n-1]"},
                 {"config", detail::config_json(config)}};
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const PhaseCell& c : result.cells) {
      cells.push_back({{"beta", c.beta},
                       {"alpha", c.alpha},
                       {"n", c.n},
                       {"m", c.m},
                       {"k", c.k},
                       {"trials", c.trials},
                       {"recovery_successes", c.recovery_successes},
                       {"trapped", c.trapped},
                       {"escaped", c.escaped},
                       {"indeterminate", c.indeterminate},
                       {"agreement", c.agreement},
                       {"seed_base", c.seed_base}});
    }
    j["cells"] = std::move(cells);
    detail::write_file(stem + ".json", j.dump(2) + "\n");
    files.push_back(stem + ".json");
  }

  if (!overlay.empty()) {
    std::string csv = "beta,alpha_w\n";
    for (const CurveEntry& e : overlay) {
      if (e.point.has_value()) {
        csv += format_double(e.beta_w) + ',' + format_double(e.point->alpha_w) + '\n';
      }
    }
    detail::write_file(stem + "_curve.csv", csv);
    files.push_back(stem + "_curve.csv");
  }

  if (config.trial_log) {
    std::string csv = "cell,beta,alpha,trial,seed,recovery_success,verdict,agree\n";
    for (const TrialRecord& r : result.trials) {
      const PhaseCell& c = result.cells[r.cell_index];
      csv += std::to_string(r.cell_index) + ',' + format_double(c.beta) + ',' +
             format_double(c.alpha) + ',' + std::to_string(r.trial) + ',' +
             std::to_string(r.seed) + ',' + std::to_string(r.recovery_success) + ',' +
             r.verdict + ',' + std::to_string(r.agree) + '\n';
    }
    detail::write_file(stem + "_trials.csv", csv);
    files.push_back(stem + "_trials.csv");
  }

  detail::write_file(stem + "_plot.py", detail::plot_script(stem, !overlay.empty()));
  files.push_back(stem + "_plot.py");
  return files;
}

// Strict config parsing: unknown keys are rejected.
inline SweepConfig parse_sweep_config(const nlohmann::json& j) {
  static const std::vector<std::string> known = {"n",    "betas", "alphas",   "trials",
                                                 "mode", "seed",  "out",      "trial_log"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw DomainError("SweepConfig: unknown key '" + it.key() + "'");
    }
  }
  SweepConfig config;
  try {
    config.n = j.at("n").get<Index>();
    config.betas = j.at("betas").get<std::vector<double>>();
    config.alphas = j.at("alphas").get<std::vector<double>>();
    config.trials = j.at("trials").get<long>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "recovery") config.mode = SweepMode::Recovery;
    else if (mode == "trap") config.mode = SweepMode::Trap;
    else if (mode == "both") config.mode = SweepMode::Both;
    else throw DomainError("SweepConfig: mode must be recovery, trap, or both");
    config.seed = j.at("seed").get<std::uint64_t>();
    config.out = j.at("out").get<std::string>();
    if (j.contains("trial_log")) config.trial_log = j.at("trial_log").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("SweepConfig: ") + e.what());
  }
  config.validate();
  return config;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("load_sweep_config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("load_sweep_config: ") + e.what());
  }
  return parse_sweep_config(j);
}

}  // namespace meshtrap
