#include "rrsgd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rrsgd/analysis.hpp"
#include "rrsgd/engine.hpp"
#include "rrsgd/errors.hpp"
#include "rrsgd/io.hpp"
#include "rrsgd/model.hpp"
#include "rrsgd/theory.hpp"
#include "rrsgd/walk.hpp"

namespace rrsgd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kOutputDirEnv = "RRSGD_OUTPUT_DIR";

fs::path output_path(const std::string& given, const std::string& default_name) {
  if (!given.empty()) return given;
  const char* dir = std::getenv(kOutputDirEnv);
  return (dir && *dir) ? fs::path(dir) / default_name : fs::path(default_name);
}

// Appends `_tag` before the extension: out.csv -> out_reshuffle.csv.
fs::path tagged(const fs::path& path, const std::string& tag) {
  fs::path out = path;
  out.replace_filename(path.stem().string() + "_" + tag + path.extension().string());
  return out;
}

std::string csv_text(const CsvTable& table) {
  std::ostringstream s;
  write_csv(s, table);
  return s.str();
}

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------

struct ModelOpts {
  std::string kind = "logistic";
  std::string data;
  std::size_t n = 25;
  std::size_t m = 10;
  std::size_t p = 0;
  double rho = 0.1;
  std::uint64_t data_seed = 7;
  std::uint64_t design_seed = 11;

  void attach(CLI::App& app) {
    app.add_option("--model", kind, "Risk: logistic or quadratic")
        ->check(CLI::IsMember({"logistic", "quadratic"}))
        ->capture_default_str();
    app.add_option("--data", data, "Dataset CSV (otherwise generated)");
    app.add_option("--n", n, "Samples N when generating")->capture_default_str();
    app.add_option("--m", m, "Parameter dimension M")->capture_default_str();
    app.add_option("--p", p, "Target dimension for quadratic data (default M)");
    app.add_option("--rho", rho, "Logistic regularizer")->capture_default_str();
    app.add_option("--data-seed", data_seed, "Seed for generated data")->capture_default_str();
    app.add_option("--design-seed", design_seed, "Seed for the orthonormal design A")->capture_default_str();
  }
};

struct Problem {
  std::unique_ptr<LossModel> model;
  Vector w_star;
  NoiseStats stats;
  std::size_t n = 0;
  std::size_t m = 0;
};

Problem build_problem(const ModelOpts& o) {
  const bool logistic = o.kind == "logistic";
  std::optional<Dataset> data;
  if (!o.data.empty()) {
    data = dataset_from_table(read_csv_file(o.data));
    if (logistic && data->kind() != DatasetKind::labeled) {
      throw ValidationError("--data: logistic model needs a labeled dataset");
    }
    if (!logistic && data->kind() != DatasetKind::targets) {
      throw ValidationError("--data: quadratic model needs a targets dataset");
    }
  } else if (logistic) {
    data = synth_logistic_dataset(o.n, o.m, o.data_seed);
  } else {
    data = synth_targets_dataset(o.n, o.p ? o.p : o.m, o.data_seed);
  }

  Problem pr;
  if (logistic) {
    pr.model = logistic_model(*data, o.rho);
    pr.w_star = solve_minimizer(*pr.model).w_star;
  } else {
    if (o.m > data->dim()) throw ValidationError("--m must not exceed the target dimension");
    auto quad = std::make_unique<QuadraticModel>(random_orthonormal(data->dim(), o.m, o.design_seed), *data);
    pr.w_star = quad->closed_form_minimizer();
    pr.model = std::move(quad);
  }
  pr.stats = noise_stats(*pr.model, pr.w_star);
  pr.n = pr.model->n_samples();
  pr.m = pr.model->dim();
  return pr;
}

// ---------------------------------------------------------------------------

struct SimOpts {
  double mu = 1e-3;
  double decay_c = 0.0;
  std::size_t epochs = 0;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::string granularity = "epoch-start";
  std::size_t window_epochs = 0;
  double window_fraction = 0.25;
  std::size_t window_min = 50;
  unsigned workers = 0;
  bool strict = false;
  std::string start = "zero";

  void attach(CLI::App& app, bool with_mu) {
    if (with_mu) {
      app.add_option("--mu", mu, "Constant step size")->capture_default_str();
      app.add_option("--decay-c", decay_c, "Use mu(i) = c/(i+1) instead (needs --epochs)");
    }
    app.add_option("--epochs", epochs, "Epochs per trial (0 = automatic)")->capture_default_str();
    app.add_option("--trials", trials, "Independent trials")->capture_default_str();
    app.add_option("--seed", seed, "Base seed for the sampling streams")->capture_default_str();
    app.add_option("--granularity", granularity, "every-iterate or epoch-start")
        ->check(CLI::IsMember({"every-iterate", "epoch-start"}))
        ->capture_default_str();
    app.add_option("--window-epochs", window_epochs, "Steady-state window length (0 = fraction rule)");
    app.add_option("--window-fraction", window_fraction, "Trailing fraction for the window")->capture_default_str();
    app.add_option("--window-min", window_min, "Minimum window length")->capture_default_str();
    app.add_option("--workers", workers, "Worker threads (0 = all cores)")->capture_default_str();
    app.add_flag("--strict", strict, "Reject steps above nu/(3 delta^2 N)");
    app.add_option("--start", start, "Initial iterate: zero or star")
        ->check(CLI::IsMember({"zero", "star"}))
        ->capture_default_str();
  }

  WindowSpec window() const {
    WindowSpec w;
    w.fraction = window_fraction;
    w.min_epochs = window_min;
    if (window_epochs > 0) w.epochs = window_epochs;
    return w;
  }
};

struct SimResult {
  MsdCurve curve;
  std::optional<SteadyState> steady;
  std::optional<double> decay_slope;
  std::size_t epochs = 0;
  Trajectory first;
};

Vector initial_point(const Problem& pr, const SimOpts& s) {
  return s.start == "star" ? pr.w_star : Vector::Zero(static_cast<Eigen::Index>(pr.m));
}

std::size_t resolve_epochs(const Problem& pr, const SimOpts& s, double mu) {
  if (s.epochs > 0) return s.epochs;
  TheoryInputs in = TheoryInputs::from_stats(pr.stats, mu, pr.n);
  const double target = msd_uniform(in);
  const double initial = (initial_point(pr, s) - pr.w_star).squaredNorm();
  return auto_epochs(mu, pr.stats.nu_hessian, pr.n, initial, target, s.window()).total;
}

SimResult simulate(const Problem& pr, const SimOpts& s, SamplerKind sampler, double mu, bool decaying) {
  if (decaying && s.epochs == 0) throw ValidationError("--decay-c needs an explicit --epochs");
  if (s.trials < 1) throw ValidationError("--trials must be >= 1");
  TrialConfig cfg;
  cfg.model = pr.model.get();
  cfg.sampler = sampler;
  cfg.step = decaying ? StepSizeRule::decaying(s.decay_c) : StepSizeRule::constant(mu);
  cfg.run.epochs = decaying ? s.epochs : resolve_epochs(pr, s, mu);
  cfg.run.granularity = parse_granularity(s.granularity);
  cfg.run.strict = s.strict;
  cfg.w_star = pr.w_star;
  cfg.w0 = initial_point(pr, s);

  Ensemble ens = run_trials(cfg, s.trials, s.seed, s.workers);
  SimResult r;
  r.epochs = cfg.run.epochs;
  r.curve = summarize(ens);
  r.first = ens.trajectories.front();
  if (decaying) {
    r.decay_slope = decay_rate_fit(r.curve);
  } else {
    r.steady = steady_state_msd(r.curve, s.window());
  }
  return r;
}

std::optional<double> try_predict(double (*fn)(const TheoryInputs&), const TheoryInputs& in, json& warnings,
                                  const char* field) {
  try {
    return fn(in);
  } catch (const ValidationError& e) {
    warnings.push_back(std::string(field) + ": " + e.what());
    return std::nullopt;
  }
}

json window_json(const WindowSpec& w) {
  json j = {{"fraction", w.fraction}, {"min_epochs", w.min_epochs}};
  j["epochs"] = w.epochs ? json(*w.epochs) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------

struct GenDataOpts {
  std::string kind = "logistic";
  std::size_t n = 1000;
  std::size_t m = 10;
  double rho = 0.1;
  std::uint64_t seed = 7;
  std::string out;
};

int cmd_gen_data(const GenDataOpts& o, std::ostream& out) {
  const Dataset data =
      o.kind == "logistic" ? synth_logistic_dataset(o.n, o.m, o.seed) : synth_targets_dataset(o.n, o.m, o.seed);
  const fs::path path = output_path(o.out, "dataset.csv");
  write_text_file(path, csv_text(dataset_table(data)));
  out << "wrote " << path.string() << ": N=" << data.n_samples() << " M=" << data.dim();
  if (data.kind() == DatasetKind::labeled) {
    out << " positive_fraction=" << data.positive_fraction() << " rho=" << o.rho;
  }
  out << '\n';
  return kSuccess;
}

struct RunCmdOpts {
  ModelOpts model;
  SimOpts sim;
  std::vector<std::string> samplers = {"reshuffle"};
  std::string out;
  std::string summary;
  std::string trajectory;
};

int cmd_run(const RunCmdOpts& o, std::ostream& out) {
  const Problem pr = build_problem(o.model);
  const bool decaying = o.sim.decay_c > 0.0;
  const fs::path csv_path = output_path(o.out, "run.csv");
  const bool many = o.samplers.size() > 1;

  json runs = json::array();
  std::size_t epochs = 0;
  for (const std::string& name : o.samplers) {
    const SamplerKind kind = parse_sampler_kind(name);
    const SimResult r = simulate(pr, o.sim, kind, o.sim.mu, decaying);
    epochs = r.epochs;
    const fs::path path = many ? tagged(csv_path, name) : csv_path;
    write_text_file(path, csv_text(summary_table(r.curve)));
    if (!o.trajectory.empty()) {
      const fs::path tpath = many ? tagged(o.trajectory, name) : fs::path(o.trajectory);
      write_text_file(tpath, csv_text(trajectory_table(r.first)));
    }
    json entry = {{"sampler", name}, {"csv", path.string()}, {"epochs", r.epochs}};
    out << name << ": ";
    if (r.steady) {
      entry["steady_msd"] = r.steady->value;
      entry["steady_stderr"] = r.steady->std_error;
      entry["steady_msd_db"] = to_db(r.steady->value);
      entry["window_epochs"] = r.steady->window_epochs;
      out << "steady MSD " << r.steady->value << " (" << to_db(r.steady->value) << " dB) +/- "
          << r.steady->std_error;
    }
    if (r.decay_slope) {
      entry["decay_slope"] = *r.decay_slope;
      out << "final-decade log-log slope " << *r.decay_slope;
    }
    out << '\n';
    runs.push_back(entry);
  }

  json summary = {{"model", o.model.kind},
                  {"N", pr.n},
                  {"M", pr.m},
                  {"step", decaying ? json{{"kind", "decaying"}, {"c", o.sim.decay_c}}
                                    : json{{"kind", "constant"}, {"mu", o.sim.mu}}},
                  {"epochs", epochs},
                  {"trials", o.sim.trials},
                  {"seed", o.sim.seed},
                  {"granularity", o.sim.granularity},
                  {"window", window_json(o.sim.window())},
                  {"runs", runs}};
  fs::path jpath = o.summary.empty() ? fs::path(csv_path).replace_extension(".json") : fs::path(o.summary);
  write_text_file(jpath, summary.dump(2) + "\n");
  return kSuccess;
}

struct PredictOpts {
  ModelOpts model;
  double mu = 1e-3;
  std::string nu_choice = "bound";
  std::vector<std::size_t> n_scan;
  std::string out;
};

json predict_json(const Problem& pr, double mu, NuChoice nu_choice, const std::vector<std::size_t>& n_scan,
                  bool quadratic) {
  const TheoryInputs in = TheoryInputs::from_stats(pr.stats, mu, pr.n, nu_choice);
  json warnings = json::array();
  json j;
  j["N"] = pr.n;
  j["M"] = pr.m;
  j["mu"] = mu;
  j["nu"] = in.nu;
  j["delta"] = in.delta;
  j["K"] = in.K;
  j["lambda_min_H"] = pr.stats.nu_hessian;
  j["msd_rr_lt"] = nullable(try_predict(msd_rr_longterm, in, warnings, "msd_rr_lt"));
  j["msd_rr_hyperbolic"] = nullable(try_predict(msd_rr_hyperbolic, in, warnings, "msd_rr_hyperbolic"));
  j["msd_uniform"] = nullable(try_predict(msd_uniform, in, warnings, "msd_uniform"));
  j["m_rr"] = m_rr_factor(mu, pr.n);

  json bound = json::array();
  if (theorem3_step_ok(in)) {
    try {
      for (std::size_t i = 0; i <= pr.n; ++i) bound.push_back(msd_rr_periter_bound(in, i));
    } catch (const ValidationError& e) {
      warnings.push_back(std::string("per_iter_bound: ") + e.what());
      bound = json::array();
    }
  } else {
    warnings.push_back("per_iter_bound: mu exceeds 2/(delta + nu)");
  }
  j["per_iter_bound"] = bound;

  j["stability_bound"] = stability_bound(in);
  j["mismatch_bound"] = mismatch_bound(in);
  j["alpha1"] = rate_alpha_theorem1(in);
  j["alpha2"] = nullable(try_predict(rate_alpha_theorem2, in, warnings, "alpha2"));
  j["theorem1_step_ok"] = theorem1_step_ok(in);
  j["theorem2_step_ok"] = theorem2_step_ok(in);
  j["theorem3_step_ok"] = theorem3_step_ok(in);
  j["theorem1_step_limit"] = theorem1_step_limit(in.nu, in.delta, pr.n);
  if (!theorem1_step_ok(in)) warnings.push_back("stability_bound: mu exceeds nu/(3 delta^2 N)");

  if (quadratic) {
    // H = A^T A = I here, so Var(x) enters through Tr(R_s*).
    std::optional<double> closed;
    try {
      closed = quadratic_closed_form(mu, pr.n, pr.stats.K);
    } catch (const ValidationError& e) {
      warnings.push_back(std::string("quadratic_closed_form: ") + e.what());
    }
    j["quadratic_closed_form"] = nullable(closed);
  }

  if (!n_scan.empty()) {
    json table = json::array();
    for (std::size_t big_n : n_scan) {
      TheoryInputs scan = in;
      scan.N = big_n;
      json row = {{"N", big_n}};
      const auto lt = try_predict(msd_rr_longterm, scan, warnings, "n_scan");
      const auto us = try_predict(msd_uniform, scan, warnings, "n_scan");
      row["msd_rr_lt"] = nullable(lt);
      row["msd_uniform"] = nullable(us);
      row["ratio"] = (lt && us) ? json(*lt / *us) : json(nullptr);
      table.push_back(row);
    }
    j["n_scan"] = table;
  }
  j["warnings"] = warnings;
  return j;
}

NuChoice parse_nu_choice(const std::string& s) { return s == "hessian" ? NuChoice::hessian_min : NuChoice::global_bound; }

int cmd_predict(const PredictOpts& o, std::ostream& out) {
  const Problem pr = build_problem(o.model);
  const json j = predict_json(pr, o.mu, parse_nu_choice(o.nu_choice), o.n_scan, o.model.kind == "quadratic");
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    write_text_file(o.out, text);
  }
  return kSuccess;
}

struct SweepOpts {
  ModelOpts model;
  SimOpts sim;
  std::vector<double> mus;
  std::string sampler = "reshuffle";
  bool theory_only = false;
  std::string out;
  std::string fit;
};

std::optional<double> fit_or_null(const std::vector<std::pair<double, double>>& pts) {
  std::set<double> distinct;
  for (const auto& p : pts) distinct.insert(p.first);
  if (distinct.size() < 3) return std::nullopt;
  return slope_fit(pts).slope_db_per_decade;
}

int cmd_sweep(const SweepOpts& o, std::ostream& out) {
  {
    std::set<double> distinct(o.mus.begin(), o.mus.end());
    if (distinct.size() < 3) throw ValidationError("sweep: need at least 3 distinct --mus values");
  }
  const Problem pr = build_problem(o.model);
  const SamplerKind kind = parse_sampler_kind(o.sampler);
  constexpr double kDbPerLn = 10.0 / 2.302585092994046;

  std::vector<SweepRow> rows;
  std::vector<std::pair<double, double>> sim_pts, rr_pts, us_pts;
  json flagged = json::array();
  json warnings = json::array();
  for (double mu : o.mus) {
    const TheoryInputs in = TheoryInputs::from_stats(pr.stats, mu, pr.n);
    SweepRow row;
    row.mu = mu;
    row.predicted_rr = try_predict(msd_rr_longterm, in, warnings, "predicted_rr");
    row.predicted_us = msd_uniform(in);
    if (row.predicted_rr) rr_pts.emplace_back(mu, *row.predicted_rr);
    us_pts.emplace_back(mu, row.predicted_us);

    if (o.theory_only) {
      const std::optional<double> pick = kind == SamplerKind::uniform ? std::optional(row.predicted_us) : row.predicted_rr;
      row.msd = pick.value_or(std::numeric_limits<double>::quiet_NaN());
      row.stderr_db = 0.0;
    } else {
      try {
        const SimResult r = simulate(pr, o.sim, kind, mu, false);
        row.msd = r.steady->value;
        row.stderr_db = kDbPerLn * r.steady->std_error / r.steady->value;
      } catch (const StepSizeError& e) {
        flagged.push_back({{"mu", mu}, {"reason", e.what()}});
        row.msd = std::numeric_limits<double>::quiet_NaN();
        row.stderr_db = std::numeric_limits<double>::quiet_NaN();
      } catch (const DivergenceError& e) {
        flagged.push_back({{"mu", mu}, {"reason", e.what()}, {"iteration", e.iteration()}});
        row.msd = std::numeric_limits<double>::quiet_NaN();
        row.stderr_db = std::numeric_limits<double>::quiet_NaN();
      }
    }
    row.msd_db = to_db(row.msd);
    if (std::isfinite(row.msd) && row.msd > 0.0) sim_pts.emplace_back(mu, row.msd);
    rows.push_back(row);
  }

  const fs::path csv_path = output_path(o.out, "sweep.csv");
  write_text_file(csv_path, csv_text(sweep_table(rows)));
  if (sim_pts.size() < 3) throw ValidationError("sweep: fewer than 3 valid points remain for the fit");
  const SlopeFit fit = slope_fit(sim_pts);

  json j = {{"sampler", o.sampler},
            {"theory_only", o.theory_only},
            {"N", pr.n},
            {"M", pr.m},
            {"trials", o.sim.trials},
            {"slope_db_per_decade", fit.slope_db_per_decade},
            {"intercept_db", fit.intercept},
            {"r_squared", fit.r_squared},
            {"points", fit.points.size()},
            {"window", window_json(o.sim.window())},
            {"slope_predicted_rr", nullable(fit_or_null(rr_pts))},
            {"slope_predicted_us", nullable(fit_or_null(us_pts))},
            {"flagged", flagged},
            {"warnings", warnings}};
  const fs::path fit_path = o.fit.empty() ? fs::path(csv_path).replace_extension(".json") : fs::path(o.fit);
  write_text_file(fit_path, j.dump(2) + "\n");
  out << "slope " << fit.slope_db_per_decade << " dB/decade (r^2 " << fit.r_squared << ", " << fit.points.size()
      << " points)\n";
  return kSuccess;
}

struct WalkOpts {
  std::size_t n = 20;
  std::vector<double> betas = {1.0};
  bool verify = false;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 1;
  std::string out;
};

// Zero-sum set with Var(X) = 1.
WalkSet unit_walk_set(std::size_t n, std::uint64_t seed) {
  const Dataset d = synth_targets_dataset(n, 2, seed);
  WalkSet raw = WalkSet::centered(d.rows());
  return WalkSet(raw.vectors() / std::sqrt(raw.var()));
}

int cmd_walk(const WalkOpts& o, std::ostream& out) {
  if (o.n < 2) throw ValidationError("walk: --n must be >= 2");
  if (o.verify && o.n > kExhaustiveLimit) {
    throw ValidationError("walk: --verify enumerates all orderings and needs N <= " + std::to_string(kExhaustiveLimit));
  }
  std::optional<WalkSet> x;
  if (o.verify || o.mc_samples > 0) x = unit_walk_set(o.n, o.seed);

  std::vector<WalkRow> rows;
  double max_diff = 0.0;
  double max_z = 0.0;
  for (double beta : o.betas) {
    const std::vector<double> profile = bell_profile(o.n, beta);
    for (std::size_t k = 1; k <= o.n; ++k) {
      WalkRow row{beta, k, profile[k - 1], std::nullopt};
      if (o.verify) {
        row.f_bruteforce = f_bruteforce(k, *x, beta);
        max_diff = std::max(max_diff, std::abs(row.f_value - *row.f_bruteforce));
      }
      if (o.mc_samples > 0) {
        const MonteCarloEstimate mc = f_montecarlo(k, *x, beta, o.mc_samples, o.seed);
        if (mc.std_error > 0.0) max_z = std::max(max_z, std::abs(mc.value - row.f_value) / mc.std_error);
      }
      rows.push_back(row);
    }
  }
  const fs::path path = output_path(o.out, "walk.csv");
  write_text_file(path, csv_text(walk_table(rows)));
  out << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
  if (o.verify) out << "max |formula - bruteforce| = " << max_diff << '\n';
  if (o.mc_samples > 0) out << "max |formula - montecarlo| / stderr = " << max_z << '\n';
  return kSuccess;
}

struct CompareOpts {
  ModelOpts model;
  SimOpts sim;
  std::vector<std::string> samplers = {"reshuffle", "uniform"};
  std::string out;
};

int cmd_compare(const CompareOpts& o, std::ostream& out) {
  const Problem pr = build_problem(o.model);
  const TheoryInputs in = TheoryInputs::from_stats(pr.stats, o.sim.mu, pr.n);
  json warnings = json::array();
  json rows = json::array();
  for (const std::string& name : o.samplers) {
    const SamplerKind kind = parse_sampler_kind(name);
    const SimResult r = simulate(pr, o.sim, kind, o.sim.mu, false);
    std::optional<double> predicted;
    if (kind == SamplerKind::reshuffle) predicted = try_predict(msd_rr_longterm, in, warnings, "predicted");
    if (kind == SamplerKind::uniform) predicted = try_predict(msd_uniform, in, warnings, "predicted");
    const double sim_db = to_db(r.steady->value);
    json row = {{"sampler", name},
                {"epochs", r.epochs},
                {"steady_msd", r.steady->value},
                {"steady_stderr", r.steady->std_error},
                {"steady_msd_db", sim_db},
                {"predicted", nullable(predicted)}};
    row["predicted_db"] = predicted ? json(to_db(*predicted)) : json(nullptr);
    row["diff_db"] = predicted ? json(sim_db - to_db(*predicted)) : json(nullptr);
    out << name << ": simulated " << sim_db << " dB";
    if (predicted) out << ", predicted " << to_db(*predicted) << " dB";
    out << '\n';
    rows.push_back(row);
  }
  json j = {{"model", o.model.kind}, {"N", pr.n},          {"M", pr.m},        {"mu", o.sim.mu},
            {"trials", o.sim.trials}, {"window", window_json(o.sim.window())}, {"results", rows},
            {"warnings", warnings}};
  write_text_file(output_path(o.out, "compare.json"), j.dump(2) + "\n");
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SGD under random reshuffling, uniform and cyclic sampling", "rrsgd"};
  app.set_config("--config", "", "INI file; [section] names a subcommand, flags override it");
  app.require_subcommand(1);

  GenDataOpts gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset CSV");
  gen_cmd->add_option("--kind", gen.kind, "logistic or targets")
      ->check(CLI::IsMember({"logistic", "targets"}))
      ->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Samples N")->capture_default_str();
  gen_cmd->add_option("--m", gen.m, "Dimension")->capture_default_str();
  gen_cmd->add_option("--rho", gen.rho, "Regularizer recorded for the logistic model")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Data seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output CSV (default dataset.csv)");

  RunCmdOpts run_opts;
  auto* run_cmd = app.add_subcommand("run", "Simulate trials and write the ensemble MSD curve");
  run_opts.model.attach(*run_cmd);
  run_opts.sim.attach(*run_cmd, true);
  run_cmd->add_option("--sampler", run_opts.samplers, "uniform, reshuffle and/or cyclic")->capture_default_str();
  run_cmd->add_option("--out", run_opts.out, "Summary CSV (default run.csv)");
  run_cmd->add_option("--summary", run_opts.summary, "Steady-state JSON (default: CSV path with .json)");
  run_cmd->add_option("--trajectory", run_opts.trajectory, "Also write trial 0's trajectory CSV");

  PredictOpts pred;
  auto* pred_cmd = app.add_subcommand("predict", "Evaluate the steady-state predictors");
  pred.model.attach(*pred_cmd);
  pred_cmd->add_option("--mu", pred.mu, "Step size")->capture_default_str();
  pred_cmd->add_option("--nu-choice", pred.nu_choice, "bound (global constant) or hessian (lambda_min(H))")
      ->check(CLI::IsMember({"bound", "hessian"}))
      ->capture_default_str();
  pred_cmd->add_option("--n-scan", pred.n_scan, "Epoch lengths for the msd_rr_lt / msd_uniform table");
  pred_cmd->add_option("--out", pred.out, "JSON output (default stdout)");

  SweepOpts sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "MSD against step size with a dB/decade fit");
  sweep.model.attach(*sweep_cmd);
  sweep.sim.attach(*sweep_cmd, false);
  sweep_cmd->add_option("--mus", sweep.mus, "Step sizes (at least 3 distinct)")->required();
  sweep_cmd->add_option("--sampler", sweep.sampler, "uniform, reshuffle or cyclic")->capture_default_str();
  sweep_cmd->add_flag("--theory-only", sweep.theory_only, "Fit the predictor instead of simulating");
  sweep_cmd->add_option("--out", sweep.out, "Sweep CSV (default sweep.csv)");
  sweep_cmd->add_option("--fit", sweep.fit, "Fit JSON (default: CSV path with .json)");

  WalkOpts walk;
  auto* walk_cmd = app.add_subcommand("walk", "Random-walk profile f(n) for Var(X) = 1");
  walk_cmd->add_option("--n", walk.n, "Set size N")->capture_default_str();
  walk_cmd->add_option("--beta", walk.betas, "One or more beta values")->capture_default_str();
  walk_cmd->add_flag("--verify", walk.verify, "Add an exhaustive-enumeration column (N <= 8)");
  walk_cmd->add_option("--mc-samples", walk.mc_samples, "Also check against this many random orderings");
  walk_cmd->add_option("--seed", walk.seed, "Seed for the verification set")->capture_default_str();
  walk_cmd->add_option("--out", walk.out, "Profile CSV (default walk.csv)");

  CompareOpts cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Simulated steady MSD next to the predictors");
  cmp.model.attach(*cmp_cmd);
  cmp.sim.attach(*cmp_cmd, true);
  cmp_cmd->add_option("--sampler", cmp.samplers, "Samplers to compare")->capture_default_str();
  cmp_cmd->add_option("--out", cmp.out, "JSON output (default compare.json)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidation;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, out);
    if (*run_cmd) return cmd_run(run_opts, out);
    if (*pred_cmd) return cmd_predict(pred, out);
    if (*sweep_cmd) return cmd_sweep(sweep, out);
    if (*walk_cmd) return cmd_walk(walk, out);
    if (*cmp_cmd) return cmd_compare(cmp, out);
  } catch (const DivergenceError& e) {
    err << "error: diverged at iteration " << e.iteration() << ": " << e.what() << '\n';
    return kDivergence;
  } catch (const NonConvergenceError& e) {
    err << "error: " << e.what() << " (best gradient norm " << e.best_grad_norm() << ")\n";
    return kDivergence;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace rrsgd::cli
