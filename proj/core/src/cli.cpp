#include "agdcert/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "agdcert/agd.hpp"
#include "agdcert/pep.hpp"
#include "agdcert/problems.hpp"
#include "agdcert/sdp.hpp"

namespace agdcert {

namespace {

std::string resolve_out_path(const std::string& path) {
  if (path.empty()) return path;
  const char* base = std::getenv("AGDCERT_OUT_DIR");
  if (base == nullptr || *base == '\0') return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base) / p).string();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(resolve_out_path(out_path), text);
  }
}

Geometry apply_geometry_override(const ProblemInstance& p, const std::string& override_name) {
  if (override_name.empty()) return p.geometry;
  if (override_name == "euclidean") return Geometry::euclidean(p.geometry.set);
  if (override_name == "entropy") return Geometry::entropy(p.geometry.set);
  throw ConfigError("geometry override must be 'euclidean' or 'entropy'");
}

struct AgdRunResult {
  Schedule sched;
  Trajectory traj;
  ReferenceOptimum ref;
  std::vector<BoundReport> reports;
  double slack_tolerance = 0.0;
};

AgdRunResult run_problem(const ProblemInstance& p, const Geometry& geom,
                         const RunConfig& config) {
  double L = config.lipschitz_override;
  if (L <= 0.0) L = lipschitz(p.objective, geom.norm).value;
  if (L <= 0.0)
    throw ConfigError("objective has no certified curvature; pass an explicit L");

  AgdRunResult r{Schedule::make(config.schedule, L, config.iters),
                 Trajectory{},
                 ReferenceOptimum{},
                 {},
                 0.0};
  r.traj = run_agd(p.objective, geom, r.sched, p.x0, config.iters);
  r.ref = reference_optimum(p.objective, geom);

  r.reports = avg_bounds(r.sched, r.traj, geom, r.ref.point, r.ref.value);
  auto eval = eval_bounds(r.sched, r.traj, geom, r.ref.point, r.ref.value, true);
  r.reports.insert(r.reports.end(), std::make_move_iterator(eval.begin()),
                   std::make_move_iterator(eval.end()));
  r.reports.push_back(eval_bound_unconstrained(r.sched, r.traj, geom, r.ref.point, r.ref.value));
  r.slack_tolerance =
      1e-9 * (1.0 + std::fabs(r.traj.f_avg[0])) + r.ref.enclosure_width;
  return r;
}

nlohmann::json bounds_to_json(const std::vector<BoundReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rep : reports) {
    nlohmann::json jb;
    jb["id"] = rep.id;
    jb["applicable"] = rep.applicable;
    if (!rep.applicable) {
      jb["note"] = rep.note;
    } else {
      jb["k"] = rep.k;
      jb["bound"] = rep.bound;
      jb["gap"] = rep.gap;
      jb["slack"] = rep.slack;
    }
    arr.push_back(std::move(jb));
  }
  return arr;
}

std::string run_to_json(const AgdRunResult& r) {
  nlohmann::json j;
  j["schedule"] = r.sched.name();
  j["lipschitz"] = r.sched.lipschitz();
  j["steps"] = r.traj.steps;
  j["reference"] = {
      {"value", r.ref.value},
      {"method", r.ref.method == ReferenceOptimum::Method::closed_form ? "closed_form"
                                                                       : "long_run"},
      {"enclosure_width", r.ref.enclosure_width},
      {"point", r.ref.point}};
  nlohmann::json t;
  std::vector<int> ks(r.traj.steps);
  for (int k = 1; k <= r.traj.steps; ++k) ks[k - 1] = k;
  t["k"] = ks;
  t["f_xbar"] = Vec(r.traj.f_avg.begin() + 1, r.traj.f_avg.end());
  t["f_xunder"] = Vec(r.traj.f_eval.begin() + 1, r.traj.f_eval.end());
  t["vi_residual"] = Vec(r.traj.vi_residual.begin() + 1, r.traj.vi_residual.end());
  j["trajectory"] = std::move(t);
  j["bounds"] = bounds_to_json(r.reports);
  return j.dump(2) + "\n";
}

}  // namespace

int cmd_agd_run(const RunConfig& config) {
  try {
    if (config.iters < 1) throw ConfigError("--iters must be at least 1");
    const ProblemInstance p = load_problem_file(config.problem_path);
    const Geometry geom = apply_geometry_override(p, config.geometry_override);
    const AgdRunResult r = run_problem(p, geom, config);

    bool violated = false;
    for (const auto& rep : r.reports)
      if (rep.applicable && rep.min_slack() < -r.slack_tolerance) violated = true;

    const bool certify = config.command == "agd certify";
    std::vector<DeltaBreakdown> deltas;
    if (certify) {
      SplitMix64 rng(config.seed);
      for (int i = 0; i < config.ref_points; ++i) {
        const Vec x_ref = geom.dgf == Geometry::Dgf::negative_entropy
                              ? sample_feasible_interior(geom.set, rng)
                              : sample_feasible(geom.set, rng);
        deltas.push_back(compute_delta(r.sched, r.traj, p.objective, geom, x_ref));
      }
      for (const auto& d : deltas) {
        const double tol = 1e-8 * (1.0 + std::fabs(r.traj.f_eval[r.traj.steps]));
        if (d.slack < -tol) violated = true;
      }
    }

    if (config.format == "json") {
      nlohmann::json j = nlohmann::json::parse(run_to_json(r));
      if (certify) {
        nlohmann::json darr = nlohmann::json::array();
        for (const auto& d : deltas)
          darr.push_back({{"bound", d.bound_value},
                          {"gap", d.gap},
                          {"slack", d.slack},
                          {"total", d.total}});
        j["delta_checks"] = std::move(darr);
      }
      emit(j.dump(2) + "\n", config.out_path);
    } else {
      emit(trajectory_csv(r.traj, r.ref.value, r.reports), config.out_path);
    }

    if (certify) {
      for (const auto& rep : r.reports) {
        if (!rep.applicable) {
          std::cout << "bound " << rep.id << ": not applicable (" << rep.note << ")\n";
        } else {
          const bool ok = rep.min_slack() >= -r.slack_tolerance;
          std::cout << "bound " << rep.id << ": min_slack=" << fmt_double(rep.min_slack())
                    << (ok ? " PASS" : " FAIL") << "\n";
        }
      }
      for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double tol = 1e-8 * (1.0 + std::fabs(r.traj.f_eval[r.traj.steps]));
        std::cout << "delta check " << i << ": slack=" << fmt_double(deltas[i].slack)
                  << (deltas[i].slack >= -tol ? " PASS" : " FAIL") << "\n";
      }
    }
    return violated ? kExitViolation : kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_gradcheck(const RunConfig& config) {
  try {
    const ProblemInstance p = load_problem_file(config.problem_path);
    SplitMix64 rng(config.seed);
    const double spread = 0.5 * (1.0 + norm_inf(p.x0));
    double worst = 0.0;
    for (int i = 0; i < config.gradcheck_points; ++i) {
      Vec x(p.x0.size());
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = p.x0[j] + spread * rng.normal();
      worst = std::max(worst, finite_diff_check(p.objective, x, config.gradcheck_step));
    }
    std::cout << "gradcheck: max relative error " << fmt_double(worst) << " over "
              << config.gradcheck_points << " points\n";
    return worst <= 1e-6 ? kExitOk : kExitViolation;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_pep(const RunConfig& config) {
  try {
    SweepOptions opt;
    opt.schedule_name = config.schedule;
    opt.lipschitz = config.lipschitz;
    opt.radius = config.radius;
    opt.solver.tolerance = config.tolerance;
    opt.solver.max_iter = config.max_iter;
    opt.threads = config.threads;
    opt.warm_start = config.warm_start;
    if (opt.warm_start && opt.threads > 1)
      throw ConfigError("--warm-start requires --threads 1");

    if (config.command == "pep sweep") {
      const std::string cert_dir = resolve_out_path(config.cert_dir);
      if (!cert_dir.empty()) {
        opt.on_certificate = [&, cert_dir](const PepInstance& inst, const PepCertificate& c) {
          const std::string name =
              "cert_" + to_string(c.mode) + "_N" + std::to_string(c.n) + ".json";
          write_text_file((std::filesystem::path(cert_dir) / name).string(),
                          certificate_to_json(inst, c, config.timing));
        };
      }
      std::vector<PepMode> modes;
      for (const auto& m : config.modes) modes.push_back(pep_mode_from_string(m));
      const auto rows = pep_sweep(config.n_min, config.n_max, modes, opt);
      emit(sweep_csv(rows, config.timing), config.out_path);
      bool any_error = false, all_verified = true;
      for (const auto& r : rows) {
        if (!r.error.empty()) any_error = true;
        if (!r.verified) all_verified = false;
      }
      if (any_error) return kExitNumerical;
      return all_verified ? kExitOk : kExitViolation;
    }

    if (config.command == "pep solve") {
      const PepInstance inst =
          make_pep_instance(config.schedule, config.n, config.lipschitz, config.radius);
      const PepCertificate cert = solve_pep(inst, pep_mode_from_string(config.mode), opt.solver);
      emit(certificate_to_json(inst, cert, config.timing), config.out_path);
      return cert.verified ? kExitOk : kExitViolation;
    }

    if (config.command == "pep verify") {
      const auto [inst, cert] = certificate_from_json(read_text_file(config.certificate_path));
      const VerifyResult vr = verify_certificate(inst, cert.weights, cert.d);
      std::cout << "linear_residual=" << fmt_double(vr.linear_residual)
                << " min_eigenvalue=" << fmt_double(vr.min_eigenvalue)
                << " verified=" << (vr.verified ? "true" : "false") << "\n";
      return vr.verified ? kExitOk : kExitViolation;
    }

    if (config.command == "pep table1") {
      const Matrix table = fixed_weight_table(config.n_min, config.n_max, opt);
      std::vector<std::string> cols = {"k"};
      for (int n = config.n_min; n <= config.n_max; ++n)
        cols.push_back("N" + std::to_string(n));
      CsvWriter csv(cols);
      for (int k = 1; k <= config.n_max; ++k) {
        std::vector<std::string> row = {std::to_string(k)};
        for (int n = config.n_min; n <= config.n_max; ++n) {
          const double v = table(k - 1, n - config.n_min);
          row.push_back(std::isnan(v) ? "" : fmt_double(v));
        }
        csv.add_row(row);
      }
      emit(csv.str(), config.out_path);
      return kExitOk;
    }

    throw ConfigError("unknown pep command '" + config.command + "'");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_sdp_solve(const RunConfig& config) {
  try {
    const SdpInstance inst = sdp_instance_from_json(read_text_file(config.instance_path));
    SolveOptions opt;
    opt.tolerance = config.tolerance;
    opt.max_iter = config.max_iter;
    const SdpSolution sol = solve_conic(inst, opt);
    emit(sdp_solution_to_json(inst, sol), config.out_path);
    std::cout << "status=" << to_string(sol.status)
              << " objective=" << fmt_double(sol.objective_value)
              << " iterations=" << sol.iterations << "\n";
    return sol.status == SolveStatus::solved ? kExitOk : kExitNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int run_main(const std::vector<std::string>& args) {
  RunConfig config;

  CLI::App app{"accelerated-method convergence certification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", config.out_path, "output file (stdout when omitted)");
  app.add_option("--format", config.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", config.seed, "random seed");
  app.add_option("--threads", config.threads, "worker threads for sweeps")
      ->check(CLI::PositiveNumber);

  CLI::App* agd = app.add_subcommand("agd", "run the accelerated method");
  agd->require_subcommand(1);
  agd->fallthrough();
  for (const char* name : {"run", "certify"}) {
    CLI::App* sub = agd->add_subcommand(
        name, std::string(name) == "run" ? "run and emit the trajectory with bound reports"
                                         : "run and check every applicable bound");
    sub->add_option("--problem", config.problem_path, "problem JSON file")->required();
    sub->add_option("--schedule", config.schedule, "parameter schedule: s1, s2 or s3");
    sub->add_option("--iters", config.iters, "number of steps")->required();
    sub->add_option("--geometry", config.geometry_override,
                    "override the problem geometry (euclidean or entropy)");
    sub->add_option("--L", config.lipschitz_override, "override the smoothness constant");
    sub->add_option("--ref-points", config.ref_points,
                    "number of sampled reference points (certify)");
  }

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  gradcheck->add_option("--problem", config.problem_path, "problem JSON file")->required();
  gradcheck->add_option("--points", config.gradcheck_points, "number of sampled points");
  gradcheck->add_option("--step", config.gradcheck_step, "finite-difference step");

  CLI::App* pep = app.add_subcommand("pep", "worst-case certificate problems");
  pep->require_subcommand(1);
  pep->fallthrough();

  CLI::App* sweep = pep->add_subcommand("sweep", "solve a range of horizons");
  sweep->add_option("--n-min", config.n_min, "smallest horizon");
  sweep->add_option("--n-max", config.n_max, "largest horizon");
  sweep->add_option("--modes", config.modes, "comma-separated: general,fixed,conjecture")
      ->delimiter(',');
  sweep->add_option("--schedule", config.schedule, "parameter schedule");
  sweep->add_option("--L", config.lipschitz, "smoothness constant");
  sweep->add_option("--R", config.radius, "initial-distance radius");
  sweep->add_option("--tol", config.tolerance, "solver tolerance");
  sweep->add_option("--max-iter", config.max_iter, "solver iteration cap");
  sweep->add_option("--cert-dir", config.cert_dir, "directory for per-horizon certificates");
  sweep->add_flag("--warm-start", config.warm_start, "carry solutions across horizons");
  sweep->add_flag("--timing", config.timing, "record wall-clock seconds in outputs");

  CLI::App* solve = pep->add_subcommand("solve", "solve one horizon and emit the certificate");
  solve->add_option("--n", config.n, "horizon")->required();
  solve->add_option("--mode", config.mode, "general, fixed or conjecture");
  solve->add_option("--schedule", config.schedule, "parameter schedule");
  solve->add_option("--L", config.lipschitz, "smoothness constant");
  solve->add_option("--R", config.radius, "initial-distance radius");
  solve->add_option("--tol", config.tolerance, "solver tolerance");
  solve->add_option("--max-iter", config.max_iter, "solver iteration cap");
  solve->add_flag("--timing", config.timing, "record wall-clock seconds in outputs");

  CLI::App* verify = pep->add_subcommand("verify", "re-check a stored certificate");
  verify->add_option("--certificate", config.certificate_path, "certificate JSON")->required();

  CLI::App* table = pep->add_subcommand("table1", "solved fixed-mode prox weights, scaled");
  table->add_option("--n-min", config.n_min, "smallest horizon");
  table->add_option("--n-max", config.n_max, "largest horizon")->required();
  table->add_option("--tol", config.tolerance, "solver tolerance");
  table->add_option("--max-iter", config.max_iter, "solver iteration cap");

  CLI::App* sdp = app.add_subcommand("sdp", "standalone conic solves");
  sdp->fallthrough();
  CLI::App* sdp_solve = sdp->add_subcommand("solve", "solve an instance JSON");
  sdp_solve->add_option("--instance", config.instance_path, "instance JSON file")->required();
  sdp_solve->add_option("--tol", config.tolerance, "solver tolerance");
  sdp_solve->add_option("--max-iter", config.max_iter, "solver iteration cap");

  std::vector<const char*> argv;
  argv.push_back("agdcert");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (agd->parsed()) {
    config.command = agd->get_subcommand("run")->parsed() ? "agd run" : "agd certify";
    return cmd_agd_run(config);
  }
  if (gradcheck->parsed()) {
    config.command = "gradcheck";
    return cmd_gradcheck(config);
  }
  if (pep->parsed()) {
    for (const char* name : {"sweep", "solve", "verify", "table1"}) {
      if (pep->get_subcommand(name)->parsed()) {
        config.command = std::string("pep ") + name;
        return cmd_pep(config);
      }
    }
  }
  if (sdp->parsed()) {
    config.command = "sdp solve";
    return cmd_sdp_solve(config);
  }
  std::cerr << "error: no command given\n";
  return kExitConfig;
}

int run_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_main(args);
}

}  // namespace agdcert
