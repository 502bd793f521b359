#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "spincm/errors.hpp"

namespace spincm::cli {

namespace {

using io::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

/// Writes to cfg.out when set, otherwise to `fallback`.
void emit(const RunConfig& cfg, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (cfg.out.empty()) {
    body(fallback);
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + cfg.out);
  body(f);
}

json stamp(const RunConfig& cfg, const Resolved& r) {
  return {{"spincm", io::version()}, {"command", cfg.command}, {"config_hash", r.config_hash}, {"seed", cfg.seed}};
}

void emit_json(const RunConfig& cfg, std::ostream& fallback, const json& j) {
  emit(cfg, fallback, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

std::string flag(bool b) { return b ? "true" : "false"; }

using Footer = std::vector<std::pair<std::string, std::string>>;

void add_audit(Footer& footer, const ModelSpec& spec, const Trajectory& traj, const std::vector<cplx>& z) {
  const auto rep = audit(spec, traj, z);
  footer.emplace_back("energy_drift", io::format_double(rep.energy_drift));
  footer.emplace_back("momentum_drift", io::format_double(rep.momentum_drift));
  footer.emplace_back("spectrum_drift", io::format_double(rep.spectrum_drift));
}

io::CsvHeader csv_header(const RunConfig& cfg, const Resolved& r, const Trajectory& traj) {
  return {cfg.command, r.config_hash, cfg.seed, to_string(traj.provenance), r.spec.n(), traj.reduced};
}

bool exact_supported(const Resolved& r, std::ostream& err) {
  if (r.spec.family() != Family::elliptic) return true;
  err << "exact: no exact solver for the elliptic family; its closed-form solution needs theta functions on the "
         "spectral curve (period matrices, Abel map), which this library does not implement. Use simulate.\n";
  return false;
}

struct ExactRun {
  Trajectory trajectory;
  std::optional<Breakdown> breakdown;
  json factors;
  Footer residuals;
};

ExactRun run_exact(const Resolved& r, const std::vector<double>& times) {
  const PhasePoint& pt = r.init.point;
  const ReducedPoint rpt{pt.q, pt.p, pt.xi};
  if (r.spec.family() == Family::rational) {
    auto sol = r.init.reduced ? solve_rational_reduced(r.spec, rpt, times) : solve_rational(r.spec, pt, times);
    Footer res{{"identity_residual", io::format_double(sol.factors.identity_residual)},
               {"key_residual", io::format_double(sol.factors.key_residual)},
               {"min_gap", io::format_double(sol.factors.min_gap)}};
    return {std::move(sol.trajectory), sol.factors.breakdown, io::factors_to_json(sol.factors), std::move(res)};
  }
  auto sol = r.init.reduced ? solve_trig_reduced(r.spec, rpt, times) : solve_trig(r.spec, pt, times);
  Footer res{{"levi_residual", io::format_double(sol.factors.levi_residual)},
             {"parabolic_residual", io::format_double(sol.factors.parabolic_residual)},
             {"membership_defect", io::format_double(sol.factors.membership_defect)},
             {"sign_mismatch", io::format_double(sol.factors.sign_mismatch)},
             {"min_gap", io::format_double(sol.factors.min_gap)}};
  return {std::move(sol.trajectory), sol.factors.breakdown, io::factors_to_json(sol.factors), std::move(res)};
}

Trajectory run_oracle(const RunConfig& cfg, const Resolved& r) {
  const PhasePoint& pt = r.init.point;
  if (r.init.reduced) return integrate_reduced(r.spec, ReducedPoint{pt.q, pt.p, pt.xi}, cfg.t_end, cfg.samples, cfg.tol);
  return integrate(r.spec, pt, cfg.t_end, cfg.samples, cfg.tol);
}

void check_run_params(const RunConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw ValidationError("--t-end must be positive");
  if (cfg.samples < 2) throw ValidationError("--samples must be at least 2");
  if (!(cfg.tol >= 1e-13 && cfg.tol <= 1e-3)) throw ValidationError("--tol must lie in [1e-13, 1e-3]");
}

}  // namespace

Resolved resolve(const RunConfig& cfg) {
  json model_json, init_json;
  if (!cfg.preset.empty()) {
    const auto p = io::find_preset(cfg.preset);
    model_json = p.model;
    init_json = p.init;
  }
  if (!cfg.model_file.empty()) model_json = read_json_file(cfg.model_file);
  if (!cfg.init_file.empty()) init_json = read_json_file(cfg.init_file);
  if (model_json.is_null()) throw ValidationError("no model: pass --model FILE or --preset NAME");
  if (init_json.is_null()) throw ValidationError("no initial data: pass --init FILE or --preset NAME");

  ModelSpec spec = io::model_from_json(model_json);
  io::InitialData init = io::init_from_json(init_json, spec, cfg.seed);
  std::vector<cplx> z = cfg.z_samples.empty() ? default_z_samples(spec) : io::parse_complex_list(cfg.z_samples);

  json zj = json::array();
  for (cplx s : z) zj.push_back(io::to_json(s));
  const json canonical{{"command", cfg.command}, {"model", model_json},   {"init", init_json},
                       {"t_end", cfg.t_end},     {"samples", cfg.samples}, {"tol", cfg.tol},
                       {"z_samples", zj},        {"seed", cfg.seed},       {"threshold", cfg.threshold}};
  return Resolved{std::move(model_json), std::move(init_json), std::move(spec), std::move(init), std::move(z),
                  io::hex64(io::fnv1a(canonical.dump()))};
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_run_params(cfg);
  const Resolved r = resolve(cfg);
  const Trajectory traj = run_oracle(cfg, r);
  Footer footer;
  add_audit(footer, r.spec, traj, r.z_samples);
  footer.emplace_back("accepted_steps", std::to_string(traj.stats.accepted));
  footer.emplace_back("rejected_steps", std::to_string(traj.stats.rejected));
  footer.emplace_back("blow_up", flag(traj.blow_up));
  footer.emplace_back("last_good_time", io::format_double(traj.last_good_time));
  if (!traj.message.empty()) footer.emplace_back("message", traj.message);
  emit(cfg, out, [&](std::ostream& os) { io::write_trajectory_csv(os, traj, csv_header(cfg, r, traj), footer); });
  if (traj.blow_up) {
    err << "simulate: singularity approached; last good time " << io::format_double(traj.last_good_time) << '\n';
    return kBlowUp;
  }
  return kOk;
}

int cmd_exact(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_run_params(cfg);
  const Resolved r = resolve(cfg);
  if (!exact_supported(r, err)) return kUnsupported;
  if (cfg.dump_factors && cfg.out.empty()) throw ValidationError("--dump-factors needs --out");
  const ExactRun run = run_exact(r, sample_times(cfg.t_end, cfg.samples));
  Footer footer;
  add_audit(footer, r.spec, run.trajectory, r.z_samples);
  footer.insert(footer.end(), run.residuals.begin(), run.residuals.end());
  footer.emplace_back("breakdown", flag(run.breakdown.has_value()));
  if (run.breakdown) {
    footer.emplace_back("breakdown_time", io::format_double(run.breakdown->time));
    footer.emplace_back("breakdown_gap", io::format_double(run.breakdown->gap));
    footer.emplace_back("breakdown_reason", run.breakdown->reason);
  }
  footer.emplace_back("last_good_time", io::format_double(run.trajectory.times.back()));
  emit(cfg, out, [&](std::ostream& os) { io::write_trajectory_csv(os, run.trajectory, csv_header(cfg, r, run.trajectory), footer); });
  if (cfg.dump_factors) {
    json dump = stamp(cfg, r);
    dump["factors"] = run.factors;
    std::ofstream f(cfg.out + ".factors.json", std::ios::binary);
    if (!f) throw ValidationError("cannot write " + cfg.out + ".factors.json");
    f << dump.dump(2) << '\n';
  }
  if (run.breakdown) {
    err << "exact: factorization breakdown at t = " << io::format_double(run.breakdown->time) << " ("
        << run.breakdown->reason << ")\n";
    return kBreakdown;
  }
  return kOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_run_params(cfg);
  const Resolved r = resolve(cfg);
  if (!exact_supported(r, err)) return kUnsupported;
  const Trajectory oracle = run_oracle(cfg, r);
  const ExactRun exact = run_exact(r, oracle.times);
  const size_t n = std::min(oracle.size(), exact.trajectory.size());
  double sq = 0.0, sp = 0.0, sx = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const auto& a = oracle.states[k];
    const auto& b = exact.trajectory.states[k];
    sq = std::max(sq, (a.q - b.q).cwiseAbs().maxCoeff());
    sp = std::max(sp, (a.p - b.p).cwiseAbs().maxCoeff());
    sx = std::max(sx, (a.xi - b.xi).cwiseAbs().maxCoeff());
  }
  const bool pass = !oracle.blow_up && !exact.breakdown && sq <= cfg.threshold && sp <= cfg.threshold && sx <= cfg.threshold;
  json rep = stamp(cfg, r);
  rep["sup_q"] = sq;
  rep["sup_p"] = sp;
  rep["sup_xi"] = sx;
  rep["threshold"] = cfg.threshold;
  rep["samples_compared"] = n;
  rep["oracle_blow_up"] = oracle.blow_up;
  rep["breakdown"] = exact.breakdown ? json(exact.breakdown->time) : json(nullptr);
  rep["pass"] = pass;
  emit_json(cfg, out, rep);
  if (exact.breakdown) return kBreakdown;
  if (oracle.blow_up) return kBlowUp;
  return pass ? kOk : kOverThreshold;
}

int cmd_audit(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  check_run_params(cfg);
  const Resolved r = resolve(cfg);
  const Trajectory traj = run_oracle(cfg, r);
  json rep = stamp(cfg, r);
  rep["audit"] = io::invariant_report_to_json(audit(r.spec, traj, r.z_samples));
  rep["blow_up"] = traj.blow_up;
  rep["last_good_time"] = traj.last_good_time;
  emit_json(cfg, out, rep);
  return traj.blow_up ? kBlowUp : kOk;
}

int cmd_curve(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const Resolved r = resolve(cfg);
  if (r.spec.family() != Family::elliptic) throw ValidationError("curve: needs the elliptic family");
  PhasePoint pt = r.init.point;
  const GenericityReport gen = genericity_check(r.spec, pt);
  std::optional<BranchReport> br;
  std::string failure;
  if (gen.ga1_ok && gen.ga2_ok) {
    try {
      br = branch_count_genus(r.spec, pt);
    } catch (const Error& e) {
      failure = e.what();
    }
  }
  json rep = stamp(cfg, r);
  rep.update(io::branch_report_to_json(r.spec.n(), gen, br));
  if (!failure.empty()) rep["error"] = failure;
  emit_json(cfg, out, rep);
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"spin Calogero-Moser simulator"};
  app.set_version_flag("--version", std::string(io::version()));
  app.require_subcommand(1);
  RunConfig cfg;

  const auto common = [&cfg](CLI::App* sub, bool dynamics) {
    sub->add_option("--model", cfg.model_file, "model JSON file");
    auto* init = sub->add_option("--init", cfg.init_file, "initial data JSON file");
    auto* preset = sub->add_option("--preset", cfg.preset, "named preset");
    init->excludes(preset);
    sub->add_option("--seed", cfg.seed, "seed for random initial data");
    sub->add_option("--out", cfg.out, "output path (default stdout)");
    if (dynamics) {
      sub->add_option("--t-end", cfg.t_end, "final time");
      sub->add_option("--samples", cfg.samples, "number of output times");
      sub->add_option("--tol", cfg.tol, "integrator tolerance");
      sub->add_option("--z-samples", cfg.z_samples, "spectral parameters, e.g. 0.7,1.3i,0.4+0.4i");
    }
  };
  auto* sim = app.add_subcommand("simulate", "integrate the equations of motion");
  common(sim, true);
  auto* exact = app.add_subcommand("exact", "solve by factorization (rational, trigonometric)");
  common(exact, true);
  exact->add_flag("--dump-factors", cfg.dump_factors, "write <out>.factors.json");
  auto* cmp = app.add_subcommand("compare", "exact solution against the integrator");
  common(cmp, true);
  cmp->add_option("--threshold", cfg.threshold, "pass threshold on sup-norm gaps");
  auto* aud = app.add_subcommand("audit", "conserved quantities along the integrator flow");
  common(aud, true);
  auto* curve = app.add_subcommand("curve", "spectral curve genericity, branch points and genus");
  common(curve, false);
  auto* presets = app.add_subcommand("presets", "list built-in presets");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (presets->parsed()) {
      for (const auto& name : io::builtin_preset_names()) out << name << '\n';
      return kOk;
    }
    const std::pair<CLI::App*, int (*)(const RunConfig&, std::ostream&, std::ostream&)> table[] = {
        {sim, cmd_simulate}, {exact, cmd_exact}, {cmp, cmd_compare}, {aud, cmd_audit}, {curve, cmd_curve}};
    for (const auto& [sub, fn] : table)
      if (sub->parsed()) {
        cfg.command = sub->get_name();
        return fn(cfg, out, err);
      }
  } catch (const BreakdownError& e) {
    err << "breakdown: " << e.what() << '\n';
    return kBreakdown;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kOverThreshold;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const io::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace spincm::cli
