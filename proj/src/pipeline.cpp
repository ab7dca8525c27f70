#include "rouleau/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include "rouleau/errors.hpp"
#include "rouleau/laplace.hpp"
#include "rouleau/output.hpp"
#include "rouleau/stochastic.hpp"

namespace rouleau {

using json = nlohmann::ordered_json;

MomentAnalysis analyze_moments(const DiscreteMeasure& f0, const AlphaWeights& alpha, double t_end_nogel) {
  MomentAnalysis a;
  a.f0 = extract_moments(f0);
  a.report = detect_blow_up(a.f0, alpha);
  MomentOptions mo;
  if (a.report.gelates) {
    a.traj = integrate_moment_system(a.f0, alpha, a.report.T_star, mo);
    fill_report(a.report, extract_theta_c0(a.traj, a.report.T_star), alpha);
  } else {
    mo.t_end = t_end_nogel;
    a.traj = integrate_moment_system(a.f0, alpha, a.report.T_star, mo);
  }
  return a;
}

TauRun run_lattice_tau(const AlphaWeights& alpha, const DiscreteMeasure& f0, double T_star, const TauRunOptions& opt,
                       const std::function<void(const SolverState&)>& on_state) {
  if (!std::isfinite(T_star)) throw ConfigError("tau run needs a finite blow-up time");
  LatticeOptions lo = opt.lattice;
  lo.T_est = T_star;
  LatticeSolver solver(alpha, opt.R, lo);
  SolverState s = solver.init(f0);
  TauRun run;
  run.stop_reason = "tau_max";
  for (int k = 0; k <= opt.count; ++k) {
    const double tau = opt.tau_max * k / opt.count;
    const double t = T_star * -std::expm1(-tau);
    try {
      solver.advance_to(s, t);
    } catch (const StepUnderflow&) {
      run.stop_reason = "step_underflow";
      break;
    }
    MomentSet m = s.field.moments(2);
    if (s.leaked.m2.sum() > opt.leak_frac * m.m2.sum()) {
      run.stop_reason = "leakage";
      break;
    }
    ScaledSnapshot F = rescale(s.field, t, T_star);
    F.tau = tau;
    run.snaps.push_back(std::move(F));
    run.moments.push_back(m);
    run.leaked.push_back(s.leaked);
    run.tau_reached = tau;
    if (on_state) on_state(s);
  }
  run.stats = s.stats;
  run.grid_c = s.field.nc;
  run.grid_a = s.field.na;
  return run;
}

ResolvedRange resolved_range(const TauRun& run, const DiscreteMeasure& f0, const AlphaWeights& alpha, double T_star,
                             double tol) {
  ResolvedRange rr;
  if (run.snaps.size() < 2) return rr;
  MomentOptions mo;
  mo.dtau = run.snaps[1].tau - run.snaps[0].tau;
  MomentTrajectory traj = integrate_moment_system(extract_moments(f0), alpha, T_star, mo);
  bool ok = true;
  for (const auto& F : run.snaps) {
    std::size_t k = std::size_t(std::lround(F.tau / mo.dtau));
    if (k >= traj.samples.size()) break;
    const Mat2& ref = traj.samples[k].s2;
    double d = (F.m.m2 - ref).norm() / ref.norm();
    rr.dev.push_back(d);
    if (ok && d <= tol)
      rr.tau = F.tau;
    else
      ok = false;
  }
  return rr;
}

TimeRun run_lattice_times(const AlphaWeights& alpha, const DiscreteMeasure& f0, double R, const LatticeOptions& opt,
                          const std::vector<double>& times,
                          const std::function<void(const SolverState&)>& on_state) {
  LatticeSolver solver(alpha, R, opt);
  SolverState s = solver.init(f0);
  TimeRun run;
  run.stop_reason = "t_end";
  for (double t : times) {
    try {
      solver.advance_to(s, t);
    } catch (const StepUnderflow&) {
      run.stop_reason = "step_underflow";
      break;
    }
    run.t.push_back(t);
    run.moments.push_back(s.field.moments(2));
    run.leaked.push_back(s.leaked);
    if (on_state) on_state(s);
  }
  run.stats = s.stats;
  return run;
}

namespace {

json vec_json(const Vec2& v) { return json::array({v(0), v(1)}); }
json mat_json(const Mat2& m) { return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})}); }

std::vector<CsvWriter::Cell> moment_cells(const MomentSet& m) {
  return {m.m0, m.m1(0), m.m1(1), m.m2(0, 0), m.m2(0, 1), m.m2(1, 1)};
}

template <class T>
std::vector<CsvWriter::Cell> concat(std::vector<CsvWriter::Cell> a, const T& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

void run_scenario(const Scenario& s, const RunOptions& ro, std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(s.output_dir);
  const fs::path dir(s.output_dir);
  const Meta meta = {{"scenario", s.name}, {"scenario_hash", s.hash()}, {"code_version", ROULEAU_VERSION}};

  log << "[" << s.name << "] moment analysis\n";
  MomentAnalysis ma = analyze_moments(s.f0, s.alpha, s.t_end);
  const GelationReport& rep = ma.report;
  log << "  branch " << to_string(rep.branch) << ", T* " << format_number(rep.T_star) << "\n";

  LatticeOptions lo;
  lo.rtol = s.rtol;
  lo.atol = s.atol;

  json lat = json::object();
  json lap = json::object();
  json fits = json::object();
  std::ofstream ckpt;
  if (s.write_checkpoints) ckpt.open(dir / "checkpoints.jsonl", std::ios::binary);
  auto on_state = [&](const SolverState& st) {
    if (ckpt) write_checkpoint(ckpt, st);
  };

  CsvWriter mcsv((dir / "moments.csv").string(), meta,
                 {"source", "t", "tau", "m0", "m1_x", "m1_y", "m2_xx", "m2_xy", "m2_yy"});
  for (const auto& smp : ma.traj.samples) {
    if (rep.gelates && smp.tau > s.tau_max + 1e-12) break;
    mcsv.row(concat({std::string("ode"), smp.t, std::isnan(smp.tau) ? -1.0 : smp.tau}, moment_cells(smp.m)));
  }

  if (rep.gelates) {
    TauRunOptions to;
    to.R = s.R;
    to.lattice = lo;
    to.tau_max = s.tau_max;
    to.count = s.checkpoint_count;
    log << "  lattice run, R " << format_number(s.R) << ", tau_max " << format_number(s.tau_max) << "\n";
    TauRun run = run_lattice_tau(s.alpha, s.f0, rep.T_star, to, on_state);
    log << "  stopped (" << run.stop_reason << ") at tau " << format_number(run.tau_reached) << " after "
        << run.stats.steps << " steps\n";
    for (std::size_t k = 0; k < run.snaps.size(); ++k)
      mcsv.row(concat({std::string("lattice"), run.snaps[k].t, run.snaps[k].tau}, moment_cells(run.moments[k])));

    CsvWriter scsv((dir / "selfsim.csv").string(), meta,
                   {"tau", "Z", "m2_dev", "m3_dev", "m4_norm", "loc_p2", "loc_p3"});
    std::vector<double> taus, m2d, m3d, l2, l3, zd;
    for (const auto& F : run.snaps) {
      SelfsimRow r = selfsim_diagnostics(F, rep.theta, rep.c0);
      scsv.row({r.tau, r.Z, r.m2_dev, r.m3_dev, r.m4_norm, r.loc_p2, r.loc_p3});
      taus.push_back(r.tau);
      m2d.push_back(r.m2_dev);
      m3d.push_back(r.m3_dev);
      l2.push_back(r.loc_p2);
      l3.push_back(r.loc_p3);
      zd.push_back(std::abs(r.Z - std::pow(rep.theta.sum(), 2)));
    }
    scsv.close();
    const ResolvedRange rr = resolved_range(run, s.f0, s.alpha, rep.T_star);
    if (rr.tau > 1.2) {
      auto fit = [&](const std::vector<double>& y) { return fit_decay_exponent(taus, y, 1.0, rr.tau); };
      fits["m2_dev"] = fit(m2d);
      fits["m3_dev"] = fit(m3d);
      fits["loc_p2"] = fit(l2);
      fits["loc_p3"] = fit(l3);
      fits["Z_gap"] = fit(zd);
    }

    CsvWriter sup((dir / "support.csv").string(), meta, {"tau", "r", "weight", "eta1", "eta2"});
    for (const auto& F : run.snaps)
      for (const auto& q : F.shells)
        if (q.w * q.r * q.r > 1e-8 * F.Z) sup.row({F.tau, q.r, q.w, q.weta(0) / q.w, q.weta(1) / q.w});
    sup.close();

    CsvWriter lcsv((dir / "laplace.csv").string(), meta, {"tau", "rho", "dg_drho", "target", "gap"});
    const auto grid = rho_grid(s.rho_max, s.n_rho);
    double d_final = 0.0;
    for (const auto& F : run.snaps) {
      if (!(F.Z > 0.0)) continue;
      RadialMeasure g = polar_project(F).g;
      double d = 0.0;
      for (double r : grid) {
        double v = radial_laplace_drho(g, r), tg = selfsim_target(r, rep.K0);
        lcsv.row({F.tau, r, v, tg, std::abs(v - tg)});
        d = std::max(d, std::abs(v - tg));
      }
      d_final = d;
    }
    lcsv.close();
    lap["k0"] = rep.K0;
    lap["d_final"] = d_final;
    lap["rho_max"] = s.rho_max;
    write_json((dir / "laplace.json").string(), lap);

    lat["R"] = s.R;
    lat["stop_reason"] = run.stop_reason;
    lat["tau_reached"] = run.tau_reached;
    lat["resolved_tau"] = rr.tau;
    lat["steps"] = run.stats.steps;
    lat["rejected"] = run.stats.rejected;
    lat["positivity_rejects"] = run.stats.positivity_rejects;
    lat["clipped"] = run.stats.clipped;
    lat["grid"] = json::array({run.grid_c, run.grid_a});
    if (!run.leaked.empty()) lat["leaked_m2_share"] = run.leaked.back().m2.sum() / run.moments.back().m2.sum();
  } else {
    std::vector<double> times;
    for (int k = 0; k <= s.checkpoint_count; ++k) times.push_back(s.t_end * k / s.checkpoint_count);
    log << "  lattice run, R " << format_number(s.R) << ", t_end " << format_number(s.t_end) << "\n";
    TimeRun run = run_lattice_times(s.alpha, s.f0, s.R, lo, times, on_state);
    for (std::size_t k = 0; k < run.t.size(); ++k)
      mcsv.row(concat({std::string("lattice"), run.t[k], -1.0}, moment_cells(run.moments[k])));
    lat["R"] = s.R;
    lat["stop_reason"] = run.stop_reason;
    lat["t_reached"] = run.t.empty() ? 0.0 : run.t.back();
    lat["steps"] = run.stats.steps;
    lat["rejected"] = run.stats.rejected;
    if (!run.leaked.empty()) lat["leaked_m0"] = run.leaked.back().m0;
  }
  mcsv.close();

  json ens = nullptr;
  if (s.stochastic.enabled) {
    EnsembleConfig ec;
    ec.alpha = s.alpha;
    ec.f0 = s.f0;
    ec.n_particles = s.stochastic.particles;
    ec.threads = ro.threads;
    for (double c : s.stochastic.checkpoints) ec.checkpoints.push_back(rep.gelates ? c * rep.T_star : c);
    std::vector<std::uint64_t> seeds;
    std::uint64_t base = s.stochastic.seed;
    if (!ro.deterministic) base = (std::uint64_t(std::random_device{}()) << 32) ^ std::random_device{}();
    for (int r = 0; r < s.stochastic.runs; ++r) seeds.push_back(base + std::uint64_t(r));
    log << "  stochastic ensemble, " << s.stochastic.runs << " runs\n";
    EnsembleResult er = run_ensemble(ec, seeds);
    CsvWriter ecsv((dir / "ensemble.csv").string(), meta,
                   {"run_id", "t", "m0", "m1_x", "m1_y", "m2_xx", "m2_xy", "m2_yy", "largest_fraction"});
    for (const auto& r : er.rows)
      ecsv.row(concat(concat({long(r.run_id), r.t}, moment_cells(r.m)), std::vector<CsvWriter::Cell>{r.largest_fraction}));
    ecsv.close();
    ens = json::object();
    ens["runs"] = s.stochastic.runs;
    ens["particles"] = s.stochastic.particles;
  }

  json j;
  j["scenario"] = s.name;
  j["scenario_hash"] = s.hash();
  j["code_version"] = ROULEAU_VERSION;
  j["alpha"] = json::array({s.alpha[1], s.alpha[2], s.alpha[3]});
  j["gelates"] = rep.gelates;
  j["branch"] = to_string(rep.branch);
  j["t_star"] = rep.gelates ? json(rep.T_star) : json(nullptr);
  if (rep.gelates) {
    j["theta"] = vec_json(rep.theta);
    j["c0"] = rep.c0;
    j["k0"] = rep.K0;
    j["omega_theta"] = vec_json(rep.omega_theta);
    j["theta_K_theta"] = rep.theta_K_theta;
    j["rank1_residual"] = rep.rank1_residual;
    j["decay_exponents"] = fits;
    j["laplace"] = lap;
  } else {
    const auto& last = ma.traj.samples.back();
    j["m2_final"] = mat_json(last.m.m2);
    j["t_final"] = last.t;
    j["dichotomy"] = check_dichotomy(ma.traj).branch;
  }
  j["lattice"] = lat;
  j["ensemble"] = ens;
  write_json((dir / "gelation_report.json").string(), j);
  log << "  wrote " << s.output_dir << "\n";
}

void report(const std::string& dir, std::ostream& os) {
  namespace fs = std::filesystem;
  const fs::path p = fs::path(dir) / "gelation_report.json";
  std::ifstream in(p);
  if (!in) throw ConfigError("no gelation_report.json in '" + dir + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("unreadable report: " + std::string(e.what()));
  }
  os << "scenario      " << j.value("scenario", "?") << "  (hash " << j.value("scenario_hash", "?") << ", version "
     << j.value("code_version", "?") << ")\n";
  os << "gelates       " << (j.value("gelates", false) ? "yes" : "no") << "  branch " << j.value("branch", "?") << "\n";
  if (j.value("gelates", false)) {
    os << "T*            " << format_number(j["t_star"].get<double>()) << "\n";
    os << "theta         " << format_number(j["theta"][0].get<double>()) << ", "
       << format_number(j["theta"][1].get<double>()) << "\n";
    os << "c0, K0        " << format_number(j["c0"].get<double>()) << ", " << format_number(j["k0"].get<double>())
       << "\n";
    if (j.contains("laplace") && j["laplace"].contains("d_final"))
      os << "Laplace gap   " << format_number(j["laplace"]["d_final"].get<double>()) << "\n";
    if (j.contains("decay_exponents"))
      for (auto it = j["decay_exponents"].begin(); it != j["decay_exponents"].end(); ++it)
        os << "decay " << it.key() << std::string(std::max<int>(1, 8 - int(it.key().size())), ' ')
           << format_number(it.value().get<double>()) << "\n";
  }
  if (j.contains("lattice") && j["lattice"].is_object()) {
    const auto& l = j["lattice"];
    os << "lattice       R " << l.value("R", 0.0) << ", stop " << l.value("stop_reason", "?") << ", steps "
       << l.value("steps", 0L) << "\n";
  }
  for (const char* f : {"moments.csv", "selfsim.csv", "laplace.csv", "support.csv", "ensemble.csv"}) {
    fs::path q = fs::path(dir) / f;
    if (!fs::exists(q)) {
      os << f << std::string(14 - std::string(f).size(), ' ') << "missing\n";
      continue;
    }
    CsvTable t = read_csv(q.string());
    os << f << std::string(14 - std::string(f).size(), ' ') << t.rows.size() << " rows\n";
  }
}

}  // namespace rouleau
