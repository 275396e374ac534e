#include "choq/cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "choq/checkpoint.hpp"
#include "choq/spectrum.hpp"

namespace choq {

using nlohmann::json;

namespace {

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::string& header) : os_(path) {
    if (!os_) fail("Io", "cannot open " + path.string());
    os_ << header << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      os_ << (i ? "," : "") << cells[i];
    os_ << "\n";
  }
  ~Csv() { os_.flush(); }

 private:
  std::ofstream os_;
};

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) { ok = true; break; }
    if (!ok) fail("ConfigParse", std::string("unknown key '") + it.key() + "' in " + where);
  }
}

RieszRealization parse_riesz(const std::string& s) {
  if (s == "free") return RieszRealization::FreeSpace;
  if (s == "ball") return RieszRealization::Ball;
  fail("ConfigParse", "riesz must be 'free' or 'ball'");
}

void write_summary(const std::filesystem::path& dir, const json& j) {
  std::ofstream os(dir / "summary.json");
  os << j.dump(2) << "\n";
}

void write_spectrum_csv(const std::filesystem::path& dir, const OrbitalFrame& fr) {
  Csv csv(dir / "spectrum.csv", "index,lambda,l_channel,radial_nodes,residual");
  for (std::size_t j = 0; j < fr.lambda.size(); ++j)
    csv.row({std::to_string(j), fmt_g(fr.lambda[j]), std::to_string(fr.ell[j]),
             std::to_string(fr.nodes[j]), fmt_g(fr.residual[j])});
}

void write_trace_csv(const std::filesystem::path& dir, const SolveReport& rep) {
  Csv csv(dir / "trace.csv", "iter,H,G,quad,el_residual,theta");
  for (const auto& r : rep.trace)
    csv.row({std::to_string(r.iter), fmt_g(r.H), fmt_g(r.G), fmt_g(r.quad),
             fmt_g(r.el_residual), fmt_g(r.theta)});
}

Checkpoint state_checkpoint(const ProblemSpec& spec, const GridPtr& grid,
                            std::uint64_t iter, const ScalarField* V,
                            const OrbitalFrame* frame) {
  Checkpoint ck = make_checkpoint(spec, grid, iter);
  if (V) ck.fields.emplace_back("V", V->v);
  if (frame)
    for (std::size_t j = 0; j < frame->phi.size(); ++j)
      ck.fields.emplace_back("phi_" + std::to_string(j), frame->phi[j].v);
  return ck;
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Stalled: return "stalled";
    case SolveStatus::UnboundedSuspected: return "unbounded-suspected";
  }
  return "unknown";
}

int exit_of(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return kExitOk;
    case SolveStatus::Stalled: return kExitStalled;
    case SolveStatus::UnboundedSuspected: return kExitUnbounded;
  }
  return kExitSolver;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail("ConfigParse", "cannot open config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail("ConfigParse", std::string("invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    reject_unknown(j, {"problem", "solver", "primal", "critical", "inequalities",
                       "barphi"}, "config");
    if (j.contains("problem")) {
      cfg.problem = parse_problem_json(j.at("problem").dump());
      cfg.has_problem = true;
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      reject_unknown(s, {"riesz", "init", "theta0", "tol_h_rel", "tol_el", "max_iters",
                         "h_floor", "hnorm_ceiling", "eig_tol", "eig_max_iter",
                         "eig_extra"}, "solver");
      if (s.contains("riesz")) cfg.solver.riesz = parse_riesz(s.at("riesz"));
      cfg.solver.init = s.value("init", cfg.solver.init);
      if (cfg.solver.init != "zero" && cfg.solver.init != "thomas-fermi")
        fail("ConfigParse", "init must be 'zero' or 'thomas-fermi'");
      cfg.solver.theta0 = s.value("theta0", cfg.solver.theta0);
      cfg.solver.tol_h_rel = s.value("tol_h_rel", cfg.solver.tol_h_rel);
      cfg.solver.tol_el = s.value("tol_el", cfg.solver.tol_el);
      cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
      cfg.solver.h_floor = s.value("h_floor", cfg.solver.h_floor);
      cfg.solver.hnorm_ceiling = s.value("hnorm_ceiling", cfg.solver.hnorm_ceiling);
      cfg.solver.eig.tol = s.value("eig_tol", cfg.solver.eig.tol);
      cfg.solver.eig.max_iter = s.value("eig_max_iter", cfg.solver.eig.max_iter);
      cfg.solver.eig.extra = s.value("eig_extra", cfg.solver.eig.extra);
    }
    if (j.contains("primal")) {
      const json& p = j.at("primal");
      reject_unknown(p, {"riesz", "tol_grad", "max_iters", "step0"}, "primal");
      if (p.contains("riesz")) cfg.primal.riesz = parse_riesz(p.at("riesz"));
      cfg.primal.tol_grad = p.value("tol_grad", cfg.primal.tol_grad);
      cfg.primal.max_iters = p.value("max_iters", cfg.primal.max_iters);
      cfg.primal.step0 = p.value("step0", cfg.primal.step0);
    }
    if (j.contains("critical")) {
      const json& c = j.at("critical");
      reject_unknown(c, {"n", "alpha", "beta", "a_lo", "a_hi", "tol", "R",
                         "radial_points", "grid_pts", "refine_steps", "deltas"},
                     "critical");
      cfg.critical.n = c.value("n", cfg.critical.n);
      cfg.critical.alpha = c.value("alpha", cfg.critical.alpha);
      if (c.contains("beta")) cfg.critical.beta = c.at("beta").get<std::vector<double>>();
      cfg.critical.a_lo = c.value("a_lo", cfg.critical.a_lo);
      cfg.critical.a_hi = c.value("a_hi", cfg.critical.a_hi);
      cfg.critical.tol = c.value("tol", cfg.critical.tol);
      cfg.critical.R = c.value("R", cfg.critical.R);
      cfg.critical.radial_points = c.value("radial_points", cfg.critical.radial_points);
      cfg.critical.grid_pts = c.value("grid_pts", cfg.critical.grid_pts);
      cfg.critical.refine_steps = c.value("refine_steps", cfg.critical.refine_steps);
      if (c.contains("deltas")) cfg.critical.deltas = c.at("deltas").get<std::vector<double>>();
    }
    if (j.contains("inequalities")) {
      const json& q = j.at("inequalities");
      reject_unknown(q, {"lt_gamma", "lt_count", "lt_ref_factor", "hardy_R",
                         "hardy_points"}, "inequalities");
      cfg.inequalities.lt_gamma = q.value("lt_gamma", cfg.inequalities.lt_gamma);
      cfg.inequalities.lt_count = q.value("lt_count", cfg.inequalities.lt_count);
      cfg.inequalities.lt_ref_factor =
          q.value("lt_ref_factor", cfg.inequalities.lt_ref_factor);
      cfg.inequalities.hardy_R = q.value("hardy_R", cfg.inequalities.hardy_R);
      cfg.inequalities.hardy_points =
          q.value("hardy_points", cfg.inequalities.hardy_points);
    }
    if (j.contains("barphi")) {
      const json& b = j.at("barphi");
      reject_unknown(b, {"R", "points", "max_outer", "tol"}, "barphi");
      cfg.barphi.R = b.value("R", cfg.barphi.R);
      cfg.barphi.points = b.value("points", cfg.barphi.points);
      cfg.barphi.max_outer = b.value("max_outer", cfg.barphi.max_outer);
      cfg.barphi.tol = b.value("tol", cfg.barphi.tol);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail("ConfigParse", e.what());
  }
  return cfg;
}

namespace {

int run_solve_dual(const RunManifest& mf, RunConfig& cfg,
                   const std::filesystem::path& out) {
  if (!cfg.has_problem) fail("ConfigParse", "solve-dual needs a problem section");
  if (estimate_memory_bytes(cfg.problem) > mf.mem_cap)
    fail("ResourceCap", "estimated memory above --mem-cap");
  cfg.solver.eig.seed = mf.seed;
  if (mf.max_iters > 0) cfg.solver.max_iters = mf.max_iters;

  DualSolver solver(cfg.problem, cfg.solver);

  if (mf.dump_kernel && cfg.problem.mode == GridMode::Cartesian) {
    CartFracOps ops(solver.grid(), cfg.problem.alpha);
    Csv csv(out / "kernel.csv", "offset,distance,value");
    for (auto& row : ops.kernel_axis_profile())
      csv.row({fmt_g(row[0]), fmt_g(row[1]), fmt_g(row[2])});
  }

  ScalarField V0;
  int start_iter = 0;
  bool resumed = false;
  if (!mf.resume_path.empty()) {
    Checkpoint ck = load_checkpoint(mf.resume_path);
    checkpoint_matches_spec(ck, cfg.problem);
    const std::vector<double>* v = ck.field("V");
    if (!v || v->size() != solver.grid()->size())
      fail("SpecHashMismatch", "checkpoint V field missing or of wrong size");
    V0 = ScalarField(solver.grid(), FieldRole::Potential);
    V0.v = *v;
    start_iter = static_cast<int>(ck.iteration);
    resumed = true;
  }

  SolveReport rep = solver.solve(resumed ? &V0 : nullptr, start_iter);
  write_trace_csv(out, rep);
  write_spectrum_csv(out, rep.frame);
  Checkpoint ck = state_checkpoint(cfg.problem, solver.grid(), rep.iterations, &rep.V,
                                   &rep.frame);
  save_checkpoint((out / "final.ckpt").string(), ck);

  json s;
  s["command"] = "solve-dual";
  s["seed"] = mf.seed;
  s["spec_hash"] = spec_hash(cfg.problem);
  s["status"] = status_name(rep.status);
  s["iterations"] = rep.iterations;
  s["H"] = rep.H;
  s["G"] = rep.G;
  s["quad"] = rep.quad;
  s["el_residual"] = rep.el_residual;
  s["fixed_point_residual"] = rep.fixed_point_residual;
  write_summary(out, s);
  return exit_of(rep.status);
}

int run_solve_primal(const RunManifest& mf, RunConfig& cfg,
                     const std::filesystem::path& out) {
  if (!cfg.has_problem) fail("ConfigParse", "solve-primal needs a problem section");
  if (estimate_memory_bytes(cfg.problem) > mf.mem_cap)
    fail("ResourceCap", "estimated memory above --mem-cap");
  cfg.primal.eig.seed = mf.seed;
  if (mf.max_iters > 0) cfg.primal.max_iters = mf.max_iters;

  PrimalReport rep = stiefel_descent(cfg.problem, cfg.primal);
  Csv csv(out / "primal_trace.csv", "iter,E,gradnorm,orthodefect");
  for (const auto& r : rep.trace)
    csv.row({std::to_string(r.iter), fmt_g(r.E), fmt_g(r.gradnorm),
             fmt_g(r.orthodefect)});
  GridPtr grid = rep.frame.phi.at(0).grid;
  Checkpoint ck =
      state_checkpoint(cfg.problem, grid, rep.iterations, nullptr, &rep.frame);
  save_checkpoint((out / "final.ckpt").string(), ck);

  json s;
  s["command"] = "solve-primal";
  s["seed"] = mf.seed;
  s["spec_hash"] = spec_hash(cfg.problem);
  s["converged"] = rep.converged;
  s["iterations"] = rep.iterations;
  s["E"] = rep.E;
  s["gradnorm"] = rep.gradnorm;
  s["offdiag"] = rep.offdiag;
  write_summary(out, s);
  return rep.converged ? kExitOk : kExitStalled;
}

int run_duality_check(const RunManifest& mf, RunConfig& cfg,
                      const std::filesystem::path& out) {
  if (!cfg.has_problem) fail("ConfigParse", "duality-check needs a problem section");
  if (estimate_memory_bytes(cfg.problem) > mf.mem_cap)
    fail("ResourceCap", "estimated memory above --mem-cap");
  cfg.solver.eig.seed = mf.seed;
  cfg.primal.eig.seed = mf.seed;
  if (!cfg.primal.riesz) cfg.primal.riesz = cfg.solver.riesz;

  DualSolver solver(cfg.problem, cfg.solver);
  SolveReport rep = solver.solve();
  write_trace_csv(out, rep);
  PrimalReport prep = stiefel_descent(cfg.problem, cfg.primal);
  Csv csv(out / "primal_trace.csv", "iter,E,gradnorm,orthodefect");
  for (const auto& r : prep.trace)
    csv.row({std::to_string(r.iter), fmt_g(r.E), fmt_g(r.gradnorm),
             fmt_g(r.orthodefect)});

  double gap = std::abs(rep.H - 2.0 * energy_primal(cfg.problem, prep.frame,
                                                    solver.riesz())) /
               (1.0 + std::abs(rep.H));
  json s;
  s["command"] = "duality-check";
  s["seed"] = mf.seed;
  s["spec_hash"] = spec_hash(cfg.problem);
  s["status"] = status_name(rep.status);
  s["H"] = rep.H;
  s["E"] = prep.E;
  s["duality_gap"] = gap;
  s["el_residual"] = rep.el_residual;
  write_summary(out, s);
  return exit_of(rep.status);
}

int run_critical_scan(const RunManifest& mf, RunConfig& cfg,
                      const std::filesystem::path& out) {
  CriticalConfig cc = critical_config_for(cfg.critical.n, cfg.critical.alpha);
  cc.R = cfg.critical.R;
  cc.radial_points = cfg.critical.radial_points;
  cc.grid_pts = cfg.critical.grid_pts;
  cc.refine_steps = cfg.critical.refine_steps;

  CriticalScan scan = estimate_ac(cfg.critical.beta, cc, cfg.critical.a_lo,
                                  cfg.critical.a_hi, cfg.critical.tol);
  {
    Csv csv(out / "scan.csv", "a,verdict,best_D,witness_id");
    for (const auto& p : scan.points) {
      char wid[80];
      std::snprintf(wid, sizeof(wid), "gauss_A%.6g_s%.6g", p.amplitude, p.sigma);
      csv.row({fmt_g(p.a), p.unbounded ? "unbounded-witness" : "bounded-evidence",
               fmt_g(p.best_D), wid});
    }
  }
  {
    Csv csv(out / "scaling.csv", "delta,hnorm_ratio,eig_ratio,H_value");
    double q0 = hnorm_radial(scan.witness, cc.alpha, true);
    std::vector<double> mu0 = negative_levels_radial(scan.witness, scan.a_hi, 1);
    for (double d : cfg.critical.deltas) {
      ScalarField Vd = scale_potential(scan.witness, d);
      double qd = hnorm_radial(Vd, cc.alpha, true);
      std::vector<double> mud = negative_levels_radial(Vd, scan.a_hi, 1);
      double er = (!mu0.empty() && !mud.empty()) ? mud[0] / mu0[0] : 0.0;
      csv.row({fmt_g(d), fmt_g(qd / q0), fmt_g(er),
               fmt_g(witness_functional(scan.a_hi, scan.beta, Vd, cc.alpha))});
    }
  }
  json s;
  s["command"] = "critical-scan";
  s["seed"] = mf.seed;
  s["n"] = scan.n;
  s["alpha"] = scan.alpha;
  s["a_c_est"] = scan.a_c_est;
  s["half_width"] = scan.half_width;
  s["points"] = scan.points.size();
  write_summary(out, s);
  return kExitOk;
}

int run_barphi(const RunManifest& mf, RunConfig& cfg,
               const std::filesystem::path& out) {
  BarphiResult r = solve_barphi(cfg.barphi.R, cfg.barphi.points, cfg.barphi.max_outer,
                                cfg.barphi.tol);
  Csv csv(out / "barphi.csv", "r,phi");
  const Grid& g = *r.phi.grid;
  for (std::size_t i = 0; i < r.phi.size(); ++i)
    csv.row({fmt_g(g.rnode(i)), fmt_g(r.phi.v[i])});
  json s;
  s["command"] = "barphi";
  s["seed"] = mf.seed;
  s["l2norm"] = r.l2norm;
  s["l2norm_squared"] = r.l2norm * r.l2norm;
  s["residual"] = r.residual;
  s["iterations"] = r.iterations;
  s["positive"] = r.positive;
  s["decreasing"] = r.decreasing;
  s["converged"] = r.converged;
  write_summary(out, s);
  return r.converged ? kExitOk : kExitStalled;
}

int run_inequality_suite(const RunManifest& mf, RunConfig& cfg,
                         const std::filesystem::path& out) {
  HardyResult hardy = hardy_check(4, cfg.inequalities.hardy_R,
                                  cfg.inequalities.hardy_points);
  {
    Csv csv(out / "hardy.csv", "function,ratio");
    for (auto& [name, ratio] : hardy.ratios) csv.row({name, fmt_g(ratio)});
  }

  // seeded random radial wells for the Lieb-Thirring monitor (n = 3)
  const double gamma = cfg.inequalities.lt_gamma;
  const double Lref = cfg.inequalities.lt_ref_factor * lt_classical_constant(gamma, 3);
  GridPtr grid = Grid::make_radial(3, 30.0, 2048, 0, 2);
  std::mt19937_64 rng(mf.seed);
  std::uniform_real_distribution<double> amp(0.5, 40.0), wid(0.4, 3.0), cen(0.0, 6.0);
  double worst = 0;
  {
    Csv csv(out / "lt.csv", "index,bound_states,riesz_sum,v_integral,ratio,reference");
    for (int t = 0; t < cfg.inequalities.lt_count; ++t) {
      ScalarField V(grid, FieldRole::Potential);
      int nb = 1 + static_cast<int>(rng() % 3);
      for (int b = 0; b < nb; ++b) {
        double A = amp(rng), s = wid(rng), c = cen(rng);
        for (std::size_t i = 0; i < V.size(); ++i) {
          double r = grid->rnode(i);
          V.v[i] += A * std::exp(-0.5 * (r - c) * (r - c) / (s * s));
        }
      }
      LTRecord rec = lieb_thirring_ratio(V, gamma, 1.0, 256);
      worst = std::max(worst, rec.ratio);
      csv.row({std::to_string(t), std::to_string(rec.mu.size()),
               fmt_g(rec.riesz_sum), fmt_g(rec.v_integral), fmt_g(rec.ratio),
               fmt_g(Lref)});
    }
  }

  // Newton-decay bound for a normalized n=4 gaussian density
  GridPtr g4 = Grid::make_radial(4, 30.0, 2048, 0, 2);
  ScalarField rho(g4, FieldRole::Density);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double r = g4->rnode(i);
    rho.v[i] = std::exp(-r * r);
  }
  double mass = integral(rho);
  for (double& x : rho.v) x /= mass;
  NewtonBoundResult nb = newton_bound_check(rho);

  json s;
  s["command"] = "inequality-suite";
  s["seed"] = mf.seed;
  s["hardy_min_ratio"] = hardy.min_ratio;
  s["lt_worst_ratio"] = worst;
  s["lt_reference"] = Lref;
  s["lt_ok"] = worst <= Lref;
  s["newton_bound_holds"] = nb.holds;
  s["newton_max_ratio"] = nb.max_ratio;
  write_summary(out, s);
  bool ok = hardy.min_ratio >= 1.0 - 5e-3 && worst <= Lref && nb.holds;
  return ok ? kExitOk : kExitSolver;
}

}  // namespace

int run(const RunManifest& mf) {
  try {
    std::filesystem::path out(mf.out_dir);
    std::filesystem::create_directories(out);
    RunConfig cfg = mf.config_path.empty() ? RunConfig{}
                                           : parse_run_config(read_text_file(mf.config_path));
    if (mf.command == "solve-dual") return run_solve_dual(mf, cfg, out);
    if (mf.command == "solve-primal") return run_solve_primal(mf, cfg, out);
    if (mf.command == "duality-check") return run_duality_check(mf, cfg, out);
    if (mf.command == "critical-scan") return run_critical_scan(mf, cfg, out);
    if (mf.command == "barphi") return run_barphi(mf, cfg, out);
    if (mf.command == "inequality-suite") return run_inequality_suite(mf, cfg, out);
    std::fprintf(stderr, "unknown command: %s\n", mf.command.c_str());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    const std::string& c = e.code();
    if (c == "ConfigParse" || c == "NonDescendingBeta" || c == "BadBeta" ||
        c == "BadDimensionOrderPair" || c == "NegativeCoupling" || c == "BadMode" ||
        c == "BadGrid" || c == "UnboundedBelowConfinement")
      return kExitConfig;
    if (c == "OutOfMemoryBudget" || c == "ResourceCap") return kExitResource;
    if (c == "VersionMismatch" || c == "SpecHashMismatch") return kExitCheckpoint;
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
}

}  // namespace choq
