#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include "mcflow/config.hpp"
#include "mcflow/conformal.hpp"
#include "mcflow/divcurl.hpp"
#include "mcflow/greens.hpp"
#include "mcflow/laplace.hpp"
#include "mcflow/stationary.hpp"
#include "suite.hpp"

using namespace mcflow;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kRuntime = 1, kProperty = 2;

struct Context {
  fs::path out = ".";
  std::size_t threads = 1;
  bool lenient = false;
};

struct Outcome {
  Json resolved;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  bool pass = true;
};

int finish(const Context& ctx, const std::string& command, const Outcome& o) {
  RunMetadata meta;
  meta.command = command;
  meta.resolved = o.resolved;
  meta.seed = o.seed;
  meta.threads = ctx.threads;
  meta.outputs = o.outputs;
  meta.exit_code = o.pass ? kOk : kProperty;
  write_sidecar(ctx.out, command, meta);
  std::printf("%s: %s\n", command.c_str(), o.pass ? "all checks passed" : "property check failed");
  return meta.exit_code;
}

void check(Outcome& o, bool ok, const std::string& what) {
  std::printf("  [%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
  o.pass = o.pass && ok;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string csv_name(const Context& ctx, const std::string& file, Outcome& o) {
  o.outputs.push_back(file);
  return (ctx.out / file).string();
}

// ---------------------------------------------------------------- measure

struct MeasureArgs {
  std::string domain = "annulus";
  int modes = 24, points = 1000;
  std::uint64_t seed = 1;
  double tol = 1e-8;
};

int run_measure(const Context& ctx, const MeasureArgs& a) {
  const DomainSpec spec = resolve_domain(a.domain, !ctx.lenient);
  const CircularDomain d = require_circular(spec);
  Outcome o;
  o.seed = a.seed;
  o.resolved = {{"domain", domain_to_json(spec)}, {"modes", a.modes}, {"points", a.points}, {"seed", a.seed},
                {"tol", a.tol}};
  const LaplaceSolver solver(d, LaplaceOptions{a.modes});
  const auto ws = harmonic_measures(solver);
  std::vector<Column> cols = {{"x", "length", "first coordinate of the sample point"},
                              {"y", "length", "second coordinate of the sample point"}};
  for (std::size_t j = 0; j < ws.size(); ++j)
    cols.push_back({"omega_" + std::to_string(j), "1",
                    "harmonic measure of boundary component " + std::to_string(j) + " (1 there, 0 on the rest)"});
  cols.push_back({"sum", "1", "sum of all harmonic measures"});
  CsvWriter csv(csv_name(ctx, "measure.csv", o), cols);
  double partition = 0.0, exact = 0.0;
  const bool concentric = d.is_concentric_annulus() && d.num_holes() == 1;
  const double r = concentric ? d.holes()[0].radius : 0.0;
  for (const Complex z : suite::random_interior(d, a.points, static_cast<unsigned>(a.seed))) {
    std::vector<double> row = {z.real(), z.imag()};
    double s = 0.0;
    for (const auto& w : ws) row.push_back(w.value(z)), s += row.back();
    row.push_back(s);
    csv.row(row);
    partition = std::max(partition, std::abs(s - 1.0));
    if (concentric) exact = std::max(exact, std::abs(ws[1].value(z) - std::log(std::abs(z - d.holes()[0].center)) / std::log(r)));
  }
  check(o, partition <= a.tol, fmt("partition of unity: sup |sum - 1| = %.2e (tol %.0e)", partition, a.tol));
  if (concentric) check(o, exact <= a.tol, fmt("annulus closed form: sup error %.2e (tol %.0e)", exact, a.tol));
  return finish(ctx, "measure", o);
}

// ------------------------------------------------------------- critpoints

int run_critpoints(const Context& ctx, const std::string& domain) {
  const DomainSpec spec = resolve_domain(domain, !ctx.lenient);
  const CircularDomain d = require_circular(spec);
  if (d.num_holes() == 0) throw Error("laplace.invalid_domain", "critical points need at least one hole");
  Outcome o;
  o.resolved = {{"domain", domain_to_json(spec)}, {"field", "sum of the hole measures"}};
  const LaplaceSolver solver(d);
  const auto ws = harmonic_measures(solver);
  SeriesHarmonic sum = ws[1];
  for (std::size_t j = 2; j < ws.size(); ++j) sum += ws[j];
  const CriticalPointReport rep = locate_critical_points(sum, d);
  CsvWriter csv(csv_name(ctx, "critpoints.csv", o),
                {{"x", "length", "first coordinate of the critical point"},
                 {"y", "length", "second coordinate of the critical point"},
                 {"multiplicity", "1", "order of the zero of the complex gradient (winding number)"},
                 {"on_boundary", "1", "1 when the point lies on a boundary circle (counted with weight 1/2)"}});
  for (const auto& p : rep.points)
    csv.row({p.location.real(), p.location.imag(), double(p.multiplicity), p.on_boundary ? 1.0 : 0.0});
  const int expected = static_cast<int>(d.num_components()) - 2;
  check(o, rep.weighted_count == double(expected),
        fmt("weighted count %g equals k - 2 = %d (%zu points)", rep.weighted_count, expected, rep.points.size()));
  return finish(ctx, "critpoints", o);
}

// ------------------------------------------------------------ green-check

struct GreenArgs {
  std::string domain = "annulus";
  int component = 0, ladder = 5;
  double angle = 0.3;
};

int run_green_check(const Context& ctx, const GreenArgs& a) {
  const DomainSpec spec = resolve_domain(a.domain, !ctx.lenient);
  const CircularDomain d = require_circular(spec);
  if (a.component < 0 || std::size_t(a.component) >= d.num_components())
    throw Error("greens.invalid_component", "component out of range");
  Outcome o;
  o.resolved = {{"domain", domain_to_json(spec)}, {"component", a.component}, {"ladder", a.ladder}, {"angle", a.angle}};
  const NeumannGreen green(d);
  const LadderReport rep = singularity_ladder(green, a.component, a.ladder, a.angle);
  CsvWriter csv(csv_name(ctx, "green_ladder.csv", o),
                {{"distance", "length", "distance of the source from the boundary component"},
                 {"image_distance", "length", "distance from the projection to the reflected source"},
                 {"sup_grad_H", "1/length", "sup of |grad H| near the projection, H = N - Gamma"},
                 {"sup_hess_H", "1/length^2", "sup of |grad^2 H| near the projection"},
                 {"sup_grad_R", "1/length", "sup of |grad R_j|, R_j = N - N_j the remainder of the principal part"},
                 {"sup_combo1", "1/length", "sup of |tau d_z H + conj(tau) d_conj(w) H|"},
                 {"sup_combo2", "1/length^2", "sup of the tangential second-order combination"}});
  for (const auto& r : rep.rows)
    csv.row({r.distance, r.image_distance, r.sup_grad_H, r.sup_hess_H, r.sup_grad_R, r.sup_combo1, r.sup_combo2});
  check(o, std::abs(rep.slope_grad_H + 1.0) <= 0.15, fmt("sup|grad H| slope %.3f in -1 +/- 0.15", rep.slope_grad_H));
  check(o, std::abs(rep.slope_hess_H + 2.0) <= 0.15,
        fmt("sup|grad^2 H| slope %.3f in -2 +/- 0.15 (against image distance %.3f)", rep.slope_hess_H,
            rep.slope_hess_H_image));
  check(o, rep.grad_R_growth <= 2.0, fmt("sup|grad R| growth %.3f <= 2", rep.grad_R_growth));
  check(o, std::abs(rep.slope_combo1) <= 0.15, fmt("first-order combo slope %.3f in 0 +/- 0.15", rep.slope_combo1));
  check(o, std::abs(rep.slope_combo2 + 1.0) <= 0.15,
        fmt("second-order combo slope %.3f in -1 +/- 0.15", rep.slope_combo2));
  return finish(ctx, "green-check", o);
}

// -------------------------------------------------------------- conformal

struct ConformalArgs {
  std::string domain = "eccentric";
  int nodes = 256, samples = 200;
  std::uint64_t seed = 1;
};

int run_conformal(const Context& ctx, const ConformalArgs& a) {
  const DomainSpec spec = resolve_domain(a.domain, !ctx.lenient);
  const SmoothDomain d = std::holds_alternative<SmoothDomain>(spec)
                             ? std::get<SmoothDomain>(spec)
                             : SmoothDomain::from_circular(std::get<CircularDomain>(spec), std::size_t(a.nodes));
  Outcome o;
  o.seed = a.seed;
  o.resolved = {{"domain", domain_to_json(spec)}, {"nodes", a.nodes}, {"samples", a.samples}, {"seed", a.seed}};
  const AnnulusMap map = to_annulus(d, CurveSolverOptions{a.nodes});
  double extent = 0.0;
  for (const Complex z : d.outer().samples()) extent = std::max(extent, std::abs(z));
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Complex> pts;
  for (long tries = 0; int(pts.size()) < a.samples && tries < 1000000; ++tries) {
    const Complex z(u(rng), u(rng));
    if (map.in_domain(z) && map.distance_to_boundary(z) > 0.01) pts.push_back(z);
  }
  CsvWriter csv(csv_name(ctx, "conformal.csv", o),
                {{"x", "length", "first coordinate of the sample point"},
                 {"y", "length", "second coordinate of the sample point"},
                 {"phi_re", "1", "real part of the map to r < |zeta| < 1"},
                 {"phi_im", "1", "imaginary part of the map"},
                 {"abs_phi", "1", "modulus of the image point"},
                 {"abs_dphi", "1/length", "modulus of the complex derivative of the map"}});
  for (const Complex z : pts) {
    const Complex w = map.forward(z);
    csv.row({z.real(), z.imag(), w.real(), w.imag(), std::abs(w), std::abs(map.derivative(z))});
  }
  const MapReport r = verify_map(map, pts, static_cast<unsigned>(a.seed));
  std::printf("  modulus %.15f\n", map.modulus());
  check(o, r.boundary <= 1e-6, fmt("boundary correspondence %.2e <= 1e-6", r.boundary));
  check(o, r.cauchy_riemann <= 1e-6, fmt("Cauchy-Riemann defect %.2e <= 1e-6", r.cauchy_riemann));
  check(o, r.angle <= 1e-6, fmt("angle defect %.2e <= 1e-6", r.angle));
  check(o, r.round_trip <= 1e-8, fmt("inverse round trip %.2e <= 1e-8", r.round_trip));
  check(o, r.min_derivative > 1e-8, fmt("min |phi'| %.3e > 0", r.min_derivative));
  return finish(ctx, "conformal", o);
}

// ---------------------------------------------------------- divcurl-bench

struct DivCurlArgs {
  std::string domain = "annulus";
  double p = 4.0;
  int n = 200, resolution = 48, degree = 4;
  std::uint64_t seed = 7;
  bool no_points = false, expect_blowup = false;
};

int run_divcurl(const Context& ctx, const DivCurlArgs& a) {
  const DomainSpec spec = resolve_domain(a.domain, !ctx.lenient);
  const CircularDomain d = require_circular(spec);
  if (!(a.p > 1.0)) throw Error("divcurl.invalid_exponent", "p must exceed 1");
  if (a.n < 2) throw Error("divcurl.invalid_count", "need at least two fields");
  Outcome o;
  o.seed = a.seed;
  const bool witness = a.no_points || a.expect_blowup;
  o.resolved = {{"domain", domain_to_json(spec)}, {"p", a.p},         {"n", a.n},
                {"resolution", a.resolution},     {"degree", a.degree}, {"seed", a.seed},
                {"no_point_terms", witness},      {"expect_blowup", a.expect_blowup}};
  EnsembleOptions opt;
  opt.resolution = a.resolution;
  opt.degree = a.degree;
  opt.seed = a.seed;
  const EnsembleReport r = inequality_ensemble(d, a.p, a.n, opt);
  CsvWriter csv(csv_name(ctx, "divcurl_ensemble.csv", o),
                {{"member", "1", "ensemble index"},
                 {"ratio", "1", "|grad u|_p / (|div u|_p + |curl u|_p + sum of |u| at the anchor points)"},
                 {"friction_ratio", "1", "squared variant with the boundary friction integral of K |u|^2"},
                 {"density_ratio", "1", "variant with |rho^(1/2) u|_2, rho = 1"}});
  for (std::size_t k = 0; k < r.ratios.size(); ++k)
    csv.row({double(k), r.ratios[k], r.friction_ratios[k], r.density_ratios[k]});
  CsvWriter wcsv(csv_name(ctx, "divcurl_witness.csv", o),
                 {{"epsilon", "1", "size of the random part added to the null-space field"},
                  {"ratio", "1", "|grad u|_p / (|div u|_p + |curl u|_p) with the point terms deleted"}});
  for (const auto& w : r.witness) wcsv.row({w.epsilon, w.ratio});
  if (!witness) {
    check(o, std::isfinite(r.max_ratio), fmt("empirical constant %.4f is finite", r.max_ratio));
    check(o, r.stability >= 0.9, fmt("second-half max / global max %.4f >= 0.9", r.stability));
  } else {
    const bool blowup = r.witness_ratio > 1e3;
    std::printf("  witness ratio without point terms: %.3e\n", r.witness_ratio);
    if (a.expect_blowup)
      check(o, blowup, "estimate without point terms blows up (ratio > 1e3), as expected");
    else
      check(o, !blowup, "estimate without point terms stays bounded");
  }
  return finish(ctx, "divcurl-bench", o);
}

// ----------------------------------------------------------------- steady

struct SteadyArgs {
  double gamma = 2.0, c1 = 1.0, c2 = 3.0, r = 0.5, mu = 0.1, beta = 1.5, k = 0.0;
  std::vector<int> resolutions = {32, 64, 128};
};

int run_steady(const Context& ctx, const SteadyArgs& a) {
  Outcome o;
  o.resolved = {{"gamma", a.gamma}, {"c1", a.c1}, {"c2", a.c2}, {"r", a.r}, {"mu", a.mu},
                {"beta", a.beta},   {"K", a.k},   {"resolutions", a.resolutions}};
  const StationaryState s = annulus_family(a.c1, a.c2, a.gamma, a.r);
  const PhysParams p{a.mu, a.beta, a.gamma};
  CsvWriter prof(csv_name(ctx, "steady_profile.csv", o),
                 {{"R", "length", "radius"},
                  {"rho", "density", "exact density of the rotating state"},
                  {"u_theta", "length/time", "angular velocity component, -C1/R"}});
  for (int k = 0; k <= 200; ++k) {
    const double R = a.r + (1.0 - a.r) * k / 200.0;
    const Eigen::Vector2d u = s.velocity(Complex(R, 0.0));
    prof.row({R, s.density(Complex(R, 0.0)), u(1)});
  }
  CsvWriter res(csv_name(ctx, "steady_residual.csv", o),
                {{"resolution", "1", "radial cells"},
                 {"h", "length", "radial spacing"},
                 {"mass_l2", "density/time", "L2 norm of the discrete div(rho u)"},
                 {"mass_sup", "density/time", "sup of the discrete div(rho u)"},
                 {"momentum_l2", "momentum/time", "L2 norm of the discrete steady momentum residual"},
                 {"momentum_sup", "momentum/time", "sup of the momentum residual"},
                 {"slip_sup", "length/time", "sup of |u.n| on the walls"},
                 {"curl_sup", "1/time", "sup of |curl u + K u.n_perp| on the walls"}});
  std::vector<double> e;
  for (int n : a.resolutions) {
    const ResidualReport r = residual(s, p, a.k, a.k, n);
    res.row({double(n), r.h, r.mass_l2, r.mass_sup, r.momentum_l2, r.momentum_sup, r.slip_sup, r.curl_sup});
    e.push_back(r.momentum_l2);
  }
  if (a.k == 0.0) {
    for (std::size_t k = 1; k < e.size(); ++k) {
      const double ratio = double(a.resolutions[k]) / a.resolutions[k - 1];
      const double slope = std::log(e[k - 1] / e[k]) / std::log(ratio);
      check(o, std::abs(slope - 2.0) <= 0.2,
            fmt("residual slope %d -> %d: %.3f in 2 +/- 0.2", a.resolutions[k - 1], a.resolutions[k], slope));
    }
  } else {
    std::printf("  K > 0: the rotating family is not steady, residuals reported only\n");
  }
  const ResidualReport t = residual(trivial_state(1.0, a.gamma, a.r), p, a.k, a.k, a.resolutions.front());
  const double tv = std::max({t.mass_sup, t.momentum_sup, t.slip_sup, t.curl_sup});
  check(o, tv <= 1e-14, fmt("trivial state residual %.1e", tv));
  return finish(ctx, "steady", o);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error("config.invalid_value", "cannot read '" + item + "' as a number");
    }
  }
  return out;
}

int run_classify(const Context& ctx, const std::string& domain, const std::string& k_spec, int samples,
                 const std::string& expect) {
  const DomainSpec spec = resolve_domain(domain, !ctx.lenient);
  const std::size_t comps = std::visit([](const auto& d) { return d.num_components(); }, spec);
  const std::vector<double> values = parse_list(k_spec);
  if (values.size() != 1 && values.size() != comps)
    throw Error("config.invalid_value", "--K takes one value or one per boundary component");
  std::vector<std::vector<double>> friction(comps);
  for (std::size_t j = 0; j < comps; ++j)
    friction[j].assign(std::size_t(samples), values.size() == 1 ? values[0] : values[j]);
  Outcome o;
  o.resolved = {{"domain", domain_to_json(spec)}, {"K", values}, {"samples", samples}, {"expect", expect}};
  const Classification c = std::visit([&](const auto& d) { return classify(d, friction); }, spec);
  CsvWriter csv(csv_name(ctx, "classify.csv", o),
                {{"case", "1", "0 = a (only the trivial state), 1 = b (rotating family), 2 = c (impossible geometry)"}});
  csv.row({double(static_cast<int>(c.kind))});
  std::printf("  case %c: %s\n", case_letter(c.kind), c.description.c_str());
  if (!expect.empty()) check(o, expect.size() == 1 && expect[0] == case_letter(c.kind), "matches --expect " + expect);
  return finish(ctx, "steady-classify", o);
}

// --------------------------------------------------------------- simulate

int run_simulate(const Context& ctx, const std::string& path) {
  const Json raw = load_json(path, !ctx.lenient);
  const SimulateConfig cfg = parse_simulate_config(raw, fs::path(path).parent_path(), !ctx.lenient);
  Outcome o;
  o.seed = cfg.seed;
  o.resolved = to_json(cfg);
  int snapshot = 0;
  auto dump = [&](const std::string& name, const Field& f) {
    const std::string stem = fmt("snapshots/%s_%04d", name.c_str(), snapshot);
    if (cfg.snapshots == "binary") {
      write_grid_binary(ctx.out / (stem + ".bin"), f);
      o.outputs.push_back(stem + ".bin");
    } else {
      std::ofstream out(ctx.out / (stem + ".csv"), std::ios::binary);
      out << "# " << name << " on the grid, rows then columns; see docs/binary_dump.md for the layout\n";
      for (Eigen::Index i = 0; i < f.rows(); ++i) {
        for (Eigen::Index j = 0; j < f.cols(); ++j) out << (j ? "," : "") << format_double(f(i, j));
        out << '\n';
      }
      o.outputs.push_back(stem + ".csv");
    }
  };
  auto snapshot_state = [&](const FluidState& s) {
    if (cfg.snapshots == "none") return;
    fs::create_directories(ctx.out / "snapshots");
    dump("rho", s.rho);
    dump("u1", s.u1);
    dump("u2", s.u2);
    ++snapshot;
  };

  if (cfg.masked) {
    const MaskedSimulator sim(cfg.masked_config);
    CsvWriter csv(csv_name(ctx, "diagnostics.csv", o),
                  {{"t", "time", "physical time"},
                   {"mass", "mass", "integral of rho"},
                   {"energy", "energy", "kinetic plus internal energy"},
                   {"kinetic", "energy", "integral of rho |u|^2 / 2"},
                   {"sup_rho", "density", "sup of rho"},
                   {"sup_u", "length/time", "sup of |u|"}});
    const MaskedRun run = sim.run([&](const FluidState& s, const MaskedRow& r) {
      csv.row({r.t, r.mass, r.energy, r.kinetic, r.sup_rho, r.sup_u});
      snapshot_state(s);
    });
    check(o, !run.aborted, run.aborted ? "run aborted: " + run.abort_reason : fmt("completed %ld steps", run.steps));
    check(o, run.max_mass_drift <= 1e-12, fmt("mass drift %.2e per step <= 1e-12", run.max_mass_drift));
    return finish(ctx, "simulate", o);
  }

  const PolarSimulator sim(cfg.polar);
  CsvWriter csv(csv_name(ctx, "diagnostics.csv", o),
                {{"t", "time", "physical time"},
                 {"dt", "time", "last step size"},
                 {"mass", "mass", "integral of rho"},
                 {"A2", "energy", "A^2: lambda(rho) (div u)^2 + |grad u|^2 + pressure deviation + wall friction"},
                 {"B2", "energy/time^2", "B^2: integral of rho |u_dot|^2, u_dot = u_t + u.grad u"},
                 {"sup_rho", "density", "sup of rho at t"},
                 {"R_T", "density", "1 + running sup of rho over [0, t]"},
                 {"rho_dev_l2", "density", "L2 norm of rho - rho_hat"},
                 {"grad_u_l2", "1/time", "L2 norm of grad u"},
                 {"energy", "energy", "integral of rho |u|^2 / 2 + P(rho) / (gamma - 1)"},
                 {"dissipation", "energy/time", "(2 mu + lambda)(div u)^2 + mu curl^2 + mu K |u|^2 on the walls"},
                 {"budget_residual", "energy/time", "dE/dt + mean dissipation over the last step"},
                 {"budget_band", "energy/time", "tracked O(h^2 + dt) band for the budget residual"},
                 {"flux_mean", "pressure", "mean of F = (2 mu + lambda) div u - (P - mean P)"},
                 {"flux_sup", "pressure", "sup of |F|"},
                 {"floor_events", "1", "cells lifted to the density floor so far"}});
  const RunResult run = sim.run([&](const FluidState& s, const DiagnosticsRow& r) {
    csv.row({r.t, r.dt, r.mass, r.a2, r.b2, r.sup_rho, r.r_t, r.rho_dev_l2, r.grad_u_l2, r.energy, r.dissipation,
             r.budget_residual, r.budget_band, r.flux_mean, r.flux_sup, double(r.floor_events)});
    snapshot_state(s);
  });
  CsvWriter budget(csv_name(ctx, "budget.csv", o),
                   {{"t", "time", "time at the end of the step"},
                    {"dt", "time", "step size"},
                    {"residual", "energy/time", "(E_new - E_old)/dt + mean dissipation"},
                    {"withheld", "energy/time", "dissipation bound held back by the viscous stabiliser"},
                    {"truncation", "energy/time", "h^2 (E - E_rest + D), before the band constant"},
                    {"dissipation", "energy/time", "dissipation at the end of the step"}});
  for (const auto& b : run.budget) budget.row({b.t, b.dt, b.residual, b.withheld, b.truncation, b.dissipation});

  check(o, !run.aborted, run.aborted ? "run aborted: " + run.abort_reason : fmt("completed %ld steps", run.steps));
  check(o, run.max_mass_drift <= 1e-12, fmt("mass drift %.2e per step <= 1e-12", run.max_mass_drift));
  check(o, run.max_budget_excess <= 0.0, fmt("energy budget excess over band %.2e <= 0", run.max_budget_excess));
  if (run.rows.size() >= 8) {
    std::vector<double> t, amp;
    for (const auto& r : run.rows) t.push_back(r.t), amp.push_back(std::sqrt(r.a2));
    const double T = cfg.polar.final_time;
    if (amp[amp.size() / 2] > 0.0) {
      const DecayFit fit = fit_decay(t, amp, T / 2, T);
      std::printf("  decay fit on [T/2, T]: alpha %.4f, R^2 %.5f\n", fit.alpha, fit.r2);
    }
  }
  return finish(ctx, "simulate", o);
}

// ------------------------------------------------------- commutator-check

struct CommutatorArgs {
  std::string domain = "annulus";
  std::string preset = "steady";
  int resolution = 64;
  double tol = 0.05;
};

int run_commutator(const Context& ctx, const CommutatorArgs& a) {
  const CircularDomain d = require_circular(resolve_domain(a.domain, !ctx.lenient));
  if (!d.is_concentric_annulus() || std::abs(d.holes()[0].center) > 1e-12)
    throw Error("commutator.unsupported_domain", "the representation check runs on the concentric annulus");
  Outcome o;
  o.resolved = {{"domain", domain_to_json(d)}, {"preset", a.preset}, {"resolution", a.resolution}, {"tol", a.tol}};
  const suite::RepresentationRun run = suite::representation_run(a.preset, a.resolution, d.holes()[0].radius);
  const RepresentationReport& rep = run.report;
  CsvWriter csv(csv_name(ctx, "commutator.csv", o),
                {{"x", "length", "first coordinate of the sample point"},
                 {"y", "length", "second coordinate of the sample point"},
                 {"component", "1", "nearest wall (0 outer, 1 inner)"},
                 {"distance", "length", "distance to the nearest wall"},
                 {"band", "1", "1 for the points within an eighth of the gap of a wall"},
                 {"F_direct", "pressure", "effective viscous flux from the state (or from its Neumann problem)"},
                 {"F_C512", "pressure", "Green representation: -integral of d_y N . rho u_dot plus the boundary part"},
                 {"F_qp11", "pressure", "split representation: transport - inner commutator + B + R"},
                 {"transport", "pressure", "d_t of the inverse Laplacian of div(rho u) plus u . grad of it"},
                 {"commutator", "pressure", "inner commutator with the mixed second derivatives of N"},
                 {"boundary", "pressure", "boundary commutator B, harmonic part of N only"},
                 {"remainder", "pressure", "R: mean of F over the walls and the friction term"},
                 {"err_C512", "1", "|F_direct - F_C512| / sup |F_direct|"},
                 {"err_qp11", "1", "|F_direct - F_qp11| / sup |F_direct|"}});
  for (const auto& r : rep.rows)
    csv.row({r.point.x.real(), r.point.x.imag(), double(r.point.component), r.point.distance, r.point.band ? 1.0 : 0.0,
             r.direct, r.c512, r.qp11, r.transport, r.commutator, r.boundary, r.remainder,
             std::abs(r.direct - r.c512) / rep.scale, std::abs(r.direct - r.qp11) / rep.scale});
  std::printf("  sup |F| %.4e\n", rep.scale);
  if (a.preset == "steady")
    check(o, rep.err_direct_c512 <= a.tol, fmt("direct vs Green representation %.2e <= %.2g", rep.err_direct_c512, a.tol));
  check(o, rep.err_direct_qp11 <= a.tol, fmt("direct vs split representation %.2e <= %.2g", rep.err_direct_qp11, a.tol));
  return finish(ctx, "commutator-check", o);
}

// ------------------------------------------------------------------ suite

int run_suite(const Context& ctx, const std::vector<int>& only) {
  Outcome o;
  o.resolved = {{"only", only}};
  const std::set<int> sel(only.begin(), only.end());
  const auto results = suite::run_acceptance(sel, [](const suite::CriterionResult& r) {
    std::printf("%s\n", suite::format_line(r).c_str());
    std::fflush(stdout);
  });
  CsvWriter csv(csv_name(ctx, "suite.csv", o), {{"criterion", "1", "acceptance criterion number"},
                                                 {"pass", "1", "1 when the criterion holds"},
                                                 {"seconds", "s", "wall time"}});
  for (const auto& r : results) {
    csv.row({double(r.id), r.pass ? 1.0 : 0.0, r.seconds});
    o.pass = o.pass && r.pass;
  }
  return finish(ctx, "suite", o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mcflow: harmonic measures, Neumann Green's functions, div-curl systems and compressible flow on "
               "multiply connected planar domains"};
  app.require_subcommand(1);
  Context ctx;
  std::string out = ".";
  app.add_option("--threads", ctx.threads, "worker threads; results do not depend on it")
      ->envname("MCFLOW_THREADS")
      ->check(CLI::Range(1, 256));
  app.add_option("--out", out, "output directory");
  app.add_flag("--lenient", ctx.lenient, "accept unknown and duplicate config keys");

  MeasureArgs measure;
  auto* m = app.add_subcommand("measure", "harmonic measures and partition-of-unity check");
  m->add_option("--domain", measure.domain, "preset name or domain file");
  m->add_option("--modes", measure.modes, "Laurent modes per circle")->check(CLI::Range(1, 200));
  m->add_option("--points", measure.points, "random interior points")->check(CLI::Range(1, 10000000));
  m->add_option("--seed", measure.seed);
  m->add_option("--tol", measure.tol);

  std::string crit_domain = "symmetric";
  auto* cp = app.add_subcommand("critpoints", "critical points of the sum of the hole measures");
  cp->add_option("--domain", crit_domain, "preset name or domain file");

  GreenArgs green;
  auto* g = app.add_subcommand("green-check", "singularity ladder of the Neumann Green's function");
  g->add_option("--domain", green.domain, "preset name or domain file");
  g->add_option("--component", green.component, "boundary component (0 = outer)");
  g->add_option("--ladder", green.ladder, "levels d/4, d/8, ...")->check(CLI::Range(2, 12));
  g->add_option("--angle", green.angle, "direction of the source ladder");

  ConformalArgs conf;
  auto* c = app.add_subcommand("conformal", "map a doubly connected domain onto a concentric annulus");
  c->add_option("--domain", conf.domain, "preset name or domain file");
  c->add_option("--nodes", conf.nodes, "Nystrom nodes per curve")->check(CLI::Range(16, 4096));
  c->add_option("--samples", conf.samples)->check(CLI::Range(1, 100000));
  c->add_option("--seed", conf.seed);

  DivCurlArgs dc;
  auto* d = app.add_subcommand("divcurl-bench", "empirical constant of the div-curl estimate");
  d->add_option("--domain", dc.domain, "preset name or domain file");
  d->add_option("--p", dc.p, "Lebesgue exponent");
  d->add_option("--n", dc.n, "ensemble size");
  d->add_option("--seed", dc.seed);
  d->add_option("--resolution", dc.resolution)->check(CLI::Range(8, 1024));
  d->add_option("--degree", dc.degree)->check(CLI::Range(1, 12));
  d->add_flag("--no-point-terms", dc.no_points, "delete the point terms (witness mode)");
  d->add_flag("--expect-blowup", dc.expect_blowup, "witness mode; exit 0 only if the estimate blows up");

  SteadyArgs steady;
  auto* s = app.add_subcommand("steady", "exact rotating states on the annulus and their discrete residuals");
  s->add_option("--gamma", steady.gamma);
  s->add_option("--c1", steady.c1);
  s->add_option("--c2", steady.c2);
  s->add_option("--r", steady.r, "inner radius");
  s->add_option("--mu", steady.mu);
  s->add_option("--beta", steady.beta);
  s->add_option("--K", steady.k, "friction on both walls");
  s->add_option("--resolutions", steady.resolutions)->delimiter(',');
  s->require_subcommand(0, 1);
  std::string cl_domain = "annulus", cl_k = "0", cl_expect;
  int cl_samples = 64;
  auto* cl = s->add_subcommand("classify", "which case of the stationary classification applies");
  cl->add_option("--domain", cl_domain, "preset name or domain file");
  cl->add_option("--K", cl_k, "friction: one value, or comma list per component");
  cl->add_option("--samples", cl_samples, "samples of K per component")->check(CLI::Range(1, 100000));
  cl->add_option("--expect", cl_expect, "a, b or c; exit 2 on mismatch");

  std::string sim_config;
  auto* sim = app.add_subcommand("simulate", "time-dependent run with diagnostics");
  sim->add_option("--config", sim_config, "JSON config (docs/config.schema.json)")->required();

  CommutatorArgs cm;
  auto* k = app.add_subcommand("commutator-check", "effective viscous flux against its representations");
  k->add_option("--domain", cm.domain, "preset name or domain file");
  k->add_option("--preset", cm.preset)->check(CLI::IsMember({"steady", "manufactured"}));
  k->add_option("--resolution", cm.resolution)->check(CLI::Range(16, 512));
  k->add_option("--tol", cm.tol);

  std::vector<int> only;
  auto* su = app.add_subcommand("suite", "acceptance battery");
  su->add_option("--only", only, "criterion numbers")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kRuntime;
  }

  try {
    ctx.out = out;
    fs::create_directories(ctx.out);
    set_thread_count(ctx.threads);
    if (m->parsed()) return run_measure(ctx, measure);
    if (cp->parsed()) return run_critpoints(ctx, crit_domain);
    if (g->parsed()) return run_green_check(ctx, green);
    if (c->parsed()) return run_conformal(ctx, conf);
    if (d->parsed()) return run_divcurl(ctx, dc);
    if (cl->parsed()) return run_classify(ctx, cl_domain, cl_k, cl_samples, cl_expect);
    if (s->parsed()) return run_steady(ctx, steady);
    if (sim->parsed()) return run_simulate(ctx, sim_config);
    if (k->parsed()) return run_commutator(ctx, cm);
    if (su->parsed()) return run_suite(ctx, only);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return kRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kRuntime;
}
