#include "suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "mcflow/conformal.hpp"
#include "mcflow/divcurl.hpp"
#include "mcflow/greens.hpp"
#include "mcflow/laplace.hpp"
#include "mcflow/simulator.hpp"

namespace mcflow::suite {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

const CircularDomain kAnnulus = CircularDomain::annulus(0.5);
const CircularDomain kSymmetric({{Complex(0.4, 0.0), 0.15}, {Complex(-0.4, 0.0), 0.15}});
const CircularDomain kThreeHoles({{Complex(0.4, 0.0), 0.15}, {Complex(-0.4, 0.0), 0.15}, {Complex(0.05, 0.55), 0.12}});
const CircularDomain kFourConnected({{Complex(-0.45, 0.0), 0.15}, {Complex(0.4, 0.25), 0.12}, {Complex(0.3, -0.4), 0.1}});

// tools/oracles/mobius_modulus.py: unit circle and |z - 0.2| = 0.3
constexpr double kMobiusModulus = 0.31385933836549284;

CriterionResult measure_exactness() {
  const auto t0 = Clock::now();
  const SeriesHarmonic w = harmonic_measure(kAnnulus, 1, LaplaceOptions{24});
  double worst = 0.0;
  for (const Complex z : random_interior(kAnnulus, 1000, 1))
    worst = std::max(worst, std::abs(w.value(z) - std::log(std::abs(z)) / std::log(0.5)));
  const double secs = seconds_since(t0);
  return {1, "harmonic measure exactness", worst <= 1e-8 && secs < 5.0,
          fmt("sup error %.2e (<= 1e-8), %.2f s (< 5 s)", worst, secs)};
}

CriterionResult partition_of_unity() {
  double worst = 0.0;
  for (const auto* d : {&kAnnulus, &kThreeHoles}) {
    const LaplaceSolver solver(*d);
    const auto ws = harmonic_measures(solver);
    for (const Complex z : random_interior(*d, 1000, 2)) {
      double s = 0.0;
      for (const auto& w : ws) s += w.value(z);
      worst = std::max(worst, std::abs(s - 1.0));
    }
  }
  return {2, "measure partition of unity", worst <= 1e-8, fmt("sup |sum - 1| %.2e (<= 1e-8)", worst)};
}

CriterionResult critical_index() {
  struct Case {
    const CircularDomain* domain;
    int expected;
  };
  bool pass = true;
  std::string detail;
  for (const Case c : {Case{&kAnnulus, 0}, Case{&kSymmetric, 1}, Case{&kFourConnected, 2}}) {
    const auto t0 = Clock::now();
    const LaplaceSolver solver(*c.domain);
    const auto ws = harmonic_measures(solver);
    SeriesHarmonic sum = ws[1];
    for (std::size_t j = 2; j < ws.size(); ++j) sum += ws[j];
    const CriticalPointReport rep = locate_critical_points(sum, *c.domain);
    const double secs = seconds_since(t0);
    bool ok = rep.weighted_count == double(c.expected) && secs < 30.0;
    for (const auto& p : rep.points) ok = ok && !p.on_boundary;
    if (c.expected == 1) ok = ok && rep.points.size() == 1 && rep.points[0].multiplicity == 1;
    pass = pass && ok;
    detail += fmt("k=%zu: %g (want %d, %zu pts, %.1f s); ", c.domain->num_components(), rep.weighted_count, c.expected,
                  rep.points.size(), secs);
  }
  detail.resize(detail.size() - 2);
  return {3, "critical-point index", pass, detail};
}

CriterionResult period_matrix_check() {
  // line integral of the closed-form gradient of log|z|/log r over |z| = r, clockwise
  const double r = 0.5;
  double oracle = 0.0;
  const int n = 4096;
  for (int k = 0; k < n; ++k) {
    const double t = -kTwoPi * (k + 0.5) / n;
    const Complex z = std::polar(r, t);
    const double wx = z.real() / (std::norm(z) * std::log(r)), wy = z.imag() / (std::norm(z) * std::log(r));
    oracle += wy * r * std::sin(t) * kTwoPi / n + wx * r * std::cos(t) * kTwoPi / n;
  }
  const PeriodMatrix annulus = period_matrix(kAnnulus);
  const double rel = std::abs(annulus.a(0, 0) - oracle) / std::abs(oracle);
  const double closed = kTwoPi / std::log(r);
  double defect = 0.0;
  for (const auto* d : {&kThreeHoles, &kFourConnected}) defect = std::max(defect, period_matrix(*d).symmetry_defect);
  const bool pass = defect <= 1e-8 && rel <= 1e-6 && std::abs(oracle - closed) <= 1e-6 * std::abs(closed);
  return {4, "period matrix", pass,
          fmt("a11 %.10f, oracle %.10f, 2pi/log r %.10f, rel %.1e (<= 1e-6); symmetry defect %.1e (<= 1e-8)",
              annulus.a(0, 0), oracle, closed, rel, defect)};
}

const std::vector<LadderReport>& annulus_ladders() {
  static const std::vector<LadderReport> ladders = [] {
    const NeumannGreen green(kAnnulus);
    return std::vector<LadderReport>{singularity_ladder(green, 0, 5), singularity_ladder(green, 1, 5)};
  }();
  return ladders;
}

CriterionResult green_decomposition() {
  bool pass = true;
  std::string detail;
  for (const LadderReport& rep : annulus_ladders()) {
    const bool ok = within(rep.slope_grad_H, -1.0, 0.15) && within(rep.slope_hess_H, -2.0, 0.15) &&
                    rep.grad_R_growth <= 2.0;
    pass = pass && ok;
    detail += fmt("%s: grad H %.3f, hess H %.3f, grad R growth %.2f; ", rep.component == 0 ? "outer" : "inner",
                  rep.slope_grad_H, rep.slope_hess_H, rep.grad_R_growth);
  }
  detail += "bands -1 +/- 0.15, -2 +/- 0.15, <= 2";
  return {5, "Green decomposition ladder", pass, detail};
}

CriterionResult cancellation() {
  bool pass = true;
  std::string detail;
  for (const LadderReport& rep : annulus_ladders()) {
    pass = pass && within(rep.slope_combo1, 0.0, 0.15) && within(rep.slope_combo2, -1.0, 0.15);
    detail += fmt("%s: first %.3f, second %.3f; ", rep.component == 0 ? "outer" : "inner", rep.slope_combo1,
                  rep.slope_combo2);
  }
  const CircularDomain disc = CircularDomain::unit_disc();
  const NeumannGreen g(disc);
  double worst = 0.0;
  for (const Complex w : {Complex(0.8, 0.3), Complex(-0.2, -0.9), Complex(0.0, 0.95)}) {
    const Complex wb = std::conj(w);
    for (const Complex z : random_interior(disc, 40, 6)) {
      const Complex first = Complex(0, -1) * (z - w) / (2.0 * kTwoPi * (z - 1.0 / wb));
      const Complex second = Complex(0, 1) * (std::norm(w) - 1.0) / (2.0 * kTwoPi * (z - 1.0 / wb) * (1.0 - z * wb));
      worst = std::max(worst, std::abs(cancellation_first_order(g, 0, z, w).combo - first));
      worst = std::max(worst, std::abs(cancellation_second_order_complex(g, 0, z, w) - second));
    }
  }
  pass = pass && worst <= 1e-8;
  detail += fmt("disc closed forms %.1e (<= 1e-8)", worst);
  return {6, "cancellation combos", pass, detail};
}

CriterionResult divcurl_estimate() {
  const EnsembleReport r = inequality_ensemble(kAnnulus, 4.0, 200);
  const bool pass = r.ratios.size() == 200 && std::isfinite(r.max_ratio) && r.stability >= 0.9 && r.witness_ratio > 1e3;
  return {7, "div-curl estimate", pass,
          fmt("max ratio %.4f, second-half/global %.4f (>= 0.9), witness %.2e (> 1e3)", r.max_ratio, r.stability,
              r.witness_ratio)};
}

CriterionResult stationary_family() {
  const StationaryState s = annulus_family(1.0, 3.0, 2.0, 0.5);
  const PhysParams p{0.1, 1.5, 2.0};
  std::vector<double> e, h;
  for (int n : {32, 64, 128}) {
    const ResidualReport r = residual(s, p, 0.0, 0.0, n);
    e.push_back(r.momentum_l2);
    h.push_back(r.h);
  }
  const double s1 = std::log(e[0] / e[1]) / std::log(2.0), s2 = std::log(e[1] / e[2]) / std::log(2.0);
  const ResidualReport trivial = residual(trivial_state(1.0, 2.0, 0.5), p, 0.0, 0.0, 64);
  const double t = std::max({trivial.mass_sup, trivial.momentum_sup, trivial.slip_sup, trivial.curl_sup});
  const bool pass = within(s1, 2.0, 0.2) && within(s2, 2.0, 0.2) && t <= 1e-14;
  return {8, "stationary family residual", pass,
          fmt("residual %.2e/%.2e/%.2e, slopes %.3f, %.3f (2 +/- 0.2); trivial %.1e", e[0], e[1], e[2], s1, s2, t)};
}

CriterionResult classification() {
  const CircularDomain eccentric({{Complex(0.2, 0.0), 0.3}});
  const std::vector<std::vector<double>> zero(2, std::vector<double>(64, 0.0));
  const std::vector<std::vector<double>> k03(2, std::vector<double>(64, 0.3));
  const char a = case_letter(classify(kAnnulus, k03).kind);
  const char b = case_letter(classify(kAnnulus, zero).kind);
  const char c = case_letter(classify(eccentric, zero).kind);
  const bool pass = a == 'a' && b == 'b' && c == 'c';
  return {9, "classification", pass, fmt("annulus K=0.3 -> %c, annulus K=0 -> %c, eccentric K=0 -> %c", a, b, c)};
}

SimulationConfig decay_config(int resolution, double final_time, double cadence) {
  SimulationConfig c;
  c.resolution = resolution;
  c.final_time = final_time;
  c.cadence = cadence;
  c.k_outer = c.k_inner = 0.5;
  c.initial.preset = InitialPreset::RandomSlip;
  c.initial.seed = 11;
  return c;
}

CriterionResult simulator_conservation() {
  const auto t0 = Clock::now();
  const RunResult r = PolarSimulator(decay_config(128, 10.0, 1.0)).run();
  const double secs = seconds_since(t0);
  const bool pass = !r.aborted && r.max_mass_drift <= 1e-12 && r.max_budget_excess <= 0.0 && secs < 600.0;
  return {10, "simulator conservation and stability", pass,
          fmt("%ld steps, mass drift %.1e/step (<= 1e-12), budget excess over band %.2e (<= 0), %.0f s (< 600 s)",
              r.steps, r.max_mass_drift, r.max_budget_excess, secs)};
}

CriterionResult large_time() {
  const double T = 20.0;
  const RunResult r = PolarSimulator(decay_config(32, T, 0.1)).run();
  std::vector<double> t, a, peak;
  for (const auto& row : r.rows) {
    t.push_back(row.t);
    a.push_back(std::sqrt(row.a2));
    peak.push_back(row.sup_rho);
  }
  const DecayFit fit = fit_decay(t, a, T / 2, T);
  const double trend = linear_trend(t, peak, T / 2, T);
  const bool pass = !r.aborted && fit.alpha > 0.0 && fit.r2 >= 0.99 && trend <= 0.0;
  return {11, "large-time decay", pass,
          fmt("alpha %.4f (> 0), R^2 %.5f (>= 0.99), sup rho trend %.2e (<= 0)", fit.alpha, fit.r2, trend)};
}

CriterionResult commutator_representation() {
  std::vector<double> err, h;
  double qp11 = 0.0;
  for (int n : {32, 64, 128}) {
    const RepresentationRun run = representation_run("steady", n);
    err.push_back(run.report.err_direct_c512);
    h.push_back(1.0 / n);
    qp11 = std::max(qp11, run.report.err_direct_qp11);
  }
  const double slope = loglog_slope(h, err);
  const RepresentationRun manu = representation_run("manufactured", 64);
  const bool pass = err.back() <= 0.05 && slope >= 1.0 && qp11 <= 0.05 && manu.report.err_direct_qp11 <= 0.05;
  return {12, "commutator representation", pass,
          fmt("steady |direct - C512|/|F| %.2e/%.2e/%.2e, slope %.2f (>= 1), full identity %.2e; manufactured full "
              "identity %.2e (<= 5e-2)",
              err[0], err[1], err[2], slope, qp11, manu.report.err_direct_qp11)};
}

CriterionResult conformal_module() {
  const SmoothDomain eccentric(SmoothCurve::circle(0.0, 1.0), {SmoothCurve::circle(0.2, 0.3)});
  const AnnulusMap m = to_annulus(eccentric);
  const double modulus_err = std::abs(m.modulus() - kMobiusModulus);
  const double lr = std::log(m.modulus());
  auto pulled = pull_back(m, [lr](Complex zeta) { return std::log(std::abs(zeta)) / lr; });
  const CircularDomain circ({{Complex(0.2, 0.0), 0.3}});
  const SeriesHarmonic w = harmonic_measure(circ, 1);
  double worst = 0.0;
  for (const Complex z : random_interior(circ, 300, 7)) worst = std::max(worst, std::abs(pulled(z) - w.value(z)));
  const bool pass = modulus_err <= 1e-8 && worst <= 1e-6;
  return {13, "conformal module", pass,
          fmt("modulus %.12f vs %.12f (err %.1e <= 1e-8); pull-back vs direct %.1e (<= 1e-6)", m.modulus(),
              kMobiusModulus, modulus_err, worst)};
}

}  // namespace

FluidState sample_state(const PolarOps& ops, const StationaryState& st) {
  FluidState s;
  s.rho = ops.sample([&](Complex z) { return st.density(z); });
  s.u1 = ops.sample([&](Complex z) { return st.velocity(z)(0); });
  s.u2 = ops.sample([&](Complex z) { return st.velocity(z)(1); });
  return s;
}

std::vector<Complex> random_interior(const CircularDomain& d, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Complex> out;
  while (int(out.size()) < n) {
    const Complex z(u(rng), u(rng));
    if (d.contains(z)) out.push_back(z);
  }
  return out;
}

RepresentationRun representation_run(const std::string& preset, int resolution, double inner_radius) {
  const NeumannGreen green(CircularDomain::annulus(inner_radius));
  const PolarOps ops(polar_grid(inner_radius, resolution, 4 * resolution));
  RepresentationInput in;
  in.friction = WallFriction::constant(ops.nt(), 0.0, 0.0);
  if (preset == "steady") {
    in.prev = in.next = sample_state(ops, annulus_family(1.0, 3.0, in.params.gamma, inner_radius));
  } else if (preset == "manufactured") {
    const ManufacturedFlow flow(inner_radius);
    in.prev = flow.state(ops, 0.499);
    in.next = flow.state(ops, 0.501);
    in.exact_rho_udot = flow.rho_udot(ops, 0.5);
  } else {
    throw Error("commutator.unknown_preset", "preset must be steady or manufactured");
  }
  return {resolution, verify_representation(green, ops, in)};
}

std::string format_line(const CriterionResult& r) {
  return fmt("[%s] %2d %s: %s (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
}

std::vector<CriterionResult> run_acceptance(const std::set<int>& only,
                                            const std::function<void(const CriterionResult&)>& report) {
  const std::vector<std::function<CriterionResult()>> all = {
      measure_exactness, partition_of_unity, critical_index,         period_matrix_check,       green_decomposition,
      cancellation,      divcurl_estimate,   stationary_family,      classification,            simulator_conservation,
      large_time,        commutator_representation,                  conformal_module};
  std::vector<CriterionResult> out;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
      r = all[k]();
    } catch (const std::exception& e) {
      r = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()};
    }
    r.seconds = seconds_since(t0);
    if (report) report(r);
    out.push_back(r);
  }
  return out;
}

}  // namespace mcflow::suite
