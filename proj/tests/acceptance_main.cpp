// Acceptance gate for the four-bar torque-surrogate pipeline. Each numbered
// criterion prints exactly one [PASS]/[FAIL] line; specific check failures
// are listed indented underneath. Exit code = number of failed criteria.
//
// Usage: acceptance <path-to-fourbar_cli> <path-to-configs-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fourbar/model_io.hpp"
#include "fourbar/pipeline.hpp"

using namespace fourbar;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// ---------------------------------------------------------------------- util

struct Criterion {
  bool pass = true;
  std::string detail;
  std::vector<std::string> notes;

  void fail(const std::string& note) {
    pass = false;
    if (notes.size() < 12) notes.push_back(note);
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double u01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1p-53; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ventilator task frame shared by several criteria
const Vec2 kPivot(-39.124, -202.920);
const PtpTask kTask{65.0 * kPi / 180.0, 76.0 * kPi / 180.0};
const Vec3 kBoxLo(15.0, 40.0, 230.0);
const Vec3 kBoxHi(75.0, 110.0, 320.0);

FourBarDesign vent_design(const Vec3& u) {
  return FourBarDesign{u[0], u[1], u[2], kPivot, Elbow::up};
}

// ------------------------------------------------------- criterion 1: grids

// Sweep oracle built only from circle intersections: the output pivot B walks
// its circle in 200 steps; the design is feasible when the coupler circles
// intersect strictly at every step and the elbow-up driver angle advances
// with one consistent sign.
bool sweep_oracle_feasible(const FourBarDesign& d) {
  const int steps = 200;
  double prev_theta = 0.0;
  int sign = 0;
  for (int s = 0; s <= steps; ++s) {
    const double psi = kTask.psi_i + (kTask.psi_e - kTask.psi_i) * double(s) / steps;
    const Vec2 b = d.pivot_c + d.bc_len * Vec2(std::cos(psi), std::sin(psi));
    const double dist = b.norm();
    if (!(std::abs(d.oa_len - d.ab_len) < dist && dist < d.oa_len + d.ab_len)) return false;
    const double base = std::atan2(b.y(), b.x());
    const double cosoff =
        (d.oa_len * d.oa_len + dist * dist - d.ab_len * d.ab_len) / (2.0 * d.oa_len * dist);
    const double theta = base + std::acos(std::clamp(cosoff, -1.0, 1.0));
    if (s > 0) {
      const double dtheta = wrap_angle(theta - prev_theta);
      const int now = (dtheta > 0.0) - (dtheta < 0.0);
      if (now == 0) return false;
      if (sign != 0 && now != sign) return false;
      sign = now;
    }
    prev_theta = theta;
  }
  return true;
}

Criterion criterion_feasibility_grid() {
  Criterion c;
  const auto t0 = Clock::now();
  const int n = 30;
  std::vector<std::uint8_t> lib(n * n * n), orc(n * n * n);
  const auto node = [&](int a, int axis) {
    return kBoxLo[axis] + (kBoxHi[axis] - kBoxLo[axis]) * double(a) / (n - 1);
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const FourBarDesign d = vent_design(Vec3(node(i, 0), node(j, 1), node(k, 2)));
        const int at = (i * n + j) * n + k;
        lib[at] = classify(d, kTask).feasible() ? 1 : 0;
        orc[at] = sweep_oracle_feasible(d) ? 1 : 0;
      }

  long agree = 0, disagreements = 0;
  bool all_boundary = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const int at = (i * n + j) * n + k;
        if (lib[at] == orc[at]) {
          ++agree;
          continue;
        }
        ++disagreements;
        // a legitimate disagreement can only sit on the feasible set's
        // boundary: the oracle must flip across one of the 6 neighbours, or
        // the node must touch the search box edge
        bool boundary = i == 0 || i == n - 1 || j == 0 || j == n - 1 || k == 0 || k == n - 1;
        const int di[6] = {1, -1, 0, 0, 0, 0};
        const int dj[6] = {0, 0, 1, -1, 0, 0};
        const int dk[6] = {0, 0, 0, 0, 1, -1};
        for (int m = 0; m < 6 && !boundary; ++m) {
          const int ii = i + di[m], jj = j + dj[m], kk = k + dk[m];
          if (ii < 0 || jj < 0 || kk < 0 || ii >= n || jj >= n || kk >= n) continue;
          if (orc[(ii * n + jj) * n + kk] != orc[at]) boundary = true;
        }
        if (!boundary) {
          all_boundary = false;
          c.fail("interior disagreement at node (" + std::to_string(i) + "," + std::to_string(j) +
                 "," + std::to_string(k) + ")");
        }
      }
  const double secs = seconds_since(t0);
  const long total = long(n) * n * n;
  if (double(agree) < 0.995 * double(total))
    c.fail("agreement " + std::to_string(agree) + "/" + std::to_string(total) + " below 99.5%");
  if (secs >= 30.0) c.fail("classification took " + fmt("%.1f", secs) + " s (budget 30 s)");
  c.pass = c.pass && all_boundary;
  c.detail = std::to_string(agree) + "/" + std::to_string(total) + " nodes agree with the sweep oracle, " +
             std::to_string(disagreements) + " disagreements (all boundary-adjacent), " +
             fmt("%.1f", secs) + " s";
  return c;
}

// -------------------------------------------- criterion 2: sparse recovery

Criterion criterion_exponential_recovery() {
  Criterion c;
  std::mt19937_64 rng(20260815ull);
  int accepted = 0, rejected_conditioning = 0, failures = 0;
  double worst = 0.0;

  while (accepted < 1000) {
    const int n = 1 + int(rng() % 6);
    std::vector<std::complex<double>> nodes, coeffs;
    bool built = true;
    int guard = 0;
    while (int(nodes.size()) < n) {
      if (++guard > 400) {
        built = false;
        break;
      }
      std::vector<std::complex<double>> cand;
      if (n - int(nodes.size()) >= 2 && u01(rng) < 0.4) {
        const double r = 0.85 + 0.30 * u01(rng);
        const double ang = 0.05 + (0.7 * kPi - 0.05) * u01(rng);
        cand = {std::polar(r, ang), std::polar(r, -ang)};
      } else {
        cand = {std::complex<double>(0.8 + 0.4 * u01(rng), 0.0)};
      }
      bool ok = true;
      for (const auto& a : cand) {
        for (const auto& b : nodes) ok = ok && std::abs(a - b) >= 0.02;
        for (const auto& b : cand)
          if (&a != &b) ok = ok && std::abs(a - b) >= 0.02;
      }
      if (!ok) continue;
      for (const auto& a : cand) nodes.push_back(a);
      if (cand.size() == 2) {
        const double rho = 0.5 + 2.5 * u01(rng);
        const double phi = 2.0 * kPi * u01(rng);
        coeffs.push_back(std::polar(rho, phi));
        coeffs.push_back(std::conj(coeffs.back()));
      } else {
        const double beta = (0.5 + 2.5 * u01(rng)) * (u01(rng) < 0.5 ? -1.0 : 1.0);
        coeffs.push_back(beta);
      }
    }
    if (!built) continue;

    const int count = 2 * n + 4 + int(rng() % 14);
    Eigen::VectorXd samples(count);
    for (int k = 0; k < count; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (int j = 0; j < n; ++j) acc += coeffs[j] * std::pow(nodes[j], k);
      samples[k] = acc.real();
    }
    // sequences whose Hankel spectrum collapses below 1e-5 do not determine
    // the parameters to 1e-8 in double precision; no fitter could pass, so
    // the generator rejects them rather than demanding the impossible
    if (hankel_singular_ratio(samples, n) < 1e-5) {
      ++rejected_conditioning;
      continue;
    }
    ++accepted;

    double err = 0.0;
    try {
      const LineExpModel model = fit_line_exponential(samples);
      if (model.n_terms != n) {
        ++failures;
        c.fail("trial " + std::to_string(accepted) + ": recovered order " +
               std::to_string(model.n_terms) + " != " + std::to_string(n));
        continue;
      }
      std::vector<bool> used(n, false);
      for (int j = 0; j < n; ++j) {
        int best = -1;
        double best_d = 1e300;
        for (int m = 0; m < n; ++m) {
          if (used[m]) continue;
          const double dd = std::abs(model.nodes[j] - nodes[m]);
          if (dd < best_d) {
            best_d = dd;
            best = m;
          }
        }
        used[best] = true;
        err = std::max(err, std::abs(model.nodes[j] - nodes[best]) / std::abs(nodes[best]));
        err = std::max(err,
                       std::abs(model.coefficients[j] - coeffs[best]) / std::abs(coeffs[best]));
      }
    } catch (const Error& e) {
      ++failures;
      c.fail("trial " + std::to_string(accepted) + " threw: " + e.what());
      continue;
    }
    worst = std::max(worst, err);
    if (err > 1e-8) {
      ++failures;
      c.fail("trial " + std::to_string(accepted) + ": relative error " + fmt("%.3g", err));
    }
  }
  if (failures > 0) c.pass = false;
  c.detail = "1000/1000 recoveries within 1e-8 (worst " + fmt("%.2e", worst) + "), " +
             std::to_string(rejected_conditioning) + " ill-conditioned draws regenerated";
  if (failures > 0)
    c.detail = std::to_string(failures) + " of 1000 recoveries failed (worst " +
               fmt("%.2e", worst) + ")";
  return c;
}

// ------------------------------------- criterion 3: separable synthetic fit

struct SyntheticFit {
  SamplingPlan plan;
  BlendedModel model;
  std::vector<Eigen::VectorXd> samples;
  double rel_rmse = 0.0;
  double secs = 0.0;
  bool ok = false;
  std::string error;
};

double separable_field(const Vec3& u) {
  return std::exp(0.01 * u.x()) + std::exp(0.005 * u.y() + 0.003 * u.z());
}

SyntheticFit build_synthetic() {
  SyntheticFit out;
  const auto t0 = Clock::now();
  try {
    const Vec3 delta(6.0, 2.0, 3.0);
    out.plan.delta = delta;
    out.plan.origin_shift = Vec3(100.0, 80.0, 60.0);
    Eigen::Matrix3d forms;
    forms.row(0) = Vec3(delta.y(), -delta.x(), 0.0);
    forms.row(1) = Vec3(delta.z(), 0.0, -delta.x());
    forms.row(2) = delta;
    const double train[5][2] = {{0, 0}, {1.1, -0.7}, {-0.9, 0.8}, {0.2, 1.2}, {-1.0, -1.1}};
    out.plan.shifts.push_back(Vec3::Zero());
    for (int i = 1; i < 5; ++i)
      out.plan.shifts.push_back(
          forms.colPivHouseholderQr().solve(Vec3(train[i][0], train[i][1], 0.0)));
    out.plan.counts.assign(5, 20);

    std::vector<LineExpModel> lines;
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd samples(20);
      for (int k = 0; k < 20; ++k) samples[k] = separable_field(out.plan.sample_point(i, k));
      out.samples.push_back(samples);
      lines.push_back(fit_line_exponential(samples));
    }
    out.model = build_blended(out.plan, std::move(lines));

    // two holdout lines anchored strictly inside the training hull
    const double hold[2][2] = {{0.15, 0.2}, {-0.25, -0.1}};
    double num = 0.0, den = 0.0;
    for (const auto& h : hold) {
      const Vec3 shift = forms.colPivHouseholderQr().solve(Vec3(h[0], h[1], 0.0));
      for (int j = 0; j < 25; ++j) {
        const double k = 0.37 + 0.75 * j;  // fractional depths across the window
        const Vec3 pt = out.plan.origin_shift + shift + k * delta;
        const double truth = separable_field(pt);
        const double got = evaluate_model(out.model, pt);
        num += (got - truth) * (got - truth);
        den += truth * truth;
      }
    }
    out.rel_rmse = std::sqrt(num / den);
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
  }
  out.secs = seconds_since(t0);
  return out;
}

Criterion criterion_synthetic(const SyntheticFit& fit) {
  Criterion c;
  if (!fit.ok) {
    c.fail("synthetic fit threw: " + fit.error);
    c.detail = "fit failed";
    return c;
  }
  if (fit.rel_rmse > 1e-6) c.fail("holdout relative RMSE " + fmt("%.3g", fit.rel_rmse));
  if (fit.secs >= 60.0) c.fail("took " + fmt("%.1f", fit.secs) + " s (budget 60 s)");
  c.detail = "holdout relative RMSE " + fmt("%.2e", fit.rel_rmse) + " over 50 points, " +
             fmt("%.2f", fit.secs) + " s";
  return c;
}

// --------------------------- criterion 4: interpolation / line restriction

void check_model_invariants(Criterion& c, const char* name, const BlendedModel& model,
                            const std::vector<Eigen::VectorXd>& samples, double& worst_interp,
                            double& worst_restrict) {
  for (int i = 0; i < model.plan.lines(); ++i) {
    const double budget = std::max(1e-8, model.lines[i].fit_residual);
    for (int k = 0; k < model.plan.counts[i]; ++k) {
      const Vec3 pt = model.plan.sample_point(i, k);
      const double got = evaluate_model(model, pt);
      const double want = samples[i][k];
      const double rel = std::abs(got - want) / std::max(1.0, std::abs(want));
      worst_interp = std::max(worst_interp, rel);
      if (rel > budget)
        c.fail(std::string(name) + " line " + std::to_string(i) + " k=" + std::to_string(k) +
               ": interpolation residual " + fmt("%.3g", rel));
    }
    for (int k = 0; k + 1 < model.plan.counts[i]; k += 3) {
      const double kk = k + 0.4;
      const Vec3 pt = model.plan.sample_point(i, kk);
      const double got = evaluate_model(model, pt);
      const double want = model.lines[i].eval(kk).real();
      const double rel = std::abs(got - want) / std::max(1.0, std::abs(want));
      worst_restrict = std::max(worst_restrict, rel);
      if (rel > 1e-8)
        c.fail(std::string(name) + " line " + std::to_string(i) + " k=" + fmt("%.1f", kk) +
               ": restriction differs from the 1D model by " + fmt("%.3g", rel));
    }
  }
}

// ------------------------------------------ criterion 5: energy balance

struct PoseProbe {
  Vec2 a, b;  // joint positions, mm
  double theta;
};

PoseProbe probe(const FourBarDesign& d, double psi) {
  const auto pose = pose_for_output(d, psi);
  if (!pose) throw NearSingularError("probe pose unassemblable");
  return {pose->a_pt, pose->b_pt, pose->theta};
}

double potential_energy(const FourBarDesign& d, const MassModel& mass, double psi) {
  const double mm = 1e-3;
  const PoseProbe p = probe(d, psi);
  const Vec2 a = p.a * mm, b = p.b * mm, c = d.pivot_c * mm;
  const double m_oa = mass.link_density[0] * d.oa_len * mm;
  const double m_ab = mass.link_density[1] * d.ab_len * mm;
  const double m_bc = mass.link_density[2] * d.bc_len * mm;
  double v = 0.0;
  v -= m_oa * mass.gravity.dot(a / 2.0);
  v -= m_ab * mass.gravity.dot((a + b) / 2.0);
  v -= m_bc * mass.gravity.dot((c + b) / 2.0);
  v -= mass.end_effector_mass * mass.gravity.dot(b);
  return v;
}

double kinetic_energy(const FourBarDesign& d, const MassModel& mass, double psi, double psi_dot) {
  const double mm = 1e-3, h = 1e-6;
  const PoseProbe hi = probe(d, psi + h), lo = probe(d, psi - h);
  const auto fd = [&](const Vec2& up, const Vec2& dn) { return (up - dn) * mm / (2.0 * h) * psi_dot; };
  const Vec2 v_b = fd(hi.b, lo.b);
  const Vec2 com_oa = fd(hi.a / 2.0, lo.a / 2.0);
  const Vec2 com_ab = fd((hi.a + hi.b) / 2.0, (lo.a + lo.b) / 2.0);
  const Vec2 com_bc = v_b / 2.0;  // pivot C is fixed

  const double w_oa = wrap_angle(hi.theta - lo.theta) / (2.0 * h) * psi_dot;
  const Vec2 ab_hi = hi.b - hi.a, ab_lo = lo.b - lo.a;
  const double w_ab = wrap_angle(std::atan2(ab_hi.y(), ab_hi.x()) -
                                 std::atan2(ab_lo.y(), ab_lo.x())) / (2.0 * h) * psi_dot;
  const double w_bc = psi_dot;

  const double l_oa = d.oa_len * mm, l_ab = d.ab_len * mm, l_bc = d.bc_len * mm;
  const double m_oa = mass.link_density[0] * l_oa;
  const double m_ab = mass.link_density[1] * l_ab;
  const double m_bc = mass.link_density[2] * l_bc;
  double ke = 0.0;
  ke += 0.5 * m_oa * com_oa.squaredNorm() + 0.5 * (m_oa * l_oa * l_oa / 12.0) * w_oa * w_oa;
  ke += 0.5 * m_ab * com_ab.squaredNorm() + 0.5 * (m_ab * l_ab * l_ab / 12.0) * w_ab * w_ab;
  ke += 0.5 * m_bc * com_bc.squaredNorm() + 0.5 * (m_bc * l_bc * l_bc / 12.0) * w_bc * w_bc;
  ke += 0.5 * mass.end_effector_mass * v_b.squaredNorm();
  return ke;
}

Criterion criterion_energy_balance() {
  Criterion c;
  MassModel mass;  // conservative: gravity and inertia only
  mass.link_density = {0.8, 0.8, 0.8};
  mass.end_effector_mass = 2.5;
  mass.gravity = Vec2(0.0, -9.81);
  mass.joint_damping = 0.0;
  mass.external_load_torque = 0.0;

  MotionLaw law;
  law.task = kTask;
  law.period = 1.0;
  law.profile = ProfileKind::quintic;
  law.n_samples = 2000;

  std::mt19937_64 rng(424242ull);
  int tested = 0;
  double worst_rel = 0.0;
  while (tested < 100) {
    Vec3 u;
    for (int a = 0; a < 3; ++a) u[a] = kBoxLo[a] + u01(rng) * (kBoxHi[a] - kBoxLo[a]);
    const FourBarDesign d = vent_design(u);
    if (!sample_objective(d, kTask, law, mass).ok) continue;
    try {
      const ProfileTrace trace = generate_profile(law);
      const IkTrace ik = inverse_kinematics_trace(d, trace);
      const TorqueTrace tq = inverse_dynamics_torque(d, mass, ik);

      const double dt = tq.t[1] - tq.t[0];
      double work = 0.0;
      for (int s = 0; s + 1 < tq.t.size(); ++s)
        work += 0.5 * dt *
                (tq.torque[s] * tq.theta_dot[s] + tq.torque[s + 1] * tq.theta_dot[s + 1]);
      const double dpe =
          potential_energy(d, mass, kTask.psi_e) - potential_energy(d, mass, kTask.psi_i);

      double peak_ke = 0.0;
      for (int s = 0; s < trace.psi.size(); s += 20)
        peak_ke = std::max(peak_ke, kinetic_energy(d, mass, trace.psi[s], trace.psi_dot[s]));

      const double rel = std::abs(work - dpe) / peak_ke;
      worst_rel = std::max(worst_rel, rel);
      if (rel > 1e-3)
        c.fail("design (" + fmt("%.2f", u[0]) + ", " + fmt("%.2f", u[1]) + ", " +
               fmt("%.2f", u[2]) + "): |work - dPE| = " + fmt("%.3g", rel) + " of peak KE");
      ++tested;
    } catch (const Error&) {
      continue;  // borderline-feasible draw; replace it with another
    }
  }
  c.detail = "100 feasible designs, worst |work - dPE| = " + fmt("%.2e", worst_rel) +
             " of peak kinetic energy (bound 1e-3)";
  return c;
}

// -------------------------------------- criteria 6/7: ventilator pipeline

struct VentilatorRun {
  PipelineConfig config;
  SampleCache cache;
  FitSummary fit;
  BlendedModel model;
  std::vector<Eigen::VectorXd> samples;
  int total_samples = 0;
  bool ok = false;
  std::string error;
};

VentilatorRun run_ventilator_pipeline(const std::string& config_path, const fs::path& work) {
  VentilatorRun run;
  try {
    fs::create_directories(work);
    run.config = load_config(config_path);
    run.config.outputs.cache = (work / "cache.csv").string();
    run.config.outputs.model = (work / "model.json").string();
    run.config.outputs.validation = (work / "validation.csv").string();
    run.config.outputs.report = (work / "report.txt").string();

    cmd_sample(run.config, run.cache);
    run.cache.save(run.config.outputs.cache);
    run.fit = cmd_fit(run.config, run.cache, run.config.outputs.model);
    run.model = load_model(run.config.outputs.model);
    for (int i = 0; i < run.model.plan.lines(); ++i) {
      Eigen::VectorXd s(run.model.plan.counts[i]);
      for (int k = 0; k < run.model.plan.counts[i]; ++k)
        s[k] = run.cache.rows.at({i, k}).t_rms;
      run.samples.push_back(s);
      run.total_samples += run.model.plan.counts[i];
    }
    run.ok = true;
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

Criterion criterion_sparsity(const VentilatorRun& run) {
  Criterion c;
  if (!run.ok) {
    c.fail("pipeline failed: " + run.error);
    c.detail = "pipeline failed";
    return c;
  }
  if (run.fit.total_terms != 35)
    c.fail("expected 35 exponential terms, fitted " + std::to_string(run.fit.total_terms));
  for (size_t i = 0; i < run.fit.terms_per_line.size(); ++i)
    if (run.fit.terms_per_line[i] != 5)
      c.fail("line " + std::to_string(i) + " fitted " +
             std::to_string(run.fit.terms_per_line[i]) + " terms, expected 5");
  // the training budget must stay in the same order of magnitude as the 618
  // simulations a dense reference grid would need
  if (run.total_samples < 62 || run.total_samples > 6180)
    c.fail("sampled " + std::to_string(run.total_samples) +
           " of the dense reference budget 618; outside one order of magnitude");
  c.detail = "7 lines x 5 terms = " + std::to_string(run.fit.total_terms) + " coefficients from " +
             std::to_string(run.total_samples) + " simulations (dense reference: 618)";
  return c;
}

Criterion criterion_optimization_ordering(VentilatorRun& run) {
  Criterion c;
  if (!run.ok) {
    c.fail("pipeline failed: " + run.error);
    c.detail = "pipeline failed";
    return c;
  }
  try {
    cmd_validate(run.config, run.config.outputs.model, run.config.outputs.validation);
    const OptimizeSummary opt =
        cmd_optimize(run.config, run.config.outputs.model, run.config.outputs.report);
    if (!(opt.global_simulated <= opt.local.value))
      c.fail("re-simulated global optimum " + fmt("%.6f", opt.global_simulated) +
             " exceeds the local-search torque " + fmt("%.6f", opt.local.value));
    if (!(opt.local.value <= opt.original_value))
      c.fail("local-search torque " + fmt("%.6f", opt.local.value) +
             " exceeds the original design's " + fmt("%.6f", opt.original_value));
    c.detail = "T_RMS " + fmt("%.6f", opt.global_simulated) + " (global, re-simulated) <= " +
               fmt("%.6f", opt.local.value) + " (local) <= " + fmt("%.6f", opt.original_value) +
               " (original) N m";
  } catch (const std::exception& e) {
    c.fail(std::string("optimize threw: ") + e.what());
    c.detail = "optimize failed";
  }
  return c;
}

// ----------------------------------------------- criterion 8: eval speed

Criterion criterion_eval_throughput(const VentilatorRun& run) {
  Criterion c;
  if (!run.ok) {
    c.fail("no model to benchmark");
    c.detail = "pipeline failed";
    return c;
  }
  std::mt19937_64 rng(7);
  std::vector<Vec3> points(4096);
  for (Vec3& p : points)
    for (int a = 0; a < 3; ++a) p[a] = kBoxLo[a] + u01(rng) * (kBoxHi[a] - kBoxLo[a]);

  volatile double sink = 0.0;
  const long evals = 200000;
  const auto t0 = Clock::now();
  for (long i = 0; i < evals; ++i) sink = sink + evaluate_model(run.model, points[i & 4095]);
  const double secs = seconds_since(t0);
  const double rate = double(evals) / secs;
  if (rate < 5e4) c.fail("single-worker rate " + fmt("%.0f", rate) + " evals/s below 5e4");
  c.detail = fmt("%.3g", rate) + " model evaluations/s on one worker (bound 5e4)";
  return c;
}

// ------------------------------------------- criterion 9: reproducibility

int run_cli(const std::string& cli, const fs::path& dir, const std::string& sub,
            const std::string& config) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + sub + " --config '" +
                          config + "' >> cli_log.txt 2>&1";
  return std::system(cmd.c_str());
}

Criterion criterion_reproducibility(const std::string& cli, const std::string& config,
                                    const fs::path& scratch) {
  Criterion c;
  const fs::path a = scratch / "run_a", b = scratch / "run_b";
  for (const fs::path& dir : {a, b}) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const char* sub : {"sample", "fit", "validate", "optimize"}) {
      if (run_cli(cli, dir, sub, config) != 0) {
        c.fail(std::string(sub) + " failed in " + dir.string() + " (see cli_log.txt)");
        c.detail = "pipeline run failed";
        return c;
      }
    }
  }
  for (const char* file : {"ventilator_cache.csv", "ventilator_model.json",
                           "ventilator_validation.csv", "ventilator_report.txt"}) {
    const std::string ba = slurp((a / file).string()), bb = slurp((b / file).string());
    if (ba.empty()) c.fail(std::string(file) + " missing or empty");
    if (ba != bb) c.fail(std::string(file) + " differs between consecutive runs");
  }
  // a third sample pass must reuse every cached row and leave the file
  // byte-identical
  const std::string cache_before = slurp((a / "ventilator_cache.csv").string());
  if (run_cli(cli, a, "sample", config) != 0) c.fail("cache-reuse sample pass failed");
  if (slurp((a / "ventilator_cache.csv").string()) != cache_before)
    c.fail("cache file changed on a pure-reuse pass");
  c.detail = "model, cache, validation and report byte-identical across consecutive runs";
  return c;
}

void report(int number, const char* title, const Criterion& c, int& failures) {
  std::printf("[%s] criterion %d: %s — %s\n", c.pass ? "PASS" : "FAIL", number, title,
              c.detail.c_str());
  for (const std::string& note : c.notes) std::printf("       %s\n", note.c_str());
  if (!c.pass) ++failures;
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <fourbar_cli binary> <configs dir>\n");
    return 64;
  }
  const std::string cli = fs::absolute(argv[1]).string();
  const std::string config = (fs::absolute(argv[2]) / "ventilator.json").string();
  const fs::path scratch = fs::temp_directory_path() / "fourbar_acceptance";
  fs::create_directories(scratch);

  int failures = 0;

  report(1, "feasibility classification vs 200-step sweep oracle on a 30^3 grid",
         criterion_feasibility_grid(), failures);
  report(2, "1000 randomized exponential recoveries to 1e-8", criterion_exponential_recovery(),
         failures);

  const SyntheticFit synthetic = build_synthetic();
  report(3, "separable synthetic field: 5 training lines, 2 holdout lines",
         criterion_synthetic(synthetic), failures);

  VentilatorRun vent = run_ventilator_pipeline(config, scratch / "inproc");

  {
    Criterion c;
    double worst_interp = 0.0, worst_restrict = 0.0;
    if (synthetic.ok)
      check_model_invariants(c, "synthetic", synthetic.model, synthetic.samples, worst_interp,
                             worst_restrict);
    else
      c.fail("synthetic model unavailable");
    if (vent.ok)
      check_model_invariants(c, "ventilator", vent.model, vent.samples, worst_interp,
                             worst_restrict);
    else
      c.fail("ventilator model unavailable: " + vent.error);
    c.detail = "all training samples interpolated (worst " + fmt("%.2e", worst_interp) +
               "), line restrictions match the 1D models (worst " + fmt("%.2e", worst_restrict) +
               ")";
    report(4, "interpolation and line-restriction invariants on every training sample", c,
           failures);
  }

  report(5, "conservative stroke energy balance on 100 random feasible designs",
         criterion_energy_balance(), failures);
  report(6, "sparsity of the fitted ventilator surrogate", criterion_sparsity(vent), failures);
  report(7, "optimized torque ordering: global <= local <= original",
         criterion_optimization_ordering(vent), failures);
  report(8, "surrogate evaluation throughput", criterion_eval_throughput(vent), failures);
  report(9, "byte-identical artifacts across consecutive pipeline runs",
         criterion_reproducibility(cli, config, scratch), failures);

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures;
}
