#include "hmflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hmflow/errors.hpp"
#include "hmflow/field_synthesis.hpp"
#include "hmflow/geometry.hpp"
#include "hmflow/null_control.hpp"
#include "hmflow/rng.hpp"
#include "hmflow/snapshot.hpp"
#include "hmflow/version.hpp"

namespace hmflow {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Backward-difference sup norms sit on a round-off plateau once a stage has
// equilibrated; ratios of plateau values carry no information, so windows
// whose peak stays under this floor pass vacuously.
constexpr double kTimeDerivativeFloor = 1e-9;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string flag(bool ok) { return ok ? "pass" : "fail"; }

Vec3 unit_axis(const Config& cfg, const std::string& key, Vec3 fallback) {
  const Vec3 a = cfg.get_vec3(key, fallback);
  const double n = norm(a);
  if (n < 1e-12) throw ConfigError(key + " must be a nonzero direction");
  return {a.x / n, a.y / n, a.z / n};
}

// Smooth [0,1] envelope with vanishing normal derivative on the boundary,
// peaking at the low corner. Products of half-period cosines keep the first
// step compatible with the reflection ghosts.
double envelope(const Grid& g, int i, int j) {
  double m = 0.5 * (1.0 + std::cos(kPi * g.x(i) / g.lx));
  if (g.dim == 2) m *= 0.5 * (1.0 + std::cos(kPi * g.y(j) / g.ly));
  return m;
}

void orthonormal_about(Vec3 e, Vec3& u1, Vec3& u2) {
  Vec3 ref{1.0, 0.0, 0.0};
  const double ax = std::abs(e.x), ay = std::abs(e.y), az = std::abs(e.z);
  if (ay <= ax && ay <= az) {
    ref = {0.0, 1.0, 0.0};
  } else if (az <= ax && az <= ay) {
    ref = {0.0, 0.0, 1.0};
  }
  u1 = normalized(cross(e, ref));
  u2 = cross(e, u1);
}

void store(double* node, Vec3 v) {
  node[0] = v.x;
  node[1] = v.y;
  node[2] = v.z;
}

Vec3 load3(const double* node) { return {node[0], node[1], node[2]}; }

DirectorField tilted_cone(const GridPtr& grid, Vec3 e, double angle_deg) {
  if (!(angle_deg > 0.0 && angle_deg < 90.0)) {
    throw ConfigError("initial.cone_angle_deg must lie strictly between 0 and 90");
  }
  const double theta_max = angle_deg * kPi / 180.0;
  Vec3 u1, u2;
  orthonormal_about(e, u1, u2);
  std::vector<double> env(static_cast<std::size_t>(grid->count()));
  double env_max = 0.0;
  for (int j = 0; j < grid->ny; ++j) {
    for (int i = 0; i < grid->nx; ++i) {
      const double m = envelope(*grid, i, j);
      env[static_cast<std::size_t>(grid->index(i, j))] = m;
      env_max = std::max(env_max, m);
    }
  }
  DirectorField d(grid);
  for (int j = 0; j < grid->ny; ++j) {
    for (int i = 0; i < grid->nx; ++i) {
      const int n = grid->index(i, j);
      // Normalizing by the envelope peak makes the extreme node reach the
      // requested angle exactly, so the entry margin is cos(angle) in
      // closed form.
      const double theta = theta_max * env[static_cast<std::size_t>(n)] / env_max;
      double phi = 0.7 + 0.5 * std::cos(kPi * grid->x(i) / grid->lx);
      if (grid->dim == 2) phi += 0.4 * std::cos(kPi * grid->y(j) / grid->ly);
      const Vec3 t = std::cos(phi) * u1 + std::sin(phi) * u2;
      store(d.node(n), std::sin(theta) * t + std::cos(theta) * e);
    }
  }
  return d;
}

DirectorField random_smooth(const GridPtr& grid, Vec3 e, double amp, std::uint64_t seed) {
  if (!(amp > 0.0)) throw ConfigError("initial.amplitude must be positive");
  Rng rng(seed);
  struct Mode {
    double a = 0.0;
    Vec3 w;
  };
  std::array<Mode, 3> modes;
  for (int k = 0; k < 3; ++k) {
    Vec3 w;
    do {
      w = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    } while (norm(w) < 0.2 || norm(w) > 1.0);
    modes[static_cast<std::size_t>(k)].w = normalized(w);
    modes[static_cast<std::size_t>(k)].a = amp * rng.uniform(-1.0, 1.0) / ((k + 1.0) * (k + 1.0));
  }
  DirectorField d(grid);
  for (int j = 0; j < grid->ny; ++j) {
    for (int i = 0; i < grid->nx; ++i) {
      Vec3 p = e;
      for (int k = 0; k < 3; ++k) {
        const Mode& mo = modes[static_cast<std::size_t>(k)];
        double c = std::cos((k + 1.0) * kPi * grid->x(i) / grid->lx);
        if (grid->dim == 2) c *= std::cos((k + 1.0) * kPi * grid->y(j) / grid->ly);
        p = p + (mo.a * c) * mo.w;
      }
      store(d.node(grid->index(i, j)), normalized(p));
    }
  }
  if (hemisphere_margin(d, e) <= 0.0) {
    throw ConfigError("initial.amplitude pushes random-smooth data out of the hemisphere");
  }
  return d;
}

DirectorField from_file(const Config& cfg, const GridPtr& grid) {
  const std::string path = cfg.get_string("initial.path");
  const Snapshot s = read_snapshot(path);
  if (s.ncomp != 3 || s.slabs != 1) {
    throw ConfigError("initial.path must hold a single 3-component field: " + path);
  }
  if (s.dim != grid->dim || s.nx != grid->nx || s.ny != grid->ny) {
    throw ConfigError("initial.path grid does not match [grid]: " + path);
  }
  DirectorField d(grid);
  d.data = s.data;
  for (int i = 0; i < d.count(); ++i) {
    const Vec3 v = load3(d.node(i));
    const double n = norm(v);
    if (std::abs(n - 1.0) > 1e-6) {
      throw ConfigError("initial.path holds non-unit directors: " + path);
    }
    store(d.node(i), {v.x / n, v.y / n, v.z / n});
  }
  return d;
}

// One report row from the post-step state. prev is the pre-step state for the
// backward time difference; dt == 0 marks the initial row.
void append_row(TrajectoryReport& rep, const DirectorField& d, const DirectorField& prev,
                const MagneticField& h, Vec3 axis, double t, double lam, double dt, double eps0,
                double chart_sup_val) {
  double nd = 0.0, dtd = 0.0;
  for (int i = 0; i < d.count(); ++i) {
    const double* dn = d.node(i);
    nd = std::max(nd, std::abs(dn[0] * dn[0] + dn[1] * dn[1] + dn[2] * dn[2] - 1.0));
    if (dt > 0.0) {
      const double* pn = prev.node(i);
      const double s0 = dn[0] - pn[0], s1 = dn[1] - pn[1], s2 = dn[2] - pn[2];
      dtd = std::max(dtd, std::sqrt(s0 * s0 + s1 * s1 + s2 * s2) / dt);
    }
  }
  rep.time.push_back(t);
  rep.lambda.push_back(lam);
  rep.norm_dev.push_back(nd);
  rep.margin.push_back(hemisphere_margin(d, axis));
  rep.sup_grad.push_back(sup_gradient_norm(d));
  rep.sup_dtd.push_back(dtd);
  rep.energy.push_back(energy(d, h));
  rep.chart_sup.push_back(chart_sup_val);
  rep.bernstein.push_back(bernstein_quotient(d, axis, eps0));
}

Snapshot field_snapshot(const Grid& g, const std::vector<double>& data, int ncomp, int slabs,
                        double time, std::uint64_t seed, const std::string& hash) {
  Snapshot s;
  s.dim = g.dim;
  s.nx = g.nx;
  s.ny = g.ny;
  s.lx = g.lx;
  s.ly = g.ly;
  s.ncomp = ncomp;
  s.slabs = slabs;
  s.time = time;
  s.seed = seed;
  s.config_hash = hash;
  s.version = kVersion;
  s.data = data;
  return s;
}

void write_summary_file(const std::string& dir, const RunResult& r, const std::string& hash,
                        std::uint64_t seed) {
  std::string text;
  text += std::string("# ") + kVersion + "\n";
  text += "# config: " + hash + "\n";
  text += "# seed: " + std::to_string(seed) + "\n";
  text += r.text();
  write_text(dir + "/summary.txt", text);
}

// Identity hash of a run: the artifact directory is plumbing, not part of
// what the run computes, so it must not move the hash.
std::string run_hash(const Config& cfg) {
  Config c;
  for (const auto& [k, v] : cfg.entries()) {
    if (k != "run.out") c.set(k, v);
  }
  return c.hash();
}

// ---------------------------------------------------------------------------
// verify-geometry: seeded sweep of the chart and synthesis identities,
// checked against closed-form references rather than the code under test.

RunResult verify_geometry(const Config& cfg, std::uint64_t seed, const std::string& out) {
  const int samples = static_cast<int>(cfg.get_integer("verify.samples", 10000));
  if (samples <= 0) throw ConfigError("verify.samples must be positive");
  Rng rng(seed);

  double worst_metric = 0.0;   // J^T J - (4/h^2) I, absolute
  double worst_round = 0.0;    // project(invert(d)) - d, absolute
  double worst_frame = 0.0;    // det(E)^2 vs 16/h^4, relative
  double worst_residual = 0.0; // synthesized field vs prescribed torque, absolute
  double worst_trace = 0.0;    // trace vs h/2, relative
  double worst_det = 0.0;      // det vs -h^3/8, relative
  double worst_charpoly = 0.0; // det(A - x I) at x = +-h/2, relative to h^3/8

  for (int s = 0; s < samples; ++s) {
    const Vec2 v{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const double h = chart_h(v);

    const ChartJacobian j = stereo_jacobian(v);
    const double conf = 4.0 / (h * h);
    worst_metric = std::max({worst_metric, std::abs(dot(j.col1, j.col1) - conf),
                             std::abs(dot(j.col1, j.col2)), std::abs(dot(j.col2, j.col2) - conf)});

    const ChartFrame fr = frame_matrix(v);
    const double fref = 16.0 / (h * h * h * h);
    worst_frame = std::max(worst_frame, std::abs(fr.det * fr.det - fref) / fref);

    Vec3 dir;
    do {
      dir = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    } while (norm(dir) < 0.2 || norm(dir) > 1.0 || normalized(dir).z <= -0.99);
    dir = normalized(dir);
    const Vec3 back = stereo_project(stereo_invert(dir));
    worst_round = std::max(worst_round, norm(back - dir));

    const Vec2 f{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    const Vec3 hh = synthesize_node(v, f);
    worst_residual = std::max(worst_residual, synthesis_residual_node(v, f, hh, true));

    const Mat3 a = build_synthesis_matrix(v);
    const double scale = h * h * h / 8.0;
    worst_trace = std::max(worst_trace, std::abs(a.m[0][0] + a.m[1][1] + a.m[2][2] - 0.5 * h) / h);
    worst_det = std::max(worst_det, std::abs(det(a) + scale) / scale);
    for (const double x : {0.5 * h, -0.5 * h}) {
      Mat3 shifted = a;
      shifted.m[0][0] -= x;
      shifted.m[1][1] -= x;
      shifted.m[2][2] -= x;
      worst_charpoly = std::max(worst_charpoly, std::abs(det(shifted)) / scale);
    }
  }

  // Support exactness of the field-level synthesis on a small grid: nodes
  // outside omega must come back as exact zeros.
  const GridPtr g = make_grid_1d(65);
  ChartField vf(g);
  ControlDensity ff(g);
  for (int i = 0; i < g->count(); ++i) {
    vf.node(i)[0] = 0.4 * std::cos(kPi * g->x(i));
    vf.node(i)[1] = 0.2 * std::cos(2.0 * kPi * g->x(i));
    ff.node(i)[0] = 1.0;
    ff.node(i)[1] = -0.5;
  }
  const MagneticField hf = synthesize_field(vf, ff);
  bool support_exact = true;
  for (int i = 0; i < g->count(); ++i) {
    if (g->in_omega(i)) continue;
    const double* hn = hf.node(i);
    if (hn[0] != 0.0 || hn[1] != 0.0 || hn[2] != 0.0) support_exact = false;
  }

  const bool ok = worst_metric <= 1e-12 && worst_round <= 1e-10 && worst_frame <= 1e-10 &&
                  worst_residual <= 1e-10 && worst_trace <= 1e-10 && worst_det <= 1e-10 &&
                  worst_charpoly <= 1e-10 && support_exact;

  RunResult r;
  r.exit_code = ok ? 0 : 1;
  r.add("experiment", std::string("verify-geometry"));
  r.add("samples", static_cast<double>(samples));
  r.add("max_metric_residual", worst_metric);
  r.add("max_roundtrip_error", worst_round);
  r.add("max_frame_det_rel", worst_frame);
  r.add("max_synthesis_residual", worst_residual);
  r.add("max_trace_rel", worst_trace);
  r.add("max_det_rel", worst_det);
  r.add("max_charpoly_rel", worst_charpoly);
  r.add("support_exact", std::string(support_exact ? "yes" : "no"));
  r.add("verdict", flag(ok));

  if (!out.empty()) {
    std::filesystem::create_directories(out);
    write_summary_file(out, r, run_hash(cfg), seed);
  }
  return r;
}

// ---------------------------------------------------------------------------
// stage1: one uniform-field leg (rest, ramp, hold, ramp, rest) with the full
// monitor battery and the hold-stage decay comparison.

RunResult stage1_experiment(const Config& cfg, std::uint64_t seed, const std::string& out) {
  const GridPtr grid = grid_from_config(cfg);
  const double T0 = cfg.get_number("schedule.T0", 0.05);
  const double eps4 = cfg.get_number("schedule.eps4", 1e-3);
  if (!(T0 > 0.0)) throw ConfigError("schedule.T0 must be positive");
  const Vec3 target = unit_axis(cfg, "schedule.target", {0.0, 0.0, 1.0});

  DirectorField d = initial_data(cfg, grid, seed);
  const double eps0 = hemisphere_margin(d, target);
  if (eps0 <= 0.0) throw ConfigError("initial data must start inside the target hemisphere");

  Schedule s;
  s.T0 = T0;
  s.Lambda = cfg.has("schedule.lambda") ? cfg.get_number("schedule.lambda")
                                        : required_lambda(eps0, T0, eps4);
  if (!(s.Lambda >= 0.0)) throw ConfigError("schedule.lambda must be nonnegative");
  s.start = target;
  s.target = target;
  s.chart_rotation = rotation_between(target, {0.0, 0.0, 1.0});

  // The reaction-stability bound alone lets weak fields take a handful of
  // steps per stage; the floor keeps the smoothstep ramp and the explicit
  // gradient terms resolved regardless of field strength.
  int sps = std::max(20, static_cast<int>(std::ceil(T0 / stable_dt(s.Lambda))));
  if (cfg.has("schedule.steps_per_stage")) {
    const int req = static_cast<int>(cfg.get_integer("schedule.steps_per_stage"));
    if (req < sps) {
      throw ConfigError("schedule.steps_per_stage is below the explicit stability floor");
    }
    sps = req;
  }
  const double dt = T0 / sps;
  const Stepper st(grid, dt);

  TrajectoryReport rep;
  append_row(rep, d, d, uniform_field(grid, 0.0, target), target, 0.0, 0.0, 0.0, eps0, 0.0);
  const double sup_grad0 = rep.sup_grad[0];
  run_uniform_stages(st, d, s, sps, 0.0, eps0, rep);
  const MonitorVerdict mv = check_uniform_leg(rep, 0, rep.size() - 1, s, 0.0, eps0, sup_grad0);

  RunResult r;
  r.exit_code = mv.all_ok() ? 0 : 1;
  r.add("experiment", std::string("stage1"));
  r.add("eps0", eps0);
  r.add("lambda", s.Lambda);
  r.add("dt", dt);
  r.add("steps", static_cast<double>(5 * sps));
  r.add("decay_measured", mv.decay_measured);
  r.add("decay_bound", mv.decay_bound);
  r.add("final_margin", rep.margin.back());
  r.add("min_margin", mv.min_margin);
  r.add("gradient_ratio", mv.gradient_ratio);
  r.add("worst_dtd_ratio", mv.worst_dtd_ratio);
  r.add("max_norm_dev", mv.max_norm_dev);
  r.add("margin_ok", flag(mv.margin_ok));
  r.add("gradient_ok", flag(mv.gradient_ok));
  r.add("dtd_ok", flag(mv.dtd_ok));
  r.add("energy_ok", flag(mv.energy_ok));
  r.add("norm_ok", flag(mv.norm_ok));
  r.add("decay_ok", flag(mv.decay_ok));
  r.add("verdict", flag(mv.all_ok()));

  if (!out.empty()) {
    std::filesystem::create_directories(out);
    const std::string hash = run_hash(cfg);
    write_text(out + "/report.csv", report_csv(rep, hash, seed, kVersion));
    write_summary_file(out, r, hash, seed);
    write_snapshot(out + "/director_final.bin",
                   field_snapshot(*grid, d.data, 3, 1, rep.time.back(), seed, hash));
    write_text(out + "/director_final.csv", field_csv(*grid, d.data, 3, hash, seed, kVersion));
  }
  return r;
}

// ---------------------------------------------------------------------------
// equivalence: advance the chart system and the director system driven by the
// synthesized field from the same control, and track their divergence.

RunResult equivalence_experiment(const Config& cfg, std::uint64_t seed, const std::string& out) {
  const GridPtr grid = grid_from_config(cfg);
  const double T = cfg.get_number("equivalence.horizon", 0.05);
  const double dt_req = cfg.get_number("equivalence.dt", 1e-4);
  const double amp = cfg.get_number("equivalence.amplitude", 0.15);
  const double camp = cfg.get_number("equivalence.control_amplitude", 0.3);
  const double tol = cfg.get_number("equivalence.tol", 5e-3);
  if (!(T > 0.0) || !(dt_req > 0.0) || dt_req > T) {
    throw ConfigError("equivalence.horizon and equivalence.dt must satisfy 0 < dt <= horizon");
  }
  if (!(tol > 0.0)) throw ConfigError("equivalence.tol must be positive");
  const int steps = static_cast<int>(std::llround(T / dt_req));
  if (steps < 1) throw ConfigError("equivalence horizon shorter than one step");
  const double dt = T / steps;

  ChartField v(grid);
  for (int j = 0; j < grid->ny; ++j) {
    for (int i = 0; i < grid->nx; ++i) {
      const int n = grid->index(i, j);
      double c1 = std::cos(kPi * grid->x(i) / grid->lx);
      double c2 = std::cos(2.0 * kPi * grid->x(i) / grid->lx);
      if (grid->dim == 2) {
        c1 *= std::cos(kPi * grid->y(j) / grid->ly);
        c2 *= std::cos(2.0 * kPi * grid->y(j) / grid->ly);
      }
      v.node(n)[0] = amp * c1;
      v.node(n)[1] = 0.5 * amp * c2;
    }
  }
  DirectorField d(grid);
  for (int i = 0; i < grid->count(); ++i) {
    const double* vn = v.node(i);
    store(d.node(i), stereo_project({vn[0], vn[1]}));
  }
  const double margin0 = hemisphere_margin(d, {0.0, 0.0, 1.0});

  const Stepper st(grid, dt);
  ControlDensity f(grid);
  ChartField vlive(grid);
  std::vector<double> series;
  series.reserve(static_cast<std::size_t>(steps));
  double sup_div = 0.0;
  double margin_min = margin0;
  double chart_peak = sup_norm(v);

  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    for (int j = 0; j < grid->ny; ++j) {
      for (int i = 0; i < grid->nx; ++i) {
        const int n = grid->index(i, j);
        double* fn = f.node(n);
        if (grid->in_omega(n)) {
          fn[0] = camp * std::sin(2.0 * kPi * t / T) * std::cos(kPi * grid->x(i) / grid->lx);
          fn[1] = camp * std::cos(2.0 * kPi * t / T);
        } else {
          fn[0] = 0.0;
          fn[1] = 0.0;
        }
      }
    }
    // Chart side.
    st.step_chart(v, &f);
    // Director side: invert the current state, synthesize, advance.
    for (int i = 0; i < d.count(); ++i) {
      const Vec2 vi = stereo_invert(load3(d.node(i)));
      vlive.node(i)[0] = vi.x;
      vlive.node(i)[1] = vi.y;
    }
    const MagneticField h = synthesize_field(vlive, f);
    st.step_director(d, h);

    double div = 0.0;
    for (int i = 0; i < grid->count(); ++i) {
      const double* vn = v.node(i);
      div = std::max(div, norm(stereo_project({vn[0], vn[1]}) - load3(d.node(i))));
    }
    series.push_back(div);
    sup_div = std::max(sup_div, div);
    margin_min = std::min(margin_min, hemisphere_margin(d, {0.0, 0.0, 1.0}));
    chart_peak = std::max(chart_peak, sup_norm(v));
  }

  RunResult r;
  r.exit_code = sup_div <= tol ? 0 : 1;
  r.add("experiment", std::string("equivalence"));
  r.add("steps", static_cast<double>(steps));
  r.add("dt", dt);
  r.add("sup_divergence", sup_div);
  r.add("final_divergence", series.empty() ? 0.0 : series.back());
  r.add("margin0", margin0);
  r.add("margin_min", margin_min);
  r.add("chart_peak", chart_peak);
  r.add("verdict", flag(sup_div <= tol));

  if (!out.empty()) {
    std::filesystem::create_directories(out);
    const std::string hash = run_hash(cfg);
    std::string csv;
    csv += std::string("# ") + kVersion + "\n";
    csv += "# config: " + hash + "\n";
    csv += "# seed: " + std::to_string(seed) + "\n";
    csv += "step,time,divergence\n";
    for (int k = 0; k < steps; ++k) {
      csv += std::to_string(k + 1);
      csv += ',';
      csv += format_number((k + 1) * dt);
      csv += ',';
      csv += format_number(series[static_cast<std::size_t>(k)]);
      csv += '\n';
    }
    write_text(out + "/divergence.csv", csv);
    write_summary_file(out, r, hash, seed);
    write_snapshot(out + "/chart_final.bin", field_snapshot(*grid, v.data, 2, 1, T, seed, hash));
    write_snapshot(out + "/director_final.bin",
                   field_snapshot(*grid, d.data, 3, 1, T, seed, hash));
  }
  return r;
}

// ---------------------------------------------------------------------------
// hum: penalized null control of the plain linearized system (zero coupling),
// benchmarked against the uncontrolled decay.

RunResult hum_experiment(const Config& cfg, std::uint64_t seed, const std::string& out) {
  const GridPtr grid = grid_from_config(cfg);
  const double T = cfg.get_number("hum.horizon", 0.1);
  const int steps = static_cast<int>(cfg.get_integer("hum.steps", 200));
  const double penalty = cfg.get_number("hum.penalty", 1e-6);
  const double tol = cfg.get_number("hum.tol", 1e-10);
  const int maxit = static_cast<int>(cfg.get_integer("hum.maxit", 2000));
  const double target_ratio = cfg.get_number("hum.target", 1e-2);
  if (!(T > 0.0) || steps < 1) throw ConfigError("hum.horizon and hum.steps must be positive");
  if (!(penalty > 0.0)) throw ConfigError("hum.penalty must be positive");
  if (!(tol > 0.0) || maxit < 1) throw ConfigError("hum.tol and hum.maxit must be positive");
  const double dt = T / steps;
  const Stepper st(grid, dt);

  LinearState y0(grid);
  for (int j = 0; j < grid->ny; ++j) {
    for (int i = 0; i < grid->nx; ++i) {
      double c = std::cos(kPi * grid->x(i) / grid->lx);
      if (grid->dim == 2) c *= std::cos(kPi * grid->y(j) / grid->ly);
      y0.node(grid->index(i, j))[0] = c;
      y0.node(grid->index(i, j))[1] = 0.0;
    }
  }
  const double y0n = l2_norm(y0);

  const std::vector<std::vector<Mat2>> a(
      static_cast<std::size_t>(steps),
      std::vector<Mat2>(static_cast<std::size_t>(grid->count())));
  const HumResult hr = hum_null_control(st, a, y0, penalty, tol, maxit);

  LinearState yfree = y0;
  for (int k = 0; k < steps; ++k) st.step_linearized(yfree, a[static_cast<std::size_t>(k)], nullptr);
  const double uncontrolled = l2_norm(yfree) / y0n;
  const double ratio = hr.terminal_norm / y0n;
  const bool ok = hr.converged && ratio <= target_ratio;

  RunResult r;
  r.exit_code = ok ? 0 : 1;
  r.add("experiment", std::string("hum"));
  r.add("steps", static_cast<double>(steps));
  r.add("dt", dt);
  r.add("penalty", penalty);
  r.add("terminal_ratio", ratio);
  r.add("uncontrolled_ratio", uncontrolled);
  r.add("cg_iterations", static_cast<double>(hr.iterations));
  r.add("converged", std::string(hr.converged ? "yes" : "no"));
  r.add("control_cost", hr.cost);
  r.add("sup_control", hr.sup_control);
  r.add("verdict", flag(ok));

  if (!out.empty()) {
    std::filesystem::create_directories(out);
    const std::string hash = run_hash(cfg);
    std::vector<double> slabs;
    slabs.reserve(hr.u.size() * static_cast<std::size_t>(2 * grid->count()));
    for (const ControlDensity& u : hr.u) slabs.insert(slabs.end(), u.data.begin(), u.data.end());
    write_snapshot(out + "/control.bin",
                   field_snapshot(*grid, slabs, 2, steps, T, seed, hash));
    write_summary_file(out, r, hash, seed);
  }
  return r;
}

// ---------------------------------------------------------------------------
// steer: waypoint legs of uniform-field focusing followed by chart-space null
// control, ending at the requested target direction.

RunResult steer_experiment(const Config& cfg, std::uint64_t seed, const std::string& out) {
  const GridPtr grid = grid_from_config(cfg);
  const double T = cfg.get_number("schedule.T", 1.0);
  const double eps4 = cfg.get_number("schedule.eps4", 1e-3);
  if (!(T > 0.0)) throw ConfigError("schedule.T must be positive");
  const Vec3 p = unit_axis(cfg, "schedule.target", {1.0, 0.0, 0.0});
  const Vec3 e = unit_axis(cfg, "initial.axis", {0.0, 0.0, 1.0});
  const double final_tol = cfg.get_number("steer.final_tol", 1e-2);
  const double penalty = cfg.get_number("picard.penalty", 1e-9);
  const double hum_tol = cfg.get_number("picard.hum_tol", 1e-12);
  const int hum_maxit = static_cast<int>(cfg.get_integer("picard.hum_maxit", 5000));
  const double outer_tol = cfg.get_number("picard.outer_tol", 1e-9);
  const int outer_maxit = static_cast<int>(cfg.get_integer("picard.outer_maxit", 10));
  if (!(penalty > 0.0) || !(hum_tol > 0.0) || hum_maxit < 1 || !(outer_tol > 0.0) ||
      outer_maxit < 1) {
    throw ConfigError("[picard] parameters must be positive");
  }

  DirectorField d = initial_data(cfg, grid, seed);
  const auto [q1, q2] = waypoints(e, p);
  const std::array<Vec3, 4> targets{e, q1, q2, p};
  const double legT = T / 4.0;

  RunResult r;
  r.add("experiment", std::string("steer"));
  r.add("waypoint1", format_number(q1.x) + "," + format_number(q1.y) + "," + format_number(q1.z));
  r.add("waypoint2", format_number(q2.x) + "," + format_number(q2.y) + "," + format_number(q2.z));

  TrajectoryReport rep;
  append_row(rep, d, d, uniform_field(grid, 0.0, e), e, 0.0, 0.0, 0.0,
             std::max(hemisphere_margin(d, e), 1e-12), 0.0);

  bool all_ok = true;
  bool aborted = false;
  double t_abs = 0.0;
  std::vector<std::vector<ControlDensity>> controls;

  for (int leg = 0; leg < 4 && !aborted; ++leg) {
    const std::string pre = "leg" + std::to_string(leg + 1) + ".";
    const Vec3 tgt = targets[static_cast<std::size_t>(leg)];
    const double eps0 = hemisphere_margin(d, tgt);
    r.add(pre + "eps0", eps0);
    if (eps0 <= 0.0) {
      all_ok = false;
      aborted = true;
      break;
    }
    const Schedule s = build_leg_schedule(
        leg == 0 ? e : targets[static_cast<std::size_t>(leg - 1)], tgt, legT, eps0, eps4);
    const int sps = std::max(20, static_cast<int>(std::ceil(s.T0 / stable_dt(s.Lambda))));
    const double dt = s.T0 / sps;
    const Stepper st(grid, dt);
    r.add(pre + "lambda", s.Lambda);
    r.add(pre + "dt", dt);

    const double sup_grad0 = sup_gradient_norm(d);
    const std::size_t k0 = rep.size() - 1;
    run_uniform_stages(st, d, s, sps, t_abs, eps0, rep);
    const MonitorVerdict mv = check_uniform_leg(rep, k0, rep.size() - 1, s, t_abs, eps0, sup_grad0);
    t_abs += 5.0 * s.T0;
    r.add(pre + "min_margin", mv.min_margin);
    r.add(pre + "gradient_ratio", mv.gradient_ratio);
    r.add(pre + "worst_dtd_ratio", mv.worst_dtd_ratio);
    r.add(pre + "decay_measured", mv.decay_measured);
    r.add(pre + "decay_bound", mv.decay_bound);
    r.add(pre + "max_norm_dev", mv.max_norm_dev);
    r.add(pre + "monitors", flag(mv.all_ok()));
    if (!mv.all_ok()) all_ok = false;

    // Stage 6: null control in the chart whose pole is the leg target.
    ChartField v0(grid);
    for (int i = 0; i < grid->count(); ++i) {
      const Vec2 vi = stereo_invert(s.chart_rotation * load3(d.node(i)));
      v0.node(i)[0] = vi.x;
      v0.node(i)[1] = vi.y;
    }
    r.add(pre + "chart_entry_sup", sup_norm(v0));
    const PicardResult pr =
        picard_null_control(st, v0, sps, penalty, hum_tol, hum_maxit, outer_tol, outer_maxit);
    r.add(pre + "picard_outer", static_cast<double>(pr.outer_iterations));
    r.add(pre + "picard_change", pr.last_change);
    r.add(pre + "picard_terminal", pr.terminal_norm);
    r.add(pre + "cg_iterations", static_cast<double>(pr.hum.iterations));
    r.add(pre + "picard_converged", std::string(pr.converged ? "yes" : "no"));
    if (!pr.converged) all_ok = false;
    controls.push_back(pr.hum.u);

    // Replay the synthesized field on the director system, inverting the
    // live state each step so the chart stays glued to the flow.
    const Mat3 rinv = s.chart_rotation.transposed();
    ChartField vlive(grid);
    MagneticField hphys(grid);
    DirectorField prev = d;
    for (int k = 0; k < sps; ++k) {
      for (int i = 0; i < grid->count(); ++i) {
        const Vec2 vi = stereo_invert(s.chart_rotation * load3(d.node(i)));
        vlive.node(i)[0] = vi.x;
        vlive.node(i)[1] = vi.y;
      }
      const MagneticField hch =
          synthesize_field(vlive, pr.hum.u[static_cast<std::size_t>(k)]);
      for (int i = 0; i < grid->count(); ++i) store(hphys.node(i), rinv * load3(hch.node(i)));
      st.step_director(d, hphys);
      append_row(rep, d, prev, hphys, tgt, t_abs + (k + 1) * dt, 0.0, dt, eps0, sup_norm(vlive));
      prev = d;
      if (rep.margin.back() <= 0.0 || rep.norm_dev.back() > 1e-9) {
        all_ok = false;
        aborted = true;
        break;
      }
    }
    t_abs += s.T0;
    r.add(pre + "margin_after_null", hemisphere_margin(d, tgt));
  }

  double final_error = 0.0;
  for (int i = 0; i < grid->count(); ++i) {
    final_error = std::max(final_error, norm(load3(d.node(i)) - p));
  }
  const bool ok = all_ok && !aborted && final_error <= final_tol;
  r.exit_code = ok ? 0 : 1;
  r.add("final_error", final_error);
  r.add("final_margin", hemisphere_margin(d, p));
  r.add("aborted", std::string(aborted ? "yes" : "no"));
  r.add("verdict", flag(ok));

  if (!out.empty()) {
    std::filesystem::create_directories(out);
    const std::string hash = run_hash(cfg);
    write_text(out + "/report.csv", report_csv(rep, hash, seed, kVersion));
    write_summary_file(out, r, hash, seed);
    write_snapshot(out + "/director_final.bin",
                   field_snapshot(*grid, d.data, 3, 1, rep.time.back(), seed, hash));
    write_text(out + "/director_final.csv", field_csv(*grid, d.data, 3, hash, seed, kVersion));
    for (std::size_t leg = 0; leg < controls.size(); ++leg) {
      std::vector<double> slabs;
      for (const ControlDensity& u : controls[leg]) {
        slabs.insert(slabs.end(), u.data.begin(), u.data.end());
      }
      write_snapshot(out + "/control_leg" + std::to_string(leg + 1) + ".bin",
                     field_snapshot(*grid, slabs, 2, static_cast<int>(controls[leg].size()),
                                    legT / 6.0, seed, hash));
    }
  }
  return r;
}

}  // namespace

void RunResult::add(const std::string& key, const std::string& value) {
  summary.emplace_back(key, value);
}

void RunResult::add(const std::string& key, double value) {
  summary.emplace_back(key, format_number(value));
}

std::string RunResult::text() const {
  std::string out;
  for (const auto& [k, v] : summary) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

double RunResult::number(const std::string& key) const {
  const std::string& v = str(key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw Error("summary value for " + key + " is not numeric: " + v);
  }
  return x;
}

const std::string& RunResult::str(const std::string& key) const {
  for (const auto& [k, v] : summary) {
    if (k == key) return v;
  }
  throw Error("summary key not found: " + key);
}

GridPtr grid_from_config(const Config& cfg) {
  const int dim = static_cast<int>(cfg.get_integer("grid.dimension", 1));
  const int nx = static_cast<int>(cfg.get_integer("grid.nx", 201));
  const double lx = cfg.get_number("grid.lx", 1.0);
  const double frac = cfg.get_number("grid.omega_fraction", 0.25);
  if (dim == 1) return make_grid_1d(nx, lx, frac);
  if (dim == 2) {
    const int ny = static_cast<int>(cfg.get_integer("grid.ny", nx));
    const double ly = cfg.get_number("grid.ly", lx);
    return make_grid_2d(nx, ny, lx, ly, frac);
  }
  throw ConfigError("grid.dimension must be 1 or 2");
}

DirectorField initial_data(const Config& cfg, const GridPtr& grid, std::uint64_t seed) {
  const std::string preset = cfg.get_string("initial.preset", "tilted-cone");
  const Vec3 axis = unit_axis(cfg, "initial.axis", {0.0, 0.0, 1.0});
  if (preset == "constant") {
    DirectorField d(grid);
    for (int i = 0; i < d.count(); ++i) store(d.node(i), axis);
    return d;
  }
  if (preset == "tilted-cone") {
    return tilted_cone(grid, axis, cfg.get_number("initial.cone_angle_deg", 60.0));
  }
  if (preset == "random-smooth") {
    return random_smooth(grid, axis, cfg.get_number("initial.amplitude", 0.3), seed);
  }
  if (preset == "file") {
    return from_file(cfg, grid);
  }
  throw ConfigError("unknown initial.preset: " + preset);
}

void run_uniform_stages(const Stepper& st, DirectorField& d, const Schedule& s,
                        int steps_per_stage, double t_abs0, double eps0, TrajectoryReport& rep) {
  if (steps_per_stage < 1) throw DomainError("run_uniform_stages: need at least one step per stage");
  const double dt = st.dt();
  DirectorField prev = d;
  for (int k = 0; k < 5 * steps_per_stage; ++k) {
    const double lam = lambda_profile(k * dt, s);
    const MagneticField h = uniform_field(st.grid(), lam, s.target);
    st.step_director(d, h);
    append_row(rep, d, prev, h, s.target, t_abs0 + (k + 1) * dt, lam, dt, eps0, 0.0);
    prev = d;
  }
}

MonitorVerdict check_uniform_leg(const TrajectoryReport& rep, std::size_t k0, std::size_t k1,
                                 const Schedule& s, double t_abs0, double eps0,
                                 double sup_grad0) {
  (void)t_abs0;
  if (k1 <= k0 || k1 >= rep.size() || (k1 - k0) % 5 != 0) {
    throw DomainError("check_uniform_leg: rows must cover five equal stages");
  }
  const std::size_t sps = (k1 - k0) / 5;
  MonitorVerdict v;

  double peak_grad = 0.0;
  for (std::size_t k = k0 + 1; k <= k1; ++k) {
    v.min_margin = std::min(v.min_margin, rep.margin[k]);
    v.max_norm_dev = std::max(v.max_norm_dev, rep.norm_dev[k]);
    peak_grad = std::max(peak_grad, rep.sup_grad[k]);
  }
  v.margin_ok = v.min_margin >= eps0 * (1.0 - kGridSlack);
  v.norm_ok = v.max_norm_dev <= 1e-9;
  if (sup_grad0 > 1e-13) {
    v.gradient_ratio = peak_grad / ((2.0 / eps0) * sup_grad0);
    v.gradient_ok = v.gradient_ratio <= 1.0 + kGridSlack;
  } else {
    v.gradient_ratio = 0.0;
    v.gradient_ok = peak_grad <= 1e-10;
  }

  // Time-derivative comparison on the constant-amplitude stages only; the
  // underlying argument needs a fixed field over the window.
  const std::size_t starts[3] = {0, 2 * sps, 4 * sps};
  const double eps1s[3] = {eps0, rep.margin[k0 + 2 * sps], rep.margin[k0 + 4 * sps]};
  for (int w = 0; w < 3; ++w) {
    const std::size_t a = k0 + starts[w];
    const double base = rep.sup_dtd[a + 1];
    double worst = 0.0;
    for (std::size_t k = a + 1; k <= a + sps; ++k) worst = std::max(worst, rep.sup_dtd[k]);
    if (worst <= kTimeDerivativeFloor) continue;
    if (!(base > 0.0) || !(eps1s[w] > 0.0)) {
      v.dtd_ok = false;
      continue;
    }
    const double ratio = worst * eps1s[w] / base;
    v.worst_dtd_ratio = std::max(v.worst_dtd_ratio, ratio);
    if (ratio > 1.0 + kGridSlack) v.dtd_ok = false;
  }

  // Per-step energy decrease along the same stages. Rows a+1..a+sps record
  // the stage's uniform field, so only pairs inside that range compare like
  // with like.
  const double etol = 1e-10 * (1.0 + s.Lambda * s.Lambda);
  for (int w = 0; w < 3; ++w) {
    const std::size_t a = k0 + starts[w];
    for (std::size_t k = a + 1; k + 1 <= a + sps; ++k) {
      if (rep.energy[k + 1] > rep.energy[k] + etol) v.energy_ok = false;
    }
  }

  const double m2 = rep.margin[k0 + 2 * sps];
  const double m3 = rep.margin[k0 + 3 * sps];
  v.decay_measured = 1.0 - m3;
  v.decay_bound = std::exp(-s.Lambda * s.Lambda * m2 * s.T0);
  v.decay_ok = v.decay_measured <= 2.0 * v.decay_bound + 1e-12;
  return v;
}

RunResult run_experiment(const Config& cfg) {
  const std::string name = cfg.get_string("run.experiment");
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_integer("run.seed", 0));
  const std::string out = cfg.get_string("run.out", "");
  if (name == "verify-geometry") return verify_geometry(cfg, seed, out);
  if (name == "stage1") return stage1_experiment(cfg, seed, out);
  if (name == "equivalence") return equivalence_experiment(cfg, seed, out);
  if (name == "hum") return hum_experiment(cfg, seed, out);
  if (name == "steer") return steer_experiment(cfg, seed, out);
  throw ConfigError("unknown run.experiment: " + name);
}

}  // namespace hmflow
