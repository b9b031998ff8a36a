#include "fourbar/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fourbar/errors.hpp"
#include "fourbar/model_io.hpp"

namespace fourbar {

namespace {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Uniform double in [0,1) from pinned mt19937_64 bits; identical on every
// platform, unlike std::uniform_real_distribution.
double next_u01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1p-53;
}

Vec3 sphere_direction(std::mt19937_64& rng) {
  const double z = 2.0 * next_u01(rng) - 1.0;
  const double phi = 2.0 * kPi * next_u01(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vec3(r * std::cos(phi), r * std::sin(phi), z);
}

double get_num(const json& j, const std::string& section, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(section + "." + key + " must be a number");
  return j.at(key).get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

Vec3 get_vec3(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(name + " must be a 3-element array");
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }

  PipelineConfig c;

  const char* axis_names[3] = {"oa", "ab", "bc"};
  if (!j.contains("design_box")) throw ConfigError("design_box section missing");
  for (int a = 0; a < 3; ++a) {
    const auto& box = j.at("design_box");
    if (!box.contains(axis_names[a]))
      throw ConfigError(std::string("design_box.") + axis_names[a] + " missing");
    const auto& r = box.at(axis_names[a]);
    if (!r.is_array() || r.size() != 2)
      throw ConfigError(std::string("design_box.") + axis_names[a] + " must be [min, max]");
    c.design_box[a] = {r.at(0).get<double>(), r.at(1).get<double>()};
    if (!(c.design_box[a].first < c.design_box[a].second) || c.design_box[a].first <= 0.0)
      throw ConfigError(std::string("design_box.") + axis_names[a] +
                        " must satisfy 0 < min < max");
  }

  if (!j.contains("pivot_c") || !j.at("pivot_c").is_array() || j.at("pivot_c").size() != 2)
    throw ConfigError("pivot_c must be a 2-element array");
  c.frame.pivot_c =
      Vec2(j.at("pivot_c").at(0).get<double>(), j.at("pivot_c").at(1).get<double>());
  if (c.frame.pivot_c.x() == 0.0 && c.frame.pivot_c.y() == 0.0)
    throw ConfigError("pivot_c must differ from the origin (O and C are distinct pivots)");
  const std::string elbow = j.value("elbow", std::string("up"));
  if (elbow != "up" && elbow != "down") throw ConfigError("elbow must be 'up' or 'down'");
  c.frame.elbow = elbow == "up" ? Elbow::up : Elbow::down;

  if (j.contains("end_effector")) {
    const auto& ee = j.at("end_effector");
    c.end_effector = {get_num(ee, "end_effector", "k"), get_num(ee, "end_effector", "b")};
    if (!c.end_effector.valid())
      throw ConfigError("end_effector: need b > 0 and |k| <= b");
  }

  if (!j.contains("task")) throw ConfigError("task section missing");
  const auto& task = j.at("task");
  const auto angle_of = [&](const char* base) -> double {
    const std::string deg = std::string(base) + "_deg";
    if (task.contains(deg)) return task.at(deg).get<double>() * kPi / 180.0;
    if (task.contains(base)) return task.at(base).get<double>();
    const std::string ddeg = std::string("delta_") + base[4] + std::string("_deg");
    if (task.contains(ddeg))
      return end_effector_to_output(task.at(ddeg).get<double>() * kPi / 180.0, c.end_effector);
    throw ConfigError(std::string("task.") + base + " (or its _deg / delta form) missing");
  };
  c.task.psi_i = angle_of("psi_i");
  c.task.psi_e = angle_of("psi_e");
  if (!c.task.valid())
    throw ConfigError("task: psi_i and psi_e must be distinct and inside (-pi, pi]");

  if (!j.contains("motion")) throw ConfigError("motion section missing");
  const auto& motion = j.at("motion");
  c.law.task = c.task;
  c.law.period = get_num(motion, "motion", "period");
  const std::string prof = motion.value("profile", std::string("quintic"));
  if (prof == "cubic") c.law.profile = ProfileKind::cubic;
  else if (prof == "quintic") c.law.profile = ProfileKind::quintic;
  else if (prof == "cycloidal") c.law.profile = ProfileKind::cycloidal;
  else throw ConfigError("motion.profile must be cubic, quintic or cycloidal");
  c.law.n_samples = int(get_num_or(motion, "n_samples", 501));
  if (!c.law.valid())
    throw ConfigError("motion: need period > 0 and n_samples >= 64");

  if (j.contains("mass")) {
    const auto& mass = j.at("mass");
    if (mass.contains("link_density")) {
      const auto& ld = mass.at("link_density");
      if (ld.is_array()) {
        if (ld.size() != 3) throw ConfigError("mass.link_density array must have 3 entries");
        for (int a = 0; a < 3; ++a) c.mass.link_density[a] = ld.at(a).get<double>();
      } else {
        c.mass.link_density.fill(ld.get<double>());
      }
    }
    c.mass.end_effector_mass = get_num_or(mass, "end_effector_mass", 0.0);
    if (mass.contains("gravity")) {
      const auto& g = mass.at("gravity");
      if (!g.is_array() || g.size() != 2) throw ConfigError("mass.gravity must be [gx, gy]");
      c.mass.gravity = Vec2(g.at(0).get<double>(), g.at(1).get<double>());
    }
    c.mass.joint_damping = get_num_or(mass, "joint_damping", 0.0);
    c.mass.external_load_torque = get_num_or(mass, "external_load_torque", 0.0);
    if (!c.mass.valid())
      throw ConfigError("mass: densities, end_effector_mass and joint_damping must be >= 0");
  }

  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    if (s.contains("delta")) c.sampling.delta = get_vec3(s.at("delta"), "sampling.delta");
    if (c.sampling.delta.squaredNorm() == 0.0)
      throw ConfigError("sampling.delta must be nonzero");
    c.sampling.lines = int(get_num_or(s, "lines", 7));
    if (c.sampling.lines < 1) throw ConfigError("sampling.lines must be >= 1");
    c.sampling.anchor_seed = std::uint64_t(get_num_or(s, "anchor_seed", 77));
    c.sampling.anchor_candidates = int(get_num_or(s, "anchor_candidates", 400));
    c.sampling.min_run = int(get_num_or(s, "min_run", 14));
    c.sampling.max_run = int(get_num_or(s, "max_run", 60));
    if (c.sampling.min_run < 4 || c.sampling.max_run < c.sampling.min_run)
      throw ConfigError("sampling: need 4 <= min_run <= max_run");
    if (s.contains("shifts")) {
      std::vector<Vec3> shifts;
      for (const auto& sh : s.at("shifts")) shifts.push_back(get_vec3(sh, "sampling.shifts[]"));
      if (shifts.empty() || !shifts[0].isZero(0.0))
        throw ConfigError("sampling.shifts must start with the zero shift");
      c.sampling.explicit_shifts = std::move(shifts);
      if (!s.contains("origin_shift"))
        throw ConfigError("sampling.origin_shift required with explicit shifts");
      c.sampling.explicit_origin = get_vec3(s.at("origin_shift"), "sampling.origin_shift");
      c.sampling.lines = int(c.sampling.explicit_shifts->size());
    }
  }

  if (j.contains("fitting")) {
    const auto& f = j.at("fitting");
    if (f.contains("order")) {
      c.fitting.order = f.at("order").get<int>();
      if (*c.fitting.order < 1) throw ConfigError("fitting.order must be >= 1");
    }
    c.fitting.svd_tol = get_num_or(f, "svd_tol", 1e-8);
    if (c.fitting.svd_tol <= 0.0 || c.fitting.svd_tol >= 1.0)
      throw ConfigError("fitting.svd_tol must lie in (0, 1)");
  }

  if (j.contains("validation")) {
    const auto& v = j.at("validation");
    c.validation.lines = int(get_num_or(v, "lines", 10));
    c.validation.seed = std::uint64_t(get_num_or(v, "seed", 1));
    c.validation.spacing = get_num_or(v, "spacing", 0.9);
    c.validation.max_steps = int(get_num_or(v, "max_steps", 20));
    c.validation.threshold = get_num_or(v, "threshold", 5.0);
    if (c.validation.lines < 1 || c.validation.spacing <= 0.0 || c.validation.max_steps < 1)
      throw ConfigError("validation: need lines >= 1, spacing > 0, max_steps >= 1");
  }

  if (j.contains("optimization")) {
    const auto& o = j.at("optimization");
    if (o.contains("resolution")) {
      const auto& r = o.at("resolution");
      if (r.is_array()) {
        if (r.size() != 3) throw ConfigError("optimization.resolution must be int or [3 ints]");
        for (int a = 0; a < 3; ++a) c.optimization.resolution[a] = r.at(a).get<int>();
      } else {
        c.optimization.resolution.fill(r.get<int>());
      }
    }
    for (int r : c.optimization.resolution)
      if (r < 2) throw ConfigError("optimization.resolution must be >= 2 per axis");
    c.optimization.top_k = int(get_num_or(o, "top_k", 10));
    c.optimization.workers = int(get_num_or(o, "workers", 1));
    if (c.optimization.top_k < 1 || c.optimization.workers < 1)
      throw ConfigError("optimization: top_k and workers must be >= 1");
    if (!o.contains("original_design"))
      throw ConfigError("optimization.original_design missing");
    c.optimization.original_design =
        get_vec3(o.at("original_design"), "optimization.original_design");
  } else {
    throw ConfigError("optimization section missing");
  }

  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    c.outputs.cache = o.value("cache", c.outputs.cache);
    c.outputs.model = o.value("model", c.outputs.model);
    c.outputs.validation = o.value("validation", c.outputs.validation);
    c.outputs.report = o.value("report", c.outputs.report);
  }
  return c;
}

// ---------------------------------------------------------------------------
// sample cache

SampleCache SampleCache::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cache file: " + path);
  SampleCache cache;
  std::string line;
  std::string body;
  bool checksum_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# fnv1a ", 0) == 0) {
      const std::uint64_t stored = std::strtoull(line.c_str() + 8, nullptr, 16);
      if (stored != fnv1a64(body))
        throw ConfigError("cache checksum mismatch: file corrupted or hand-edited");
      checksum_seen = true;
      continue;
    }
    body += line;
    body += '\n';
    if (line.rfind("# fourbar-sample-cache", 0) == 0) {
      const auto pos = line.find("sim=");
      if (pos != std::string::npos) cache.sim_tag = line.substr(pos + 4);
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("line,", 0) == 0) continue;

    CacheRow row;
    std::istringstream ss(line);
    std::string tok;
    const auto next = [&]() {
      if (!std::getline(ss, tok, ',')) throw ConfigError("cache row truncated: " + line);
      return tok;
    };
    row.line = std::stoi(next());
    row.step = std::stoi(next());
    row.u[0] = parse_hexfloat(next());
    row.u[1] = parse_hexfloat(next());
    row.u[2] = parse_hexfloat(next());
    row.ok = next() == "ok";
    row.t_rms = parse_hexfloat(next());
    row.t_max = parse_hexfloat(next());
    next();  // human-readable duplicate of t_rms
    std::getline(ss, row.reason);
    cache.rows[{row.line, row.step}] = row;
  }
  if (!checksum_seen) throw ConfigError("cache file missing checksum trailer");
  return cache;
}

void SampleCache::save(const std::string& path) const {
  std::string body = "# fourbar-sample-cache format_version=1 sim=" + sim_tag + "\n";
  body += "line,k,oa_mm,ab_mm,bc_mm,status,t_rms_hex,t_max_hex,t_rms_Nm,reason\n";
  for (const auto& [key, row] : rows) {
    body += std::to_string(row.line) + "," + std::to_string(row.step) + "," +
            hexfloat(row.u[0]) + "," + hexfloat(row.u[1]) + "," + hexfloat(row.u[2]) + "," +
            (row.ok ? "ok" : "fail") + "," + hexfloat(row.t_rms) + "," + hexfloat(row.t_max) +
            "," + fmt("%.9g", row.t_rms) + "," + sanitize(row.reason) + "\n";
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write cache file: " + path);
  char trailer[32];
  std::snprintf(trailer, sizeof trailer, "# fnv1a %016" PRIx64 "\n", fnv1a64(body));
  out << body << trailer;
}

// ---------------------------------------------------------------------------
// line planning

namespace {

struct AnchorCandidate {
  Vec3 start;
  int run;
  Vec2 pq;
};

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a[0] != b[0]) return a[0] < b[0];
  if (a[1] != b[1]) return a[1] < b[1];
  return a[2] < b[2];
}

}  // namespace

SamplingPlan plan_lines(const PipelineConfig& config) {
  SamplingPlan plan;
  plan.delta = config.sampling.delta;

  if (config.sampling.explicit_shifts) {
    plan.origin_shift = *config.sampling.explicit_origin;
    plan.shifts = *config.sampling.explicit_shifts;
    plan.counts.assign(plan.shifts.size(), config.sampling.max_run);
    return plan;
  }

  const auto feasible = [&](const Vec3& u) {
    return config.in_box(u) && classify(config.frame.design_at(u), config.task).feasible();
  };

  const CharPair pair = select_char_pair(plan.delta);
  std::mt19937_64 rng(config.sampling.anchor_seed);
  const auto [lo, hi] = config.box_bounds();

  std::vector<AnchorCandidate> raw;
  for (int trial = 0; trial < config.sampling.anchor_candidates; ++trial) {
    Vec3 u;
    for (int a = 0; a < 3; ++a) u[a] = lo[a] + next_u01(rng) * (hi[a] - lo[a]);
    if (!feasible(u)) continue;
    for (int guard = 0; guard < 4096 && feasible(u - plan.delta); ++guard) u -= plan.delta;
    int run = 1;
    while (run < config.sampling.max_run && feasible(u + double(run) * plan.delta)) ++run;
    if (run < config.sampling.min_run) continue;
    const Vec2 pq = line_coordinates(plan.delta, u, pair);
    bool duplicate = false;
    for (const auto& c : raw)
      if ((c.pq - pq).cwiseAbs().maxCoeff() < 1e-9) {
        duplicate = true;
        break;
      }
    if (!duplicate) raw.push_back({u, run, pq});
  }
  if (raw.empty())
    throw ConfigError("sampling: no usable anchor lines found; enlarge the box or lower min_run");

  // first anchor: longest run (ties toward the lexicographically smallest)
  int best = 0;
  for (int i = 1; i < int(raw.size()); ++i) {
    if (raw[i].run > raw[best].run ||
        (raw[i].run == raw[best].run && lex_less(raw[i].start, raw[best].start)))
      best = i;
  }
  plan.origin_shift = raw[best].start;
  const int window = raw[best].run;

  // Realign every candidate onto the first anchor's normal plane so that all
  // lines cover one shared window of the along-delta coordinate. A line model
  // is only trusted over its own sampled range, so the windows must coincide
  // or the blend would extrapolate some line's exponentials.
  const double inv_d2 = 1.0 / plan.delta.squaredNorm();
  std::vector<AnchorCandidate> candidates;
  for (const AnchorCandidate& c : raw) {
    const double t = plan.delta.dot(c.start - plan.origin_shift) * inv_d2;
    const Vec3 start = c.start - t * plan.delta;
    if (!feasible(start)) continue;
    int run = 1;
    while (run < window && feasible(start + double(run) * plan.delta)) ++run;
    if (run < config.sampling.min_run) continue;
    candidates.push_back({start, run, c.pq});
  }

  if (int(candidates.size()) < config.sampling.lines)
    throw ConfigError("sampling: found only " + std::to_string(candidates.size()) +
                      " usable anchor lines, need " + std::to_string(config.sampling.lines) +
                      "; enlarge the box or lower min_run");

  std::vector<int> chosen;
  for (int i = 0; i < int(candidates.size()); ++i)
    if ((candidates[i].start - plan.origin_shift).cwiseAbs().maxCoeff() == 0.0) chosen.push_back(i);

  // greedy farthest-point in the normal plane for coverage
  while (int(chosen.size()) < config.sampling.lines) {
    int pick = -1;
    double pick_dist = -1.0;
    for (int i = 0; i < int(candidates.size()); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      double dist = std::numeric_limits<double>::infinity();
      for (int c : chosen) dist = std::min(dist, (candidates[i].pq - candidates[c].pq).norm());
      if (dist > pick_dist ||
          (dist == pick_dist && pick >= 0 &&
           lex_less(candidates[i].start, candidates[pick].start))) {
        pick = i;
        pick_dist = dist;
      }
    }
    chosen.push_back(pick);
  }

  int common = window;
  for (int c : chosen) common = std::min(common, candidates[c].run);
  for (int c : chosen) {
    plan.shifts.push_back(candidates[c].start - plan.origin_shift);
    plan.counts.push_back(common);
  }
  plan.shifts[0] = Vec3::Zero();
  return plan;
}

// ---------------------------------------------------------------------------
// commands

SampleSummary cmd_sample(const PipelineConfig& config, SampleCache& cache) {
  if (cache.sim_tag != kSimVersionTag)
    throw ConfigError("cache simulator tag '" + cache.sim_tag + "' does not match '" +
                      kSimVersionTag + "'");
  SampleSummary summary;
  summary.plan = plan_lines(config);
  SamplingPlan& plan = summary.plan;
  const int l = plan.lines();

  std::vector<std::vector<CacheRow>> fresh(l);
  std::vector<int> reused(l, 0);

  const auto run_line = [&](int i) {
    for (int k = 0; k < plan.counts[i]; ++k) {
      const Vec3 u = plan.sample_point(i, k);
      if (!config.in_box(u)) break;
      const auto it = cache.rows.find({i, k});
      if (it != cache.rows.end()) {
        if ((it->second.u - u).cwiseAbs().maxCoeff() != 0.0)
          throw ConfigError("cache row (" + std::to_string(i) + "," + std::to_string(k) +
                            ") was sampled at a different design point; the sampling "
                            "configuration changed — remove the stale cache");
        ++reused[i];
        if (!it->second.ok) break;
        continue;
      }
      CacheRow row;
      row.line = i;
      row.step = k;
      row.u = u;
      const SimOutcome out =
          sample_objective(config.frame.design_at(u), config.task, config.law, config.mass);
      row.ok = out.ok;
      row.t_rms = out.t_rms;
      row.t_max = out.t_max;
      row.reason = out.reason;
      fresh[i].push_back(row);
      if (!row.ok) break;
    }
  };

  const int workers = std::max(1, config.optimization.workers);
  if (workers == 1 || l == 1) {
    for (int i = 0; i < l; ++i) run_line(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next_line{0};
    for (int w = 0; w < std::min(workers, l); ++w)
      pool.emplace_back([&]() {
        for (int i = next_line.fetch_add(1); i < l; i = next_line.fetch_add(1)) run_line(i);
      });
    for (auto& t : pool) t.join();
  }

  for (int i = 0; i < l; ++i) {
    summary.reused += reused[i];
    for (const CacheRow& row : fresh[i]) {
      cache.rows[{row.line, row.step}] = row;
      ++summary.simulated;
    }
    int n = 0;
    while (n < plan.counts[i]) {
      const auto it = cache.rows.find({i, n});
      if (it == cache.rows.end() || !it->second.ok) break;
      ++n;
    }
    plan.counts[i] = n;
    summary.total_ok += n;
  }
  return summary;
}

FitSummary cmd_fit(const PipelineConfig& config, const SampleCache& cache,
                   const std::string& model_path) {
  FitSummary summary;
  summary.plan = plan_lines(config);
  SamplingPlan& plan = summary.plan;

  std::vector<LineExpModel> line_models;
  for (int i = 0; i < plan.lines(); ++i) {
    std::vector<double> values;
    const int budget = plan.counts[i];
    for (int k = 0; k < budget; ++k) {
      const auto it = cache.rows.find({i, k});
      if (it == cache.rows.end() || !it->second.ok) break;
      const Vec3 expected = plan.sample_point(i, k);
      if ((it->second.u - expected).cwiseAbs().maxCoeff() != 0.0)
        throw ConfigError("cache row (" + std::to_string(i) + "," + std::to_string(k) +
                          ") does not match the planned design point; re-run sample");
      values.push_back(it->second.t_rms);
    }
    const int need = config.fitting.order ? 2 * *config.fitting.order : 4;
    if (int(values.size()) < need)
      throw ConfigError("cache covers only " + std::to_string(values.size()) +
                        " samples of line " + std::to_string(i) + ", need " +
                        std::to_string(need) + "; run sample first");
    plan.counts[i] = int(values.size());
    Eigen::VectorXd samples = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
    try {
      line_models.push_back(
          fit_line_exponential(samples, config.fitting.order, config.fitting.svd_tol));
    } catch (const Error& e) {
      throw RankError("line " + std::to_string(i) + ": " + e.what());
    }
    summary.terms_per_line.push_back(line_models.back().n_terms);
    summary.total_terms += line_models.back().n_terms;
  }

  const BlendedModel model = build_blended(plan, std::move(line_models));
  save_model(model, model_path);
  return summary;
}

ValidationSummary cmd_validate(const PipelineConfig& config, const std::string& model_path,
                               const std::string& out_csv,
                               std::optional<std::uint64_t> seed_override) {
  const BlendedModel model = load_model(model_path);
  const TrustRegion region = make_trust_region(model);
  ValidationSummary summary;
  summary.seed = seed_override.value_or(config.validation.seed);
  std::mt19937_64 rng(summary.seed);

  const Vec3 delta_unit = model.plan.delta.normalized();
  const auto [lo, hi] = config.box_bounds();

  struct Point {
    int line, step;
    Vec3 u;
    double simulated;
  };
  std::vector<Point> points;
  std::vector<std::pair<Vec3, double>> holdout;

  const auto simulate = [&](const Vec3& u, double& out_value) {
    const SimOutcome out =
        sample_objective(config.frame.design_at(u), config.task, config.law, config.mass);
    if (out.ok) out_value = out.t_rms;
    return out.ok;
  };

  int attempts = 0;
  const int max_attempts = 400 * config.validation.lines;
  while (summary.lines_used < config.validation.lines && attempts < max_attempts) {
    ++attempts;
    Vec3 base;
    for (int a = 0; a < 3; ++a) base[a] = lo[a] + next_u01(rng) * (hi[a] - lo[a]);
    Vec3 dir = sphere_direction(rng);
    if (!hull_membership(region, base)) continue;
    if (std::abs(dir.dot(delta_unit)) > 0.99) continue;  // must differ from the sampling direction
    double base_value;
    if (!simulate(base, base_value)) continue;

    std::vector<Point> line_pts;
    line_pts.push_back({summary.lines_used, 0, base, base_value});
    const Vec3 step_vec = config.validation.spacing * dir;
    for (int side : {+1, -1}) {
      for (int k = 1; k <= config.validation.max_steps; ++k) {
        const Vec3 u = base + double(side * k) * step_vec;
        if (!config.in_box(u) || !hull_membership(region, u)) break;
        double value;
        if (!simulate(u, value)) break;
        line_pts.push_back({summary.lines_used, side * k, u, value});
      }
    }
    if (int(line_pts.size()) < 5) continue;  // too short to probe the direction
    for (const Point& p : line_pts) {
      points.push_back(p);
      holdout.emplace_back(p.u, p.simulated);
    }
    ++summary.lines_used;
  }
  if (summary.lines_used < config.validation.lines)
    std::cerr << "warning: only " << summary.lines_used << " of " << config.validation.lines
              << " holdout lines fit inside the trusted hull\n";

  summary.stats = validate_model(model, holdout, config.validation.threshold);

  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    return a.line != b.line ? a.line < b.line : a.step < b.step;
  });
  std::ostringstream csv;
  csv << "# fourbar-validation format_version=1 seed=" << summary.seed
      << " threshold=" << fmt("%.9g", config.validation.threshold) << "\n";
  csv << "line,step,oa_mm,ab_mm,bc_mm,simulated_Nm,model_Nm,residual_Nm\n";
  for (const Point& p : points) {
    const double m = evaluate_model(model, p.u);
    csv << p.line << "," << p.step << "," << fmt("%.9g", p.u[0]) << "," << fmt("%.9g", p.u[1])
        << "," << fmt("%.9g", p.u[2]) << "," << fmt("%.9g", p.simulated) << ","
        << fmt("%.9g", m) << "," << fmt("%.9g", m - p.simulated) << "\n";
  }
  csv << "# n_points " << summary.stats.n_points << " n_below " << summary.stats.n_below << "\n";
  csv << "# rmse " << hexfloat(summary.stats.rmse) << " " << fmt("%.9g", summary.stats.rmse)
      << "\n";
  if (summary.stats.rmse_below)
    csv << "# rmse_below " << hexfloat(*summary.stats.rmse_below) << " "
        << fmt("%.9g", *summary.stats.rmse_below) << "\n";
  else
    csv << "# rmse_below absent\n";
  csv << "# max_abs_err " << hexfloat(summary.stats.max_abs_err) << " "
      << fmt("%.9g", summary.stats.max_abs_err) << "\n";

  std::ofstream out(out_csv);
  if (!out) throw ConfigError("cannot write validation file: " + out_csv);
  out << csv.str();
  return summary;
}

std::optional<ValidationStats> read_validation_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  ValidationStats stats;
  std::string line;
  bool seen_rmse = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string hash, key;
    if (!(ss >> hash >> key) || hash != "#") continue;
    if (key == "rmse") {
      std::string hex;
      ss >> hex;
      stats.rmse = parse_hexfloat(hex);
      seen_rmse = true;
    } else if (key == "rmse_below") {
      std::string hex;
      ss >> hex;
      if (hex != "absent") stats.rmse_below = parse_hexfloat(hex);
    } else if (key == "max_abs_err") {
      std::string hex;
      ss >> hex;
      stats.max_abs_err = parse_hexfloat(hex);
    } else if (key == "n_points") {
      ss >> stats.n_points;
      std::string tag;
      ss >> tag >> stats.n_below;
    }
  }
  if (!seen_rmse) return std::nullopt;
  return stats;
}

OptimizeSummary cmd_optimize(const PipelineConfig& config, const std::string& model_path,
                             const std::string& report_path, int workers_override) {
  const BlendedModel model = load_model(model_path);
  const TrustRegion region = make_trust_region(model);
  const auto validation = read_validation_summary(config.outputs.validation);
  if (!validation)
    throw ConfigError("validation summary not found at '" + config.outputs.validation +
                      "'; run validate before optimize");

  OptimizeSummary summary;
  GridSpec spec;
  spec.resolution = config.optimization.resolution;
  spec.box = config.box_bounds();
  spec.top_k = config.optimization.top_k;
  spec.workers = workers_override > 0 ? workers_override : config.optimization.workers;
  summary.global = grid_search(model, region, config.frame, config.task, spec);

  const auto simulate = [&](const Vec3& u) {
    return sample_objective(config.frame.design_at(u), config.task, config.law, config.mass);
  };

  const SimOutcome global_sim = simulate(summary.global.argmin);
  if (!global_sim.ok)
    throw EmptyRegionError("grid argmin failed re-simulation: " + global_sim.reason);
  summary.global_simulated = global_sim.t_rms;
  summary.global_max = global_sim.t_max;
  summary.discrepancy_flag = std::abs(summary.global.value - summary.global_simulated) >
                             3.0 * std::max(validation->rmse, 1e-12);

  const SimOutcome original = simulate(config.optimization.original_design);
  if (!original.ok)
    throw ConfigError("optimization.original_design is infeasible: " + original.reason);
  summary.original_value = original.t_rms;
  summary.original_max = original.t_max;

  summary.local =
      local_search_baseline(simulate, config.optimization.original_design, config.box_bounds());
  const SimOutcome local_sim = simulate(summary.local.argmin);
  summary.local_max = local_sim.t_max;

  const auto savings = [&](double v) {
    return fmt("%.2f", 100.0 * (summary.original_value - v) / summary.original_value) + "%";
  };
  const auto savings_max = [&](double v) {
    return fmt("%.2f", 100.0 * (summary.original_max - v) / summary.original_max) + "%";
  };
  const auto design_row = [&](const char* name, const Vec3& u, double trms, double tmax,
                              const std::string& s1, const std::string& s2) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %10.4f %10.4f %10.4f %12.6f %12.6f %10s %10s\n", name,
                  u[0], u[1], u[2], trms, tmax, s1.c_str(), s2.c_str());
    return std::string(buf);
  };

  std::ostringstream rep;
  rep << "four-bar design optimization report (format_version 1)\n\n";
  rep << "[task] psi_i=" << fmt("%.9g", config.task.psi_i)
      << " rad psi_e=" << fmt("%.9g", config.task.psi_e) << " rad period="
      << fmt("%.9g", config.law.period) << " s n_samples=" << config.law.n_samples << "\n";
  rep << "[model] lines=" << model.plan.lines() << " terms=" << model.total_terms()
      << " which_pair=" << char_pair_name(model.which_pair) << "\n";
  rep << "[validation] rmse=" << fmt("%.9g", validation->rmse) << " Nm rmse_below="
      << (validation->rmse_below ? fmt("%.9g", *validation->rmse_below) : std::string("absent"))
      << " Nm points=" << validation->n_points << "\n";
  rep << "[grid] resolution=" << spec.resolution[0] << "x" << spec.resolution[1] << "x"
      << spec.resolution[2] << " examined=" << summary.global.evaluated
      << " feasible_in_hull=" << summary.global.feasible_evaluated << "\n";
  rep << "[local] pattern-search evaluations=" << summary.local.evaluated << "\n\n";

  rep << "design            oa_mm      ab_mm      bc_mm     T_RMS_Nm     T_max_Nm  rms_saving max_saving\n";
  rep << design_row("original", config.optimization.original_design, summary.original_value,
                    summary.original_max, "0.00%", "0.00%");
  rep << design_row("local", summary.local.argmin, summary.local.value, summary.local_max,
                    savings(summary.local.value), savings_max(summary.local_max));
  rep << design_row("global", summary.global.argmin, summary.global_simulated, summary.global_max,
                    savings(summary.global_simulated), savings_max(summary.global_max));
  rep << "\nglobal model value " << fmt("%.9g", summary.global.value) << " Nm, re-simulated "
      << fmt("%.9g", summary.global_simulated) << " Nm, discrepancy_flag="
      << (summary.discrepancy_flag ? "yes" : "no") << "\n\n";
  rep << "top_k (model values):\n";
  for (size_t i = 0; i < summary.global.top_k.size(); ++i) {
    const auto& [u, v] = summary.global.top_k[i];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%2zu. (%.4f, %.4f, %.4f) -> %.6f Nm\n", i + 1, u[0], u[1],
                  u[2], v);
    rep << buf;
  }

  std::ofstream out(report_path);
  if (!out) throw ConfigError("cannot write report file: " + report_path);
  out << rep.str();
  return summary;
}

}  // namespace fourbar
