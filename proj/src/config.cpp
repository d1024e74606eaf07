#include "refract/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace refract {

using nlohmann::json;

Command parse_command(const std::string& name) {
  if (name == "solve") return Command::solve;
  if (name == "verify") return Command::verify;
  if (name == "mtw-certify" || name == "mtw_certify") return Command::mtw_certify;
  if (name == "trace") return Command::trace;
  if (name == "r-convexity" || name == "r_convexity") return Command::r_convexity;
  throw ConfigError("unknown command: " + name);
}

std::string command_name(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::verify: return "verify";
    case Command::mtw_certify: return "mtw-certify";
    case Command::trace: return "trace";
    case Command::r_convexity: return "r-convexity";
  }
  return "?";
}

namespace {

Vec vec_from(const json& j, const std::string& field, int expect = -1) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array");
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number())
      throw ConfigError(field + ": expected numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  if (expect >= 0 && v.size() != expect)
    throw ConfigError(field + ": expected length " + std::to_string(expect));
  return v;
}

Mat mat_from(const json& j, const std::string& field, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ConfigError(field + ": expected an " + std::to_string(n) + "-row matrix");
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    Vec row = vec_from(j[static_cast<std::size_t>(i)], field, n);
    for (int k = 0; k < n; ++k) m(i, k) = row[k];
  }
  if (!m.is_symmetric(1e-12)) throw ConfigError(field + ": matrix must be symmetric");
  return m;
}

ReceiverSurface surface_from(const json& j, int n) {
  if (!j.contains("kind")) throw ConfigError("receiver.kind: missing");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "plane") return make_plane(n, j.at("height").get<double>());
  if (kind == "tilted_plane")
    return make_tilted_plane(vec_from(j.at("slope"), "receiver.slope", n), j.at("height").get<double>());
  if (kind == "quadratic")
    return make_quadratic_graph(j.at("height").get<double>(), mat_from(j.at("curvature"), "receiver.curvature", n));
  throw ConfigError("receiver.kind: unknown kind '" + kind + "'");
}

SourceDensity density_from(const json& j, const Vec& center) {
  SourceDensity d;
  d.center = center;
  if (j.is_null()) return d;
  std::string kind = j.value("kind", "constant");
  if (kind == "constant") {
    d.kind = SourceDensity::Kind::constant;
    d.value = j.value("value", 1.0);
    if (d.value <= 0.0) throw ConfigError("source.density.value: must be positive");
  } else if (kind == "radial_poly") {
    d.kind = SourceDensity::Kind::radial_poly;
    Vec c = vec_from(j.at("coeffs"), "source.density.coeffs");
    d.coeffs.assign(c.data().begin(), c.data().end());
    if (d.coeffs.empty()) throw ConfigError("source.density.coeffs: empty");
  } else {
    throw ConfigError("source.density.kind: unknown kind '" + kind + "'");
  }
  return d;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, Command command) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }

  RunConfig cfg;
  cfg.command = command;
  cfg.n = j.value("n", 2);
  if (cfg.n != 2) throw ConfigError("n: the exercised configuration is n = 2");
  cfg.seed = j.value("seed", 1ull);
  cfg.threads = j.value("threads", 1);
  if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");

  if (!j.contains("media")) throw ConfigError("media: missing");
  cfg.media = make_media(j.at("media").value("n1", 1.0), j.at("media").value("n2", 1.5));

  if (!j.contains("receiver")) throw ConfigError("receiver: missing");
  cfg.surface = surface_from(j.at("receiver"), cfg.n);

  if (j.contains("source")) {
    const json& src = j.at("source");
    cfg.domain.center = vec_from(src.at("center"), "source.center", cfg.n);
    cfg.domain.radius = src.at("radius").get<double>();
    if (cfg.domain.radius <= 0.0 || norm(cfg.domain.center) + cfg.domain.radius >= 1.0)
      throw ConfigError("source: disk must sit strictly inside the unit chart");
    cfg.density = density_from(src.value("density", json()), cfg.domain.center);
  } else {
    cfg.domain.center = Vec(cfg.n);
    cfg.domain.radius = 0.3;
    cfg.density.center = cfg.domain.center;
  }

  if (j.contains("targets")) {
    for (std::size_t i = 0; i < j.at("targets").size(); ++i) {
      const json& t = j.at("targets")[i];
      TargetPoint tp;
      tp.z = vec_from(t.at("z"), "targets[" + std::to_string(i) + "].z", cfg.n + 1);
      tp.g = t.value("g", 1.0);
      if (tp.g < 0.0) throw ConfigError("targets[" + std::to_string(i) + "].g: negative mass");
      cfg.targets.push_back(tp);
    }
  }

  cfg.tau = j.value("tau", 0.05);

  if (j.contains("solve")) {
    const json& s = j.at("solve");
    cfg.solve.tol = s.value("tol", 1e-3);
    cfg.solve.max_iters = s.value("max_iters", 2000);
    cfg.solve.step_rel = s.value("step_rel", 0.02);
    cfg.solve.grid = s.value("grid", 256);
    if (cfg.solve.tol <= 0.0) throw ConfigError("solve.tol: must be positive");
    if (cfg.solve.grid < 8) throw ConfigError("solve.grid: must be >= 8");
    if (s.contains("through_point"))
      cfg.solve.through_point = vec_from(s.at("through_point"), "solve.through_point", cfg.n + 1);
    if (s.contains("b_init")) {
      Vec b = vec_from(s.at("b_init"), "solve.b_init");
      cfg.solve.b_init.assign(b.data().begin(), b.data().end());
    }
  }

  if (j.contains("verify")) {
    const json& v = j.at("verify");
    cfg.verify.jets = v.value("jets", 1000);
    cfg.verify.x_max = v.value("x_max", 0.3);
    cfg.verify.origin_samples = v.value("origin_samples", 1000);
    cfg.verify.oval_samples = v.value("oval_samples", 1000);
    if (v.contains("kappas")) {
      Vec k = vec_from(v.at("kappas"), "verify.kappas");
      cfg.verify.kappas.assign(k.data().begin(), k.data().end());
    }
    if (cfg.verify.jets < 1) throw ConfigError("verify.jets: must be >= 1");
  }

  if (j.contains("mtw")) {
    const json& m = j.at("mtw");
    cfg.mtw.v_min = m.value("v_min", 0.5);
    cfg.mtw.v_max = m.value("v_max", 2.0);
    cfg.mtw.p_max = m.value("p_max", 0.5);
    cfg.mtw.n_v = m.value("n_v", 10);
    cfg.mtw.n_pmag = m.value("n_pmag", 10);
    cfg.mtw.n_pdir = m.value("n_pdir", 10);
    cfg.mtw.n_xi = m.value("n_xi", 10);
    cfg.mtw.dual_route_samples = m.value("dual_route_samples", 50);
    if (cfg.mtw.v_min <= 0.0 || cfg.mtw.v_max <= cfg.mtw.v_min)
      throw ConfigError("mtw: need 0 < v_min < v_max");
  }

  if (j.contains("trace")) {
    const json& t = j.at("trace");
    cfg.trace.grid = t.value("grid", 8);
    if (cfg.trace.grid < 1) throw ConfigError("trace.grid: must be >= 1");
    if (t.contains("rho")) {
      const json& r = t.at("rho");
      cfg.trace.rho.kind = r.value("kind", "radial_quadratic");
      cfg.trace.rho.c0 = r.value("c0", 1.0);
      cfg.trace.rho.c1 = r.value("c1", 0.1);
      if (r.contains("center")) cfg.trace.rho.center = vec_from(r.at("center"), "trace.rho.center", cfg.n);
      cfg.trace.rho.oval_target = r.value("oval_target", 0);
      cfg.trace.rho.oval_b_frac = r.value("oval_b_frac", 0.5);
      if (cfg.trace.rho.kind != "constant" && cfg.trace.rho.kind != "radial_quadratic" &&
          cfg.trace.rho.kind != "oval")
        throw ConfigError("trace.rho.kind: unknown kind '" + cfg.trace.rho.kind + "'");
    }
  }

  if (j.contains("r_convexity")) {
    const json& r = j.at("r_convexity");
    cfg.rconv.patch_center = vec_from(r.at("patch_center"), "r_convexity.patch_center", cfg.n + 1);
    cfg.rconv.patch_radius = r.value("patch_radius", 0.5);
    if (cfg.rconv.patch_radius <= 0.0) throw ConfigError("r_convexity.patch_radius: must be positive");
    if (r.contains("second_patch_center"))
      cfg.rconv.second_patch_center =
          vec_from(r.at("second_patch_center"), "r_convexity.second_patch_center", cfg.n + 1);
    cfg.rconv.vertices = r.value("vertices", 4);
    cfg.rconv.pairs = r.value("pairs", 8);
    cfg.rconv.sweep_steps = r.value("sweep_steps", 1024);
  }

  // command-specific completeness checks
  if (command == Command::solve && cfg.targets.empty())
    throw ConfigError("solve: targets required");
  if (command == Command::solve && !cfg.solve.through_point && cfg.solve.b_init.empty())
    throw ConfigError("solve: either through_point or b_init required");
  if (command == Command::r_convexity && cfg.rconv.patch_center.size() == 0)
    throw ConfigError("r-convexity: patch_center required");

  // up-front hypothesis validation for problem-style commands
  if (command == Command::solve || command == Command::trace) {
    if (!cfg.targets.empty()) {
      EnergyProblem problem{cfg.media, cfg.surface, cfg.domain, cfg.density, cfg.targets, cfg.tau};
      validate_problem(problem);
    }
  }

  cfg.echo = j.dump(2);
  return cfg;
}

RunConfig load_config(const std::string& path, Command command) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), command);
}

}  // namespace refract
