#include "tomomotion/run_config.hpp"

#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "tomomotion/stack_io.hpp"

namespace tomomotion {

using nlohmann::json;

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError(join_path(path, it.key()), "unknown field");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

double get_positive(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be positive");
  return v;
}

std::size_t get_count(const json& j, const std::string& path, std::size_t min = 1) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw ConfigError(path, "expected an integer");
  }
  const long long v = j.get<long long>();
  if (v < static_cast<long long>(min)) {
    throw ConfigError(path, "must be at least " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& path, std::size_t size = 0) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  if (size && j.size() != size) throw ConfigError(path, "expected " + std::to_string(size) + " entries");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Vec3 get_vec3(const json& j, const std::string& path) {
  const auto v = get_numbers(j, path, 3);
  return Vec3(v[0], v[1], v[2]);
}

Mat3 get_mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const Vec3 row = get_vec3(j[r], path + "[" + std::to_string(r) + "]");
    m.row(r) = row.transpose();
  }
  return m;
}

json mat_json(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return out;
}

json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

void parse_phantom(const json& j, const std::string& path, PhantomSpec& spec) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"preset", "type", "center", "precision", "widths", "amplitude", "points",
                  "diagonal", "reflected"});
  if (j.contains("preset")) {
    const std::string name = get_string(j["preset"], join_path(path, "preset"));
    if (name != "paper_sec4") throw ConfigError(join_path(path, "preset"), "unknown preset '" + name + "'");
    spec = PhantomSpec{};
  }
  if (j.contains("type")) {
    const std::string type = get_string(j["type"], join_path(path, "type"));
    if (type == "reference") {
      spec.kind = PhantomSpec::Kind::reference;
    } else if (type == "gaussian") {
      spec.kind = PhantomSpec::Kind::gaussian;
    } else if (type == "points") {
      spec.kind = PhantomSpec::Kind::points;
    } else {
      throw ConfigError(join_path(path, "type"), "expected reference, gaussian or points");
    }
  }
  if (j.contains("center")) spec.center = get_vec3(j["center"], join_path(path, "center"));
  if (j.contains("precision") && j.contains("widths")) {
    throw ConfigError(join_path(path, "widths"), "give either precision or widths");
  }
  if (j.contains("precision")) spec.precision = get_mat3(j["precision"], join_path(path, "precision"));
  if (j.contains("widths")) {
    const std::string p = join_path(path, "widths");
    const Vec3 w = get_vec3(j["widths"], p);
    if (!(w.minCoeff() > 0.0)) throw ConfigError(p, "widths must be positive");
    spec.precision = w.cwiseInverse().cwiseAbs2().asDiagonal();
  }
  if (j.contains("amplitude")) spec.amplitude = get_positive(j["amplitude"], join_path(path, "amplitude"));
  if (j.contains("points")) {
    const std::string p = join_path(path, "points");
    if (!j["points"].is_array() || j["points"].empty()) throw ConfigError(p, "expected a list of points");
    spec.points.clear();
    for (std::size_t i = 0; i < j["points"].size(); ++i) {
      spec.points.push_back(get_vec3(j["points"][i], p + "[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("diagonal")) {
    const std::string p = join_path(path, "diagonal");
    spec.diagonal = get_vec3(j["diagonal"], p);
    if (!(spec.diagonal.cwiseAbs().minCoeff() > 0.0)) throw ConfigError(p, "entries must be nonzero");
  }
  if (j.contains("reflected")) spec.reflected = get_bool(j["reflected"], join_path(path, "reflected"));
  if (spec.kind == PhantomSpec::Kind::points && spec.points.empty()) {
    throw ConfigError(join_path(path, "points"), "required for a points phantom");
  }
  if (spec.kind == PhantomSpec::Kind::gaussian) {
    const Mat3 sym = 0.5 * (spec.precision + spec.precision.transpose());
    if ((sym - spec.precision).cwiseAbs().maxCoeff() > 1e-12) {
      throw ConfigError(join_path(path, "precision"), "must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(sym);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
      throw ConfigError(join_path(path, "precision"), "must be positive definite");
    }
  }
}

void parse_motion(const json& j, const std::string& path, MotionSpec& spec) {
  require_object(j, path);
  reject_unknown(j, path, {"preset", "alpha", "phi", "omega3", "translation", "r0"});
  if (j.contains("preset")) {
    const std::string p = join_path(path, "preset");
    try {
      spec = motion_preset(get_string(j["preset"], p));
    } catch (const InvalidArgument& e) {
      throw ConfigError(p, e.what());
    }
  }
  if (j.contains("alpha")) spec.angular.alpha = parse_time_function(j["alpha"], join_path(path, "alpha"));
  if (j.contains("phi")) spec.angular.phi = parse_time_function(j["phi"], join_path(path, "phi"));
  if (j.contains("omega3")) {
    spec.angular.omega3 = parse_time_function(j["omega3"], join_path(path, "omega3"));
  }
  if (j.contains("translation")) {
    const std::string p = join_path(path, "translation");
    if (!j["translation"].is_array() || j["translation"].size() != 3) {
      throw ConfigError(p, "expected three closures");
    }
    for (int i = 0; i < 3; ++i) {
      spec.translation[i] = parse_time_function(j["translation"][i], p + "[" + std::to_string(i) + "]");
    }
  }
  if (j.contains("r0")) {
    const std::string p = join_path(path, "r0");
    spec.r0 = get_mat3(j["r0"], p);
    if (orthogonality_error(spec.r0) > 1e-10 || determinant_error(spec.r0) > 1e-10) {
      throw ConfigError(p, "must be a rotation matrix");
    }
  }
}

void parse_geometry(const json& j, const std::string& path, GeometrySpec& g) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"n1", "n2", "spacing", "n_frames", "dt", "t0", "ray_step", "ray_half_extent",
                  "substeps"});
  if (j.contains("n1")) g.n1 = get_count(j["n1"], join_path(path, "n1"));
  if (j.contains("n2")) g.n2 = get_count(j["n2"], join_path(path, "n2"));
  if (j.contains("spacing")) g.spacing = get_positive(j["spacing"], join_path(path, "spacing"));
  if (j.contains("n_frames")) g.n_frames = get_count(j["n_frames"], join_path(path, "n_frames"), 2);
  if (j.contains("dt")) g.dt = get_positive(j["dt"], join_path(path, "dt"));
  if (j.contains("t0")) g.t0 = get_number(j["t0"], join_path(path, "t0"));
  if (j.contains("ray_step")) {
    // 0 selects the pixel spacing.
    const std::string p = join_path(path, "ray_step");
    g.ray_step = get_number(j["ray_step"], p);
    if (!(g.ray_step >= 0.0)) throw ConfigError(p, "must be nonnegative");
  }
  if (j.contains("ray_half_extent")) {
    g.ray_half_extent = get_positive(j["ray_half_extent"], join_path(path, "ray_half_extent"));
  }
  if (j.contains("substeps")) {
    g.substeps = static_cast<int>(get_count(j["substeps"], join_path(path, "substeps")));
  }
}

void parse_spectral(const json& j, const std::string& path, SpectralOptions& s) {
  require_object(j, path);
  reject_unknown(j, path, {"mode", "padding", "taps", "window_beta", "cache_frames"});
  if (j.contains("mode")) {
    const std::string p = join_path(path, "mode");
    const std::string mode = get_string(j["mode"], p);
    if (mode == "grid") {
      s.mode = SpectralMode::grid;
    } else if (mode == "direct") {
      s.mode = SpectralMode::direct;
    } else {
      throw ConfigError(p, "expected grid or direct");
    }
  }
  if (j.contains("padding")) s.padding = static_cast<int>(get_count(j["padding"], join_path(path, "padding")));
  if (j.contains("taps")) {
    const std::string p = join_path(path, "taps");
    s.taps = static_cast<int>(get_count(j["taps"], p, 2));
    if (s.taps % 2 != 0 || s.taps > 32) throw ConfigError(p, "must be even and at most 32");
  }
  if (j.contains("window_beta")) s.window_beta = get_positive(j["window_beta"], join_path(path, "window_beta"));
  if (j.contains("cache_frames")) s.cache_frames = get_count(j["cache_frames"], join_path(path, "cache_frames"));
}

void parse_estimator_into(const json& j, const std::string& path, EstimatorConfig& e) {
  require_object(j, path);
  reject_unknown(j, path,
                 {"mu_count", "mu_spacing", "phi_grid", "epsilon", "degenerate_condition_threshold",
                  "alpha_floor", "sigma_degeneracy_tolerance", "phi_flat_floor",
                  "multimodal_ratio", "spectral"});
  if (j.contains("mu_count")) e.mu_count = get_count(j["mu_count"], join_path(path, "mu_count"));
  if (j.contains("mu_spacing")) e.mu_spacing = get_positive(j["mu_spacing"], join_path(path, "mu_spacing"));
  if (j.contains("phi_grid")) e.phi_grid = get_count(j["phi_grid"], join_path(path, "phi_grid"), 3);
  if (j.contains("epsilon")) e.epsilon = get_positive(j["epsilon"], join_path(path, "epsilon"));
  if (j.contains("degenerate_condition_threshold")) {
    e.degenerate_condition_threshold = get_positive(j["degenerate_condition_threshold"],
                                                    join_path(path, "degenerate_condition_threshold"));
  }
  if (j.contains("alpha_floor")) e.alpha_floor = get_positive(j["alpha_floor"], join_path(path, "alpha_floor"));
  if (j.contains("sigma_degeneracy_tolerance")) {
    e.sigma_degeneracy_tolerance =
        get_positive(j["sigma_degeneracy_tolerance"], join_path(path, "sigma_degeneracy_tolerance"));
  }
  if (j.contains("phi_flat_floor")) {
    e.phi_flat_floor = get_positive(j["phi_flat_floor"], join_path(path, "phi_flat_floor"));
  }
  if (j.contains("multimodal_ratio")) {
    const std::string p = join_path(path, "multimodal_ratio");
    e.multimodal_ratio = get_positive(j["multimodal_ratio"], p);
    if (e.multimodal_ratio < 1.0) throw ConfigError(p, "must be at least 1");
  }
  if (j.contains("spectral")) parse_spectral(j["spectral"], join_path(path, "spectral"), e.spectral);
}

std::vector<double> triple(const json& j, const std::string& path) {
  return get_numbers(j, path, 3);
}

}  // namespace

std::shared_ptr<const Phantom> PhantomSpec::build() const {
  std::shared_ptr<const Phantom> base;
  switch (kind) {
    case Kind::reference:
      base = std::make_shared<PointProductPhantom>(reference_phantom());
      break;
    case Kind::gaussian:
      base = std::make_shared<GaussianPhantom>(center, precision, amplitude);
      break;
    case Kind::points:
      base = std::make_shared<PointProductPhantom>(points, diagonal);
      break;
  }
  if (reflected) return std::make_shared<ReflectedPhantom>(base);
  return base;
}

std::vector<double> GeometrySpec::times() const {
  std::vector<double> t(n_frames);
  for (std::size_t l = 0; l < n_frames; ++l) t[l] = t0 + static_cast<double>(l) * dt;
  return t;
}

MotionSpec motion_preset(const std::string& name) {
  MotionSpec m;
  if (name == "paper_sec4") {
    m.angular.alpha = TimeFunction::polynomial({1.0, 0.0, 10.0});
    m.angular.phi = TimeFunction::polynomial({kPi / 3.0, kPi});
    m.angular.omega3 = TimeFunction::constant(0.5);
    m.angular.omega3.add_sqrt(1.0, 0.5, 5.0);
    // cos 6t cos 12t, cos 6t sin 12t and sin t, expanded into sums.
    m.translation[0] = TimeFunction{};
    m.translation[0].add_cos(0.5, 6.0).add_cos(0.5, 18.0);
    m.translation[1] = TimeFunction{};
    m.translation[1].add_sin(0.5, 18.0).add_sin(0.5, 6.0);
    m.translation[2] = TimeFunction{};
    m.translation[2].add_sin(1.0, 1.0);
  } else if (name == "static") {
    // all zero
  } else if (name == "z_spin") {
    m.angular.omega3 = TimeFunction::constant(1.0);
  } else if (name == "sigma_minus_omega3") {
    m.angular.alpha = TimeFunction::constant(1.0);
    m.angular.phi = TimeFunction::polynomial({kPi / 3.0, -2.0});
    m.angular.omega3 = TimeFunction::constant(2.0);
  } else {
    throw InvalidArgument("unknown motion preset '" + name + "'");
  }
  return m;
}

RunConfig reference_config() {
  RunConfig cfg;
  cfg.motion = motion_preset("paper_sec4");
  return cfg;
}

TimeFunction parse_time_function(const json& j, const std::string& path) {
  if (j.is_number()) return TimeFunction::constant(get_number(j, path));
  require_object(j, path);
  reject_unknown(j, path, {"polynomial", "sin", "cos", "sqrt"});
  TimeFunction f;
  if (j.contains("polynomial")) f.add_polynomial(get_numbers(j["polynomial"], join_path(path, "polynomial")));
  for (const char* key : {"sin", "cos", "sqrt"}) {
    if (!j.contains(key)) continue;
    const std::string p = join_path(path, key);
    if (!j[key].is_array()) throw ConfigError(p, "expected a list of [a, b, c] terms");
    for (std::size_t i = 0; i < j[key].size(); ++i) {
      const auto t = triple(j[key][i], p + "[" + std::to_string(i) + "]");
      if (key == std::string("sin")) {
        f.add_sin(t[0], t[1], t[2]);
      } else if (key == std::string("cos")) {
        f.add_cos(t[0], t[1], t[2]);
      } else {
        f.add_sqrt(t[0], t[1], t[2]);
      }
    }
  }
  return f;
}

json to_json(const TimeFunction& f) {
  json out = json::object();
  out["polynomial"] = f.polynomial_coefficients();
  json sins = json::array();
  for (const auto& s : f.sinusoids()) sins.push_back({s.amplitude, s.frequency, s.phase});
  out["sin"] = sins;
  json sqrts = json::array();
  for (const auto& s : f.sqrt_terms()) sqrts.push_back({s.scale, s.offset, s.slope});
  out["sqrt"] = sqrts;
  return out;
}

EstimatorConfig parse_estimator_config(const json& doc, const std::string& path) {
  EstimatorConfig e;
  parse_estimator_into(doc, path, e);
  return e;
}

RunConfig parse_run_config(const json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"preset", "phantom", "motion", "geometry", "estimator", "seed"});
  RunConfig cfg;
  if (doc.contains("preset")) {
    const std::string name = get_string(doc["preset"], "preset");
    if (name != "paper_sec4") throw ConfigError("preset", "unknown preset '" + name + "'");
    cfg = reference_config();
  }
  if (doc.contains("phantom")) parse_phantom(doc["phantom"], "phantom", cfg.phantom);
  if (doc.contains("motion")) parse_motion(doc["motion"], "motion", cfg.motion);
  if (doc.contains("geometry")) parse_geometry(doc["geometry"], "geometry", cfg.geometry);
  if (doc.contains("estimator")) parse_estimator_into(doc["estimator"], "estimator", cfg.estimator);
  if (doc.contains("seed")) cfg.seed = get_count(doc["seed"], "seed", 0);

  // Closures must be evaluable on the whole time grid.
  const auto times = cfg.geometry.times();
  const std::pair<const TimeFunction*, const char*> closures[] = {
      {&cfg.motion.angular.alpha, "motion.alpha"},    {&cfg.motion.angular.phi, "motion.phi"},
      {&cfg.motion.angular.omega3, "motion.omega3"},  {&cfg.motion.translation[0], "motion.translation[0]"},
      {&cfg.motion.translation[1], "motion.translation[1]"},
      {&cfg.motion.translation[2], "motion.translation[2]"}};
  for (const auto& [f, name] : closures) {
    for (double t : {times.front(), times.back()}) {
      try {
        if (!std::isfinite(f->derivative(t, 3))) throw ConfigError(name, "not finite on the time grid");
      } catch (const InvalidArgument& e) {
        throw ConfigError(name, e.what());
      }
    }
  }
  for (double t : times) {
    if (cfg.motion.angular.alpha(t) < 0.0) throw ConfigError("motion.alpha", "must be nonnegative");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& cfg) {
  json out;
  json ph;
  switch (cfg.phantom.kind) {
    case PhantomSpec::Kind::reference: ph["type"] = "reference"; break;
    case PhantomSpec::Kind::gaussian:
      ph["type"] = "gaussian";
      ph["center"] = vec_json(cfg.phantom.center);
      ph["precision"] = mat_json(cfg.phantom.precision);
      ph["amplitude"] = cfg.phantom.amplitude;
      break;
    case PhantomSpec::Kind::points: {
      ph["type"] = "points";
      json pts = json::array();
      for (const auto& p : cfg.phantom.points) pts.push_back(vec_json(p));
      ph["points"] = pts;
      ph["diagonal"] = vec_json(cfg.phantom.diagonal);
      break;
    }
  }
  ph["reflected"] = cfg.phantom.reflected;
  out["phantom"] = ph;

  json mo;
  mo["alpha"] = to_json(cfg.motion.angular.alpha);
  mo["phi"] = to_json(cfg.motion.angular.phi);
  mo["omega3"] = to_json(cfg.motion.angular.omega3);
  mo["translation"] = {to_json(cfg.motion.translation[0]), to_json(cfg.motion.translation[1]),
                       to_json(cfg.motion.translation[2])};
  mo["r0"] = mat_json(cfg.motion.r0);
  out["motion"] = mo;

  const GeometrySpec& g = cfg.geometry;
  json geo = {{"n1", g.n1},           {"n2", g.n2}, {"spacing", g.spacing},
              {"n_frames", g.n_frames}, {"dt", g.dt}, {"t0", g.t0},
              {"ray_step", g.ray_step}, {"substeps", g.substeps}};
  if (g.ray_half_extent) geo["ray_half_extent"] = *g.ray_half_extent;
  out["geometry"] = geo;

  const EstimatorConfig& e = cfg.estimator;
  json est = {{"phi_grid", e.phi_grid},
              {"epsilon", e.epsilon},
              {"degenerate_condition_threshold", e.degenerate_condition_threshold},
              {"alpha_floor", e.alpha_floor},
              {"sigma_degeneracy_tolerance", e.sigma_degeneracy_tolerance},
              {"phi_flat_floor", e.phi_flat_floor},
              {"multimodal_ratio", e.multimodal_ratio}};
  if (e.mu_count) est["mu_count"] = e.mu_count;
  if (e.mu_spacing > 0.0) est["mu_spacing"] = e.mu_spacing;
  est["spectral"] = {{"mode", e.spectral.mode == SpectralMode::grid ? "grid" : "direct"},
                     {"padding", e.spectral.padding},
                     {"taps", e.spectral.taps},
                     {"window_beta", e.spectral.window_beta},
                     {"cache_frames", e.spectral.cache_frames}};
  out["estimator"] = est;
  out["seed"] = cfg.seed;
  return out;
}

MotionGroundTruth build_motion(const RunConfig& cfg) {
  AngularParams angular = AngularParams::from_functions(cfg.motion.angular, cfg.geometry.times());
  const auto& tr = cfg.motion.translation;
  return MotionGroundTruth::from_angular(
      std::move(angular), [&](double t) { return Vec3(tr[0](t), tr[1](t), tr[2](t)); },
      cfg.motion.r0, cfg.geometry.substeps);
}

}  // namespace tomomotion
