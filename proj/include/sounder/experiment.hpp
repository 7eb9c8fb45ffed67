// experiment.hpp
// Configuration-driven pipelines behind the command-line tool. Each command
// validates a JSON experiment config, runs the library, and writes plain
// CSV/JSON outputs plus a run manifest into an output directory.

#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ambiguity.hpp"
#include "analysis.hpp"
#include "anneal.hpp"
#include "arrays.hpp"
#include "core.hpp"
#include "crlb.hpp"
#include "io.hpp"
#include "rng.hpp"
#include "signal.hpp"
#include "switching.hpp"

namespace sounder {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr double kSpeedOfLight = 299792458.0;

struct ArraySpec {
  std::string kind = "octagonal";  // octagonal | ula | square
  double carrier_hz = 28e9;
  double spacing_wavelengths = 0.5;
  std::size_t elements = 16;  // ula: count; square: elements per side
  std::size_t panels = 8;
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::optional<double> radius_m;
  std::optional<double> patch_exponent;  // octagonal default 2, square default 0 (sector)
  std::optional<std::string> pattern_file;
};

struct SwitchingSpec {
  double delta_t_s = 12.5e-6;
  std::size_t snapshots = 1;
  std::optional<Partition> partition;  // explicit; otherwise the array's natural groups
};

struct OptimizationSpec {
  std::string scheme = "random";  // random | hybrid
  std::size_t k_max = 200;
  std::optional<double> t0;
  std::optional<double> alpha;
};

struct ObjectiveSpec {
  int power = 6;
  std::size_t samples = 4096;
  std::uint64_t scramble = 0;
  std::optional<double> nu_up_hz;
  double nu_up_fraction = 0.25;
  bool sine_weighted_elevation = false;
};

struct ReferenceSpec {
  double azimuth_deg = 180.0;
  double elevation_deg = 90.0;
  double doppler_hz = 0.0;
};

struct SweepSpec {
  std::string axis = "eoa";
  double doppler_min_hz = -3000.0;
  double doppler_max_hz = 3000.0;
  double doppler_step_hz = 5.0;
  double angle_min_deg = 45.0;
  double angle_max_deg = 135.0;
  double angle_step_deg = 0.5;
};

struct CrlbSpec {
  double azimuth_deg = 90.0;
  double doppler_hz = 0.0;
  double amplitude = 1.0;
  double phase_rad = 0.0;
  double sigma = 0.1;
  std::string sequence = "random";  // sequential | random | hybrid
};

struct ExperimentConfig {
  int version = 1;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  ArraySpec array;
  SwitchingSpec switching;
  OptimizationSpec optimization;
  ObjectiveSpec objective;
  ReferenceSpec reference;
  SweepSpec sweep;
  CrlbSpec crlb;
  double threshold_db = -10.0;
  std::filesystem::path base_dir;  // pattern_file is resolved relative to this

  std::uint64_t run_seed() const {
    if (!seed) throw ConfigError("config.seed: a seed is required (set it in the config or pass --seed)");
    return *seed;
  }
};

namespace detail {

inline void one_of(const std::string& value, std::initializer_list<const char*> options, const std::string& where) {
  for (const char* o : options)
    if (value == o) return;
  std::string list;
  for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
  throw ConfigError(where + ": expected one of {" + list + "}, got '" + value + "'");
}

template <typename Fn>
void section(FieldReader& parent, const std::string& key, Fn&& fn) {
  parent.mark(key);
  if (!parent.has(key)) return;
  FieldReader child(parent.raw(key), parent.field_path(key));
  fn(child);
  child.finish();
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j, std::filesystem::path base_dir = {}) {
  ExperimentConfig c;
  c.base_dir = std::move(base_dir);
  FieldReader root(j, "config");
  c.version = root.get<int>("version");
  if (c.version != 1) throw ConfigError("config.version: unsupported version " + std::to_string(c.version));
  c.seed = root.get_optional<std::uint64_t>("seed");
  c.threads = root.get_or<unsigned>("threads", 1);
  require(c.threads >= 1, "config.threads: must be >= 1");

  detail::section(root, "array", [&](FieldReader& f) {
    auto& a = c.array;
    a.kind = f.get_or<std::string>("kind", a.kind);
    detail::one_of(a.kind, {"octagonal", "ula", "square"}, f.field_path("kind"));
    a.carrier_hz = f.get_or("carrier_hz", a.carrier_hz);
    a.spacing_wavelengths = f.get_or("spacing_wavelengths", a.spacing_wavelengths);
    a.elements = f.get_or("elements", a.elements);
    a.panels = f.get_or("panels", a.panels);
    a.rows = f.get_or("rows", a.rows);
    a.cols = f.get_or("cols", a.cols);
    a.radius_m = f.get_optional<double>("radius_m");
    a.patch_exponent = f.get_optional<double>("patch_exponent");
    a.pattern_file = f.get_optional<std::string>("pattern_file");
    require(a.carrier_hz > 0.0, f.field_path("carrier_hz") + ": must be positive");
    require(a.spacing_wavelengths > 0.0, f.field_path("spacing_wavelengths") + ": must be positive");
    if (a.radius_m) require(*a.radius_m > 0.0, f.field_path("radius_m") + ": must be positive");
    if (a.patch_exponent) require(*a.patch_exponent >= 0.0, f.field_path("patch_exponent") + ": must be >= 0");
  });

  detail::section(root, "switching", [&](FieldReader& f) {
    auto& s = c.switching;
    s.delta_t_s = f.get_or("delta_t_s", s.delta_t_s);
    s.snapshots = f.get_or("snapshots", s.snapshots);
    f.mark("partition");
    if (f.has("partition")) {
      try {
        s.partition = f.raw("partition").get<Partition>();
      } catch (const Json::exception&) {
        throw ConfigError(f.field_path("partition") + ": expected a list of index lists");
      }
    }
    require(s.delta_t_s > 0.0, f.field_path("delta_t_s") + ": must be positive");
    require(s.snapshots >= 1, f.field_path("snapshots") + ": must be >= 1");
  });

  detail::section(root, "optimization", [&](FieldReader& f) {
    auto& o = c.optimization;
    o.scheme = f.get_or<std::string>("scheme", o.scheme);
    detail::one_of(o.scheme, {"random", "hybrid"}, f.field_path("scheme"));
    o.k_max = f.get_or("k_max", o.k_max);
    o.t0 = f.get_optional<double>("t0");
    o.alpha = f.get_optional<double>("alpha");
    require(o.k_max >= 1, f.field_path("k_max") + ": must be >= 1");
    if (o.t0) require(*o.t0 > 0.0, f.field_path("t0") + ": must be positive");
    if (o.alpha) require(*o.alpha > 0.0 && *o.alpha < 1.0, f.field_path("alpha") + ": must lie in (0, 1)");
  });

  detail::section(root, "objective", [&](FieldReader& f) {
    auto& o = c.objective;
    o.power = f.get_or("power", o.power);
    o.samples = f.get_or("samples", o.samples);
    o.scramble = f.get_or("scramble", o.scramble);
    o.nu_up_hz = f.get_optional<double>("nu_up_hz");
    o.nu_up_fraction = f.get_or("nu_up_fraction", o.nu_up_fraction);
    o.sine_weighted_elevation = f.get_or("sine_weighted_elevation", o.sine_weighted_elevation);
    require(o.power >= 2 && o.power % 2 == 0, f.field_path("power") + ": must be an even integer >= 2");
    require(o.samples >= 1, f.field_path("samples") + ": must be >= 1");
    if (o.nu_up_hz) require(*o.nu_up_hz > 0.0, f.field_path("nu_up_hz") + ": must be positive");
    require(o.nu_up_fraction > 0.0, f.field_path("nu_up_fraction") + ": must be positive");
  });

  detail::section(root, "reference", [&](FieldReader& f) {
    auto& r = c.reference;
    r.azimuth_deg = f.get_or("azimuth_deg", r.azimuth_deg);
    r.elevation_deg = f.get_or("elevation_deg", r.elevation_deg);
    r.doppler_hz = f.get_or("doppler_hz", r.doppler_hz);
    require(r.elevation_deg >= 0.0 && r.elevation_deg <= 180.0, f.field_path("elevation_deg") + ": must be in [0, 180]");
  });

  detail::section(root, "sweep", [&](FieldReader& f) {
    auto& s = c.sweep;
    s.axis = f.get_or<std::string>("axis", s.axis);
    detail::one_of(s.axis, {"eoa", "aoa"}, f.field_path("axis"));
    s.doppler_min_hz = f.get_or("doppler_min_hz", s.doppler_min_hz);
    s.doppler_max_hz = f.get_or("doppler_max_hz", s.doppler_max_hz);
    s.doppler_step_hz = f.get_or("doppler_step_hz", s.doppler_step_hz);
    s.angle_min_deg = f.get_or("angle_min_deg", s.angle_min_deg);
    s.angle_max_deg = f.get_or("angle_max_deg", s.angle_max_deg);
    s.angle_step_deg = f.get_or("angle_step_deg", s.angle_step_deg);
    require(s.doppler_step_hz > 0.0 && s.doppler_max_hz >= s.doppler_min_hz,
            f.path() + ": Doppler grid needs step > 0 and max >= min");
    require(s.angle_step_deg > 0.0 && s.angle_max_deg >= s.angle_min_deg,
            f.path() + ": angle grid needs step > 0 and max >= min");
  });

  detail::section(root, "crlb", [&](FieldReader& f) {
    auto& k = c.crlb;
    k.azimuth_deg = f.get_or("azimuth_deg", k.azimuth_deg);
    k.doppler_hz = f.get_or("doppler_hz", k.doppler_hz);
    k.amplitude = f.get_or("amplitude", k.amplitude);
    k.phase_rad = f.get_or("phase_rad", k.phase_rad);
    k.sigma = f.get_or("sigma", k.sigma);
    k.sequence = f.get_or<std::string>("sequence", k.sequence);
    detail::one_of(k.sequence, {"sequential", "random", "hybrid"}, f.field_path("sequence"));
    require(k.amplitude > 0.0, f.field_path("amplitude") + ": must be positive");
    require(k.sigma > 0.0, f.field_path("sigma") + ": must be positive");
  });

  detail::section(root, "effective", [&](FieldReader& f) {
    c.threshold_db = f.get_or("threshold_db", c.threshold_db);
    require(c.threshold_db <= 0.0, f.field_path("threshold_db") + ": must be <= 0");
  });

  root.finish();
  if (c.array.pattern_file) {
    std::filesystem::path p = *c.array.pattern_file;
    if (p.is_relative() && !c.base_dir.empty()) p = c.base_dir / p;
    if (!std::filesystem::exists(p)) throw FileError("config.array.pattern_file: file not found: " + p.string());
    c.array.pattern_file = p.string();
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  return parse_config(parse_json(read_text_file(path), path), std::filesystem::path(path).parent_path());
}

/// Canonical JSON of the effective configuration (defaults filled in).
inline Json config_to_json(const ExperimentConfig& c) {
  auto opt = [](const auto& o) -> Json { return o ? Json(*o) : Json(nullptr); };
  return Json{
      {"version", c.version},
      {"seed", opt(c.seed)},
      {"threads", c.threads},
      {"array",
       {{"kind", c.array.kind},
        {"carrier_hz", c.array.carrier_hz},
        {"spacing_wavelengths", c.array.spacing_wavelengths},
        {"elements", c.array.elements},
        {"panels", c.array.panels},
        {"rows", c.array.rows},
        {"cols", c.array.cols},
        {"radius_m", opt(c.array.radius_m)},
        {"patch_exponent", opt(c.array.patch_exponent)},
        {"pattern_file", opt(c.array.pattern_file)}}},
      {"switching",
       {{"delta_t_s", c.switching.delta_t_s},
        {"snapshots", c.switching.snapshots},
        {"partition", opt(c.switching.partition)}}},
      {"optimization",
       {{"scheme", c.optimization.scheme},
        {"k_max", c.optimization.k_max},
        {"t0", opt(c.optimization.t0)},
        {"alpha", opt(c.optimization.alpha)}}},
      {"objective",
       {{"power", c.objective.power},
        {"samples", c.objective.samples},
        {"scramble", c.objective.scramble},
        {"nu_up_hz", opt(c.objective.nu_up_hz)},
        {"nu_up_fraction", c.objective.nu_up_fraction},
        {"sine_weighted_elevation", c.objective.sine_weighted_elevation}}},
      {"reference",
       {{"azimuth_deg", c.reference.azimuth_deg},
        {"elevation_deg", c.reference.elevation_deg},
        {"doppler_hz", c.reference.doppler_hz}}},
      {"sweep",
       {{"axis", c.sweep.axis},
        {"doppler_min_hz", c.sweep.doppler_min_hz},
        {"doppler_max_hz", c.sweep.doppler_max_hz},
        {"doppler_step_hz", c.sweep.doppler_step_hz},
        {"angle_min_deg", c.sweep.angle_min_deg},
        {"angle_max_deg", c.sweep.angle_max_deg},
        {"angle_step_deg", c.sweep.angle_step_deg}}},
      {"crlb",
       {{"azimuth_deg", c.crlb.azimuth_deg},
        {"doppler_hz", c.crlb.doppler_hz},
        {"amplitude", c.crlb.amplitude},
        {"phase_rad", c.crlb.phase_rad},
        {"sigma", c.crlb.sigma},
        {"sequence", c.crlb.sequence}}},
      {"effective", {{"threshold_db", c.threshold_db}}},
  };
}

// ---------------------------------------------------------------------------
// Building blocks shared by the commands.

inline double wavelength(const ExperimentConfig& c) { return kSpeedOfLight / c.array.carrier_hz; }

inline ArrayModel build_array(const ExperimentConfig& c) {
  const double lambda = wavelength(c);
  const double spacing = c.array.spacing_wavelengths * lambda;
  std::optional<ArrayModel> array;
  if (c.array.kind == "ula") {
    array = make_ula(c.array.elements, spacing, lambda);
  } else if (c.array.kind == "square") {
    const double radius = c.array.radius_m.value_or(touching_panel_radius(4, c.array.elements, spacing));
    array = make_octagonal(4, 1, c.array.elements, spacing, radius, lambda, c.array.patch_exponent.value_or(0.0));
  } else {
    const double radius = c.array.radius_m.value_or(touching_panel_radius(c.array.panels, c.array.cols, spacing));
    array = make_octagonal(c.array.panels, c.array.rows, c.array.cols, spacing, radius, lambda,
                           c.array.patch_exponent.value_or(2.0));
  }
  if (c.array.pattern_file) array = apply_pattern_tables(*array, load_pattern_csv(*c.array.pattern_file));
  return *array;
}

inline Partition hybrid_partition(const ExperimentConfig& c, const ArrayModel& array) {
  if (c.switching.partition) {
    validate_partition(*c.switching.partition, array.size());
    return *c.switching.partition;
  }
  if (array.groups().empty())
    throw ConfigError(
        "config.optimization.scheme: hybrid switching needs a partition; use an octagonal/square array or set "
        "switching.partition");
  return array.groups();
}

inline Region build_region(const ExperimentConfig& c) {
  Region r;
  r.nu_up = c.objective.nu_up_hz.value_or(default_nu_up(c.switching.delta_t_s, c.objective.nu_up_fraction));
  r.sine_weighted_elevation = c.objective.sine_weighted_elevation;
  return r;
}

inline ObjectiveConfig build_objective(const ExperimentConfig& c) {
  return {c.objective.power, c.objective.samples, c.objective.scramble, c.threads};
}

inline ReceiveParams build_reference(const ExperimentConfig& c) {
  return {Direction::from_degrees(c.reference.azimuth_deg, c.reference.elevation_deg), c.reference.doppler_hz};
}

inline AngleAxis build_axis(const ExperimentConfig& c) { return c.sweep.axis == "eoa" ? AngleAxis::Eoa : AngleAxis::Aoa; }

inline RVector doppler_grid(const ExperimentConfig& c) {
  return linear_grid(c.sweep.doppler_min_hz, c.sweep.doppler_max_hz, c.sweep.doppler_step_hz);
}

inline RVector angle_grid(const ExperimentConfig& c) {
  return linear_grid(c.sweep.angle_min_deg, c.sweep.angle_max_deg, c.sweep.angle_step_deg);
}

enum SeedStream : std::uint64_t { kRandomInit = 1, kHybridInit = 2, kAnnealRandom = 3, kAnnealHybrid = 4, kCrlbSeq = 5 };

struct OptimizedSequence {
  SwitchingSequence initial;
  AnnealResult result;
};

inline OptimizedSequence run_optimization(const ExperimentConfig& c, const ArrayModel& array, UpdateKind kind,
                                          const ObjectiveEvaluator& f) {
  const std::uint64_t seed = c.run_seed();
  std::optional<SwitchingSequence> init;
  if (kind == UpdateKind::Hybrid) {
    Rng rng(mix_seed(seed, kHybridInit));
    init = hybrid_init(array.size(), c.switching.delta_t_s, c.switching.snapshots, hybrid_partition(c, array), rng);
  } else {
    Rng rng(mix_seed(seed, kRandomInit));
    init = random_init(array.size(), c.switching.delta_t_s, c.switching.snapshots, rng);
  }
  AnnealConfig ac;
  ac.k_max = c.optimization.k_max;
  ac.t0 = c.optimization.t0;
  ac.alpha = c.optimization.alpha;
  ac.update = kind;
  ac.seed = mix_seed(seed, kind == UpdateKind::Hybrid ? kAnnealHybrid : kAnnealRandom);
  return {*init, anneal(*init, ac, f)};
}

struct CommandResult {
  int exit_code = 0;
  Json summary;
  std::vector<std::string> outputs;
};

inline Json opt_seed_json(const ExperimentConfig& c) { return c.seed ? Json(*c.seed) : Json(nullptr); }

// Writes the manifest last so it can hash every other output of the run.
inline void write_manifest(const std::filesystem::path& out, const std::string& command, const ExperimentConfig& c,
                           double wall_seconds, CommandResult& result, const Json& extra = Json::object()) {
  Json files = Json::object();
  for (const auto& name : result.outputs) files[name] = hex64(fnv1a(read_text_file((out / name).string())));
  const Json cfg = config_to_json(c);
  Json m{{"tool", "sounder"},
         {"version", kToolVersion},
         {"command", command},
         {"config", cfg},
         {"config_hash", hex64(fnv1a(cfg.dump()))},
         {"seed", opt_seed_json(c)},
         {"threads", c.threads},
         {"wall_seconds", wall_seconds},
         {"outputs", files}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_text_file(out / "manifest.json", m.dump(2) + "\n");
  result.outputs.push_back("manifest.json");
}

inline double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

inline std::string trace_to_string(const AnnealTrace& trace) {
  std::ostringstream ss;
  write_trace_csv(trace, ss);
  return ss.str();
}

inline std::string surface_to_string(const AmbiguitySurface& s) {
  std::ostringstream ss;
  write_surface_csv(s, ss);
  return ss.str();
}

inline Json width_json(const WidthReport& w) {
  return Json{{"axis", to_string(w.axis)}, {"lower", w.lower}, {"upper", w.upper}, {"width", w.width()},
              {"method", w.method}};
}

// ---------------------------------------------------------------------------
// Commands

inline CommandResult cmd_optimize(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto started = std::chrono::steady_clock::now();
  c.run_seed();
  const ArrayModel array = build_array(c);
  const UpdateKind kind = c.optimization.scheme == "hybrid" ? UpdateKind::Hybrid : UpdateKind::Random;
  if (kind == UpdateKind::Hybrid) hybrid_partition(c, array);
  const SwitchingSequence shape = sequential(array.size(), c.switching.delta_t_s, c.switching.snapshots);
  const ObjectiveEvaluator f = make_objective(array, shape, build_region(c), build_objective(c));
  const OptimizedSequence run = run_optimization(c, array, kind, f);

  CommandResult r;
  write_text_file(out / "sequence.json", sequence_to_string(run.result.sequence));
  write_text_file(out / "best_sequence.json", sequence_to_string(*run.result.trace.best));
  write_text_file(out / "trace.csv", trace_to_string(run.result.trace));
  r.outputs = {"sequence.json", "best_sequence.json", "trace.csv"};
  const auto& t = run.result.trace;
  r.summary = Json{{"scheme", c.optimization.scheme},
                   {"iterations", t.records.size()},
                   {"t0", t.t0},
                   {"alpha", t.alpha},
                   {"initial_objective", t.initial_objective},
                   {"final_objective", t.records.back().objective},
                   {"best_objective", t.best_objective},
                   {"best_iteration", t.best_iteration},
                   {"degenerate_samples", f.evaluate(run.result.sequence).degenerate_samples}};
  write_manifest(out, "optimize", c, seconds_since(started), r, Json{{"result", r.summary}});
  return r;
}

inline CommandResult cmd_ambiguity(const ExperimentConfig& c, const std::string& sequence_path,
                                   const std::filesystem::path& out) {
  const auto started = std::chrono::steady_clock::now();
  const ArrayModel array = build_array(c);
  const std::string text = read_text_file(sequence_path);
  const SwitchingSequence seq = sequence_from_json(parse_json(text, sequence_path), sequence_path);
  if (seq.size() != array.size())
    throw ConfigError("sequence " + sequence_path + " has M = " + std::to_string(seq.size()) +
                      " but the configured array has " + std::to_string(array.size()) + " elements");
  const ReceiveParams ref = build_reference(c);
  const AmbiguitySurface s =
      ambiguity_surface(array, seq, ref, doppler_grid(c), angle_grid(c), build_axis(c), c.threads);

  CommandResult r;
  write_text_file(out / "surface.csv", surface_to_string(s));
  Json meta{{"axis", to_string(s.axis)},
            {"doppler_grid", {{"min_hz", s.doppler.front()}, {"max_hz", s.doppler.back()}, {"count", s.doppler.size()},
                              {"step_hz", c.sweep.doppler_step_hz}}},
            {"angle_grid", {{"min_deg", s.angle_deg.front()}, {"max_deg", s.angle_deg.back()},
                            {"count", s.angle_deg.size()}, {"step_deg", c.sweep.angle_step_deg}}},
            {"reference", {{"azimuth_deg", c.reference.azimuth_deg}, {"elevation_deg", c.reference.elevation_deg},
                           {"doppler_hz", c.reference.doppler_hz}}},
            {"seed", opt_seed_json(c)},
            {"sequence_file", sequence_path},
            {"sequence_hash", hex64(fnv1a(text))},
            {"floor_db", AmbiguitySurface::kFloorDb}};
  write_text_file(out / "surface.json", meta.dump(2) + "\n");
  r.outputs = {"surface.csv", "surface.json"};
  r.summary = Json{{"rows", s.rows()}, {"cols", s.cols()}, {"peak_sidelobe_db",
                                                              AmbiguitySurface::to_db(peak_sidelobe(s))}};
  write_manifest(out, "ambiguity", c, seconds_since(started), r);
  return r;
}

inline SwitchingSequence crlb_sequence(const ExperimentConfig& c, const ArrayModel& array) {
  if (c.crlb.sequence == "sequential") return sequential(array.size(), c.switching.delta_t_s, c.switching.snapshots);
  Rng rng(mix_seed(c.run_seed(), kCrlbSeq));
  if (c.crlb.sequence == "hybrid")
    return hybrid_init(array.size(), c.switching.delta_t_s, c.switching.snapshots, hybrid_partition(c, array), rng);
  return random_init(array.size(), c.switching.delta_t_s, c.switching.snapshots, rng);
}

inline bool within_relative(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

inline CommandResult cmd_crlb(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto started = std::chrono::steady_clock::now();
  const ArrayModel array = build_array(c);
  const SwitchingSequence seq = crlb_sequence(c, array);
  const ParamVector theta{deg2rad(c.crlb.azimuth_deg), c.crlb.doppler_hz, c.crlb.amplitude, c.crlb.phase_rad};
  const double lambda = wavelength(c);

  CommandResult r;
  Json report{{"params",
               {{"phi_deg", c.crlb.azimuth_deg},
                {"nu_hz", c.crlb.doppler_hz},
                {"r", c.crlb.amplitude},
                {"psi_rad", c.crlb.phase_rad},
                {"sigma", c.crlb.sigma},
                {"M", array.size()},
                {"sequence", c.crlb.sequence},
                {"delta_t_s", c.switching.delta_t_s}}}};
  try {
    Json closed{{"var_nu", crlb_doppler(eta_vector(seq, true), theta.amplitude, c.crlb.sigma)}};
    if (c.array.kind == "ula")
      closed["var_phi"] = crlb_aoa(array.size(), c.array.spacing_wavelengths * lambda, lambda, theta.azimuth,
                                   theta.amplitude, c.crlb.sigma);
    else
      closed["var_phi"] = nullptr;  // closed form only covers the omni ULA
    report["closed_form"] = closed;

    const FisherInfo info = compute_fim(array, seq, theta, c.crlb.sigma);
    const double ratio = off_diagonal_ratio(info.fim);
    report["off_diag_ratio"] = ratio;
    report["fim"] = matrix_json(info.fim);
    Json diag{{"var_phi", 1.0 / info.fim(0, 0)}, {"var_nu", 1.0 / info.fim(1, 1)},
              {"var_r", 1.0 / info.fim(2, 2)}, {"var_psi", 1.0 / info.fim(3, 3)}};
    report["numeric_reciprocal_diagonal"] = diag;

    std::optional<CRLBResult> full;
    try {
      full = fim_numeric(array, seq, theta, c.crlb.sigma);
      report["numeric"] = crlb_numeric_json(*full);
    } catch (const SingularFimError& e) {
      report["numeric"] = nullptr;
      report["singular"] = Json{{"message", e.what()}, {"null_space", e.null_space}};
    }

    const bool phi_known = !closed["var_phi"].is_null();
    bool diag_ok = within_relative(closed["var_nu"].get<double>(), diag["var_nu"].get<double>(), 0.01);
    if (phi_known) diag_ok = diag_ok && within_relative(closed["var_phi"].get<double>(), diag["var_phi"].get<double>(), 0.01);
    const bool assumption = ratio < 0.05;
    bool full_ok = false;
    if (full) {
      full_ok = within_relative(closed["var_nu"].get<double>(), full->var_nu(), 0.01);
      if (phi_known) full_ok = full_ok && within_relative(closed["var_phi"].get<double>(), full->var_phi(), 0.01);
    }
    // The closed forms model unit-gain omni elements on a line.
    const bool applicable = c.array.kind == "ula" && !c.array.pattern_file;
    report["agreement"] = Json{{"closed_form_applicable", applicable},
                               {"closed_form_matches_reciprocal_diagonal", diag_ok},
                               {"diagonal_assumption_holds", assumption},
                               {"closed_form_matches_full_inverse", full ? Json(full_ok) : Json(nullptr)},
                               {"agree", applicable && diag_ok && (!assumption || full_ok)}};
    r.summary = report["agreement"];
  } catch (const EndfireSingularityError& e) {
    report["error"] = Json{{"type", "endfire_singularity"}, {"message", e.what()}};
    r.exit_code = 3;
    r.summary = report["error"];
  } catch (const UnobservableDopplerError& e) {
    report["error"] = Json{{"type", "unobservable_doppler"}, {"message", e.what()}};
    r.exit_code = 3;
    r.summary = report["error"];
  }
  write_text_file(out / "crlb.json", report.dump(2) + "\n");
  r.outputs = {"crlb.json"};
  write_manifest(out, "crlb", c, seconds_since(started), r);
  return r;
}

inline Json scheme_json(const SchemeReport& s) {
  Json peaks = Json::array();
  for (const auto& p : s.top_sidelobes)
    peaks.push_back({{"delta_doppler_hz", p.doppler}, {"angle_deg", p.angle_deg}, {"magnitude_db", p.magnitude_db()}});
  return Json{{"name", s.name},
              {"doppler_half_power", width_json(s.doppler_width)},
              {"angle_half_power", width_json(s.angle_width)},
              {"peak_sidelobe_db", AmbiguitySurface::to_db(s.peak_sidelobe)},
              {"top_sidelobes", peaks},
              {"crlb_nu_full_hz2", s.crlb_nu_full},
              {"crlb_nu_effective_hz2", s.crlb_nu_effective}};
}

inline Json comparison_json(const ComparisonReport& rep) {
  Json schemes = Json::array();
  for (const auto& s : rep.schemes) schemes.push_back(scheme_json(s));
  return Json{{"schemes", schemes},
              {"effective_elements", rep.effective},
              {"effective_factor", rep.xi},
              {"inverse_effective_factor", rep.inverse_xi},
              {"broadening_ratio", rep.broadening_ratio},
              {"broadening_vs_inverse_xi", rep.broadening_vs_inverse_xi},
              {"angle_width_ratio", rep.angle_width_ratio},
              {"angle_width_difference_deg",
               rep.scheme("hybrid").angle_width.width() - rep.scheme("random").angle_width.width()},
              {"angle_grid_step_deg", rep.angle_grid_step}};
}

struct ComparisonRun {
  ArrayModel array;
  std::vector<NamedSequence> sequences;
  std::vector<AnnealTrace> traces;  // random, hybrid
  ComparisonReport report;
};

inline CompareSettings build_compare_settings(const ExperimentConfig& c) {
  CompareSettings s;
  s.reference = build_reference(c);
  s.doppler_grid = doppler_grid(c);
  s.angle_grid_deg = angle_grid(c);
  s.axis = build_axis(c);
  s.threshold_db = c.threshold_db;
  s.amplitude = c.crlb.amplitude;
  s.sigma = c.crlb.sigma;
  s.threads = c.threads;
  return s;
}

/// Sequential, optimized random and optimized hybrid sequences plus their comparison.
inline ComparisonRun run_comparison(const ExperimentConfig& c) {
  ArrayModel array = build_array(c);
  const Partition partition = hybrid_partition(c, array);
  const SwitchingSequence seq = sequential(array.size(), c.switching.delta_t_s, c.switching.snapshots, partition);
  const ObjectiveEvaluator f = make_objective(array, seq, build_region(c), build_objective(c));
  OptimizedSequence rnd = run_optimization(c, array, UpdateKind::Random, f);
  OptimizedSequence hyb = run_optimization(c, array, UpdateKind::Hybrid, f);
  std::vector<NamedSequence> seqs{{"sequential", seq}, {"random", rnd.result.sequence}, {"hybrid", hyb.result.sequence}};
  ComparisonReport report = compare_schemes(array, seqs, build_compare_settings(c));
  return {std::move(array), std::move(seqs), {std::move(rnd.result.trace), std::move(hyb.result.trace)},
          std::move(report)};
}

inline CommandResult cmd_compare(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto started = std::chrono::steady_clock::now();
  c.run_seed();
  const ComparisonRun run = run_comparison(c);
  CommandResult r;
  for (const auto& s : run.report.schemes) {
    write_text_file(out / ("surface_" + s.name + ".csv"), surface_to_string(s.surface));
    r.outputs.push_back("surface_" + s.name + ".csv");
  }
  for (const auto& s : run.sequences) {
    write_text_file(out / ("sequence_" + s.name + ".json"), sequence_to_string(s.sequence));
    r.outputs.push_back("sequence_" + s.name + ".json");
  }
  write_text_file(out / "trace_random.csv", trace_to_string(run.traces[0]));
  write_text_file(out / "trace_hybrid.csv", trace_to_string(run.traces[1]));
  r.outputs.push_back("trace_random.csv");
  r.outputs.push_back("trace_hybrid.csv");
  Json report = comparison_json(run.report);
  report["final_objective"] = {{"random", run.traces[0].records.back().objective},
                               {"hybrid", run.traces[1].records.back().objective}};
  write_text_file(out / "compare.json", report.dump(2) + "\n");
  r.outputs.push_back("compare.json");
  r.summary = Json{{"broadening_ratio", run.report.broadening_ratio},
                   {"inverse_effective_factor", run.report.inverse_xi},
                   {"angle_width_ratio", run.report.angle_width_ratio}};
  write_manifest(out, "compare", c, seconds_since(started), r);
  return r;
}

inline CommandResult cmd_effective_factor(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto started = std::chrono::steady_clock::now();
  const ArrayModel array = build_array(c);
  const Direction dir = build_reference(c).arrival;
  const IndexSet eff = effective_elements(array, dir, c.threshold_db);
  CommandResult r;
  Json report{{"direction", {{"azimuth_deg", c.reference.azimuth_deg}, {"elevation_deg", c.reference.elevation_deg}}},
              {"threshold_db", c.threshold_db},
              {"M", array.size()},
              {"effective_count", eff.size()},
              {"effective_elements", eff},
              {"effective_factor", static_cast<double>(eff.size()) / static_cast<double>(array.size())}};
  write_text_file(out / "effective.json", report.dump(2) + "\n");
  r.outputs = {"effective.json"};
  r.summary = Json{{"effective_count", eff.size()}, {"effective_factor", report["effective_factor"]}};
  write_manifest(out, "effective-factor", c, seconds_since(started), r);
  return r;
}

}  // namespace sounder
