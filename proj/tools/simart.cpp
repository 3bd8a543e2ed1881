// Experiment driver: runs seeded batches of the random-measure models and
// persists CSV/JSON reports plus optional rasters. Every run is a pure
// function of (config file, seed root), so reruns are byte identical and a
// shared cache directory can hand realizations between subcommands.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "simart/analysis.hpp"
#include "simart/convolve.hpp"
#include "simart/error.hpp"
#include "simart/fit.hpp"
#include "simart/fourier.hpp"
#include "simart/intersect.hpp"
#include "simart/model.hpp"
#include "simart/raster.hpp"
#include "simart/rng.hpp"
#include "simart/sha256.hpp"
#include "simart/subdivision.hpp"
#include "simart/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace simart;

namespace {

// ---------------------------------------------------------------------------
// Formatting and file plumbing

void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::string number_string(double v) {
  std::string s;
  append_number(s, v);
  return s;
}

// JSON value for a double that may be infinite (JSON has no inf literal).
json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open '" + path.string() + "' for reading");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail_io("read failed for '" + path.string() + "'");
  return text;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_io("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail_io("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Config checking helpers (same conventions as the library codecs: unknown
// keys are rejected, every message names the offending location)

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail_validation(std::string(where) + ": unknown key '" + it.key() + "'");
  }
}

double get_number(const json& j, const char* key, const char* where) {
  require(j.contains(key), std::string(where) + ": missing '" + key + "'");
  require(j.at(key).is_number(), std::string(where) + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

double get_number_or(const json& j, const char* key, const char* where, double dflt) {
  if (!j.contains(key)) return dflt;
  return get_number(j, key, where);
}

std::int64_t get_integer(const json& j, const char* key, const char* where) {
  require(j.contains(key), std::string(where) + ": missing '" + key + "'");
  require(j.at(key).is_number_integer() || j.at(key).is_number_unsigned(),
          std::string(where) + ": '" + key + "' must be an integer");
  return j.at(key).get<std::int64_t>();
}

std::int64_t get_integer_or(const json& j, const char* key, const char* where, std::int64_t dflt) {
  if (!j.contains(key)) return dflt;
  return get_integer(j, key, where);
}

std::uint64_t get_u64(const json& j, const char* key, const char* where) {
  require(j.contains(key), std::string(where) + ": missing '" + key + "'");
  require(j.at(key).is_number_unsigned(),
          std::string(where) + ": '" + key + "' must be a nonnegative integer");
  return j.at(key).get<std::uint64_t>();
}

std::uint64_t get_u64_or(const json& j, const char* key, const char* where, std::uint64_t dflt) {
  if (!j.contains(key)) return dflt;
  return get_u64(j, key, where);
}

bool get_bool_or(const json& j, const char* key, const char* where, bool dflt) {
  if (!j.contains(key)) return dflt;
  require(j.at(key).is_boolean(), std::string(where) + ": '" + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const char* key, const char* where) {
  require(j.contains(key), std::string(where) + ": missing '" + key + "'");
  require(j.at(key).is_string(), std::string(where) + ": '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

VecD get_vec(const json& arr, const char* where) {
  require(arr.is_array() && arr.size() >= 1 && arr.size() <= 3,
          std::string(where) + ": expected an array of 1 to 3 numbers");
  VecD v(static_cast<int>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    require(arr.at(i).is_number(), std::string(where) + ": expected numbers");
    v[static_cast<int>(i)] = arr.at(i).get<double>();
  }
  return v;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentConfig {
  ModelSpec model;
  std::vector<FamilySpec> families;
  int n_max = 0;  // "levels": sequences run over 0..n_max
  std::uint64_t replicates = 1;
  std::uint64_t seed_root = 0;
  std::map<std::uint64_t, std::uint64_t> seed_overrides;
  MassOptions mass;
  std::string output = "out";
  json analysis = json::object();

  // The seed value printed in every CSV row for this replicate. Putting the
  // value back as seeds.overrides[r] (or running replicates=1 with
  // seeds.root equal to it and an override for slot 0) reproduces the row.
  std::uint64_t rep_seed(std::uint64_t r) const {
    auto it = seed_overrides.find(r);
    if (it != seed_overrides.end()) return it->second;
    return mix64(seed_root + (r + 1) * 0x9e3779b97f4a7c15ull);
  }

  const FamilySpec& family_by_id(const std::string& id) const {
    for (const FamilySpec& f : families)
      if (f.id == id) return f;
    fail_validation("config: no family with id '" + id + "'");
  }
};

void validate_analysis_keys(const json& a) {
  check_keys(a, {"dimension", "fourier", "projection", "convolve", "tail_audit", "render"},
             "config.analysis");
  if (a.contains("dimension"))
    check_keys(a.at("dimension"), {"estimator", "max_level", "window", "surviving_only"},
               "config.analysis.dimension");
  if (a.contains("fourier"))
    check_keys(a.at("fourier"), {"level", "k_max"}, "config.analysis.fourier");
  if (a.contains("projection"))
    check_keys(a.at("projection"), {"level", "grid_points", "directions"},
               "config.analysis.projection");
  if (a.contains("convolve"))
    check_keys(a.at("convolve"),
               {"level", "level_coarse", "resolution", "input_resolution", "map", "other_seed",
                "threshold_fraction", "export_density", "export_pgm"},
               "config.analysis.convolve");
  if (a.contains("tail_audit"))
    check_keys(a.at("tail_audit"), {"family_id", "level", "kappas", "replicates"},
               "config.analysis.tail_audit");
  if (a.contains("render"))
    check_keys(a.at("render"), {"level", "resolution", "file"}, "config.analysis.render");
}

ExperimentConfig load_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail_validation(std::string("config: not valid JSON: ") + e.what());
  }
  require(j.is_object(), "config: top level must be a JSON object");
  check_keys(j, {"model", "families", "levels", "replicates", "seeds", "engines", "output",
                 "analysis"},
             "config");
  require(j.contains("model"), "config: missing 'model'");

  ExperimentConfig cfg;
  cfg.model = ModelSpec::from_json(j.at("model").dump());
  cfg.n_max = cfg.model.depth;

  if (j.contains("families")) {
    require(j.at("families").is_array(), "config: 'families' must be an array");
    for (const json& f : j.at("families"))
      cfg.families.push_back(FamilySpec::from_json(f.dump()));
    for (std::size_t i = 0; i < cfg.families.size(); ++i)
      for (std::size_t k = i + 1; k < cfg.families.size(); ++k)
        require(cfg.families[i].id != cfg.families[k].id,
                "config: duplicate family id '" + cfg.families[i].id + "'");
  }

  if (j.contains("levels")) {
    std::int64_t n = get_integer(j, "levels", "config");
    require(n >= 0 && n <= cfg.model.depth,
            "config: 'levels' must lie in [0, model depth]");
    cfg.n_max = static_cast<int>(n);
  }

  cfg.replicates = get_u64_or(j, "replicates", "config", 1);
  require(cfg.replicates >= 1 && cfg.replicates <= 1'000'000,
          "config: 'replicates' must lie in [1, 1000000]");

  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    require(s.is_object(), "config: 'seeds' must be an object");
    check_keys(s, {"root", "overrides"}, "config.seeds");
    cfg.seed_root = get_u64_or(s, "root", "config.seeds", 0);
    if (s.contains("overrides")) {
      const json& o = s.at("overrides");
      require(o.is_object(), "config.seeds: 'overrides' must map replicate index to seed");
      for (auto it = o.begin(); it != o.end(); ++it) {
        std::uint64_t rep = 0;
        const std::string& key = it.key();
        auto res = std::from_chars(key.data(), key.data() + key.size(), rep);
        require(res.ec == std::errc() && res.ptr == key.data() + key.size(),
                "config.seeds.overrides: key '" + key + "' is not a replicate index");
        require(it.value().is_number_unsigned(),
                "config.seeds.overrides: seed values must be nonnegative integers");
        cfg.seed_overrides[rep] = it.value().get<std::uint64_t>();
      }
    }
  }

  if (j.contains("engines")) {
    const json& e = j.at("engines");
    require(e.is_object(), "config: 'engines' must be an object");
    check_keys(e, {"plane_tol", "curve_step", "ifs_diam_tol", "weighted_curves",
                   "ifs_leaf_budget"},
               "config.engines");
    cfg.mass.plane_tol = get_number_or(e, "plane_tol", "config.engines", cfg.mass.plane_tol);
    cfg.mass.curve_step = get_number_or(e, "curve_step", "config.engines", cfg.mass.curve_step);
    cfg.mass.ifs_diam_tol =
        get_number_or(e, "ifs_diam_tol", "config.engines", cfg.mass.ifs_diam_tol);
    cfg.mass.weighted = get_bool_or(e, "weighted_curves", "config.engines", cfg.mass.weighted);
    cfg.mass.ifs_leaf_budget =
        get_u64_or(e, "ifs_leaf_budget", "config.engines", cfg.mass.ifs_leaf_budget);
    require(cfg.mass.plane_tol > 0.0, "config.engines: plane_tol must be positive");
    require(cfg.mass.curve_step > 0.0, "config.engines: curve_step must be positive");
    require(cfg.mass.ifs_diam_tol >= 0.0, "config.engines: ifs_diam_tol must be nonnegative");
  }

  if (j.contains("output")) {
    cfg.output = get_string(j, "output", "config");
    require(!cfg.output.empty(), "config: 'output' must be nonempty");
  }

  if (j.contains("analysis")) {
    require(j.at("analysis").is_object(), "config: 'analysis' must be an object");
    cfg.analysis = j.at("analysis");
    validate_analysis_keys(cfg.analysis);
  }

  // Declared Frostman exponents are cross-checked against the model here, so
  // a bad pairing fails before any sampling starts.
  double alpha = cfg.model.alpha();
  for (const FamilySpec& fam : cfg.families) {
    double s = fam.frostman_exponent();
    if (fam.regime == RegimeTag::limit && !(s > alpha)) {
      char buf[192];
      std::snprintf(buf, sizeof(buf),
                    "config: the limit regime requires s > alpha, but family '%s' declares "
                    "Frostman exponent s = %.6g <= alpha = %.6g; tag it with regime \"growth\" "
                    "to study the growth rate instead",
                    fam.id.c_str(), s, alpha);
      fail_validation(buf);
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Output collection: every file of a run is built in memory, written in one
// pass, and listed in manifest.json with its SHA-256. Wall time goes to
// stderr only, so reruns of the same config are byte identical.

struct RunOutput {
  fs::path dir;
  std::map<std::string, std::string> files;

  void add(std::string relpath, std::string bytes) {
    files[std::move(relpath)] = std::move(bytes);
  }

  void commit(const std::string& canonical_config) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail_io("cannot create output directory '" + dir.string() + "'");
    json outputs = json::object();
    for (const auto& [rel, bytes] : files) {
      fs::path target = dir / rel;
      fs::create_directories(target.parent_path(), ec);
      if (ec) fail_io("cannot create directory '" + target.parent_path().string() + "'");
      write_file(target, bytes);
      outputs[rel] = sha256_hex(bytes);
    }
    json manifest;
    manifest["config_sha256"] = sha256_hex(canonical_config);
    manifest["tool"] = {{"name", "simart"}, {"version", version_string}};
    manifest["outputs"] = outputs;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  }
};

// ---------------------------------------------------------------------------
// Realization acquisition with the SIMART_CACHE handoff

std::optional<fs::path> cache_root() {
  const char* env = std::getenv("SIMART_CACHE");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return fs::path(env);
}

Realization obtain_realization(const ModelSpec& model, std::uint64_t seed_value) {
  std::optional<fs::path> root = cache_root();
  fs::path file;
  if (root) {
    file = *root / (sha256_hex(model.to_json() + ":" + std::to_string(seed_value)) + ".rlz");
    if (fs::exists(file)) return Realization::deserialize(read_file(file));
  }
  Realization real = Realization::make(model, SeedPath(seed_value));
  if (root) {
    std::error_code ec;
    fs::create_directories(*root, ec);
    if (!ec) {
      fs::path tmp = file;
      tmp += ".tmp";
      write_file(tmp, real.serialize());
      fs::rename(tmp, file, ec);
      if (ec) fs::remove(tmp, ec);
    }
  }
  return real;
}

// ---------------------------------------------------------------------------
// Worker pool: replicates are claimed off an atomic counter and every worker
// writes only its own result slot; callers emit rows in replicate order
// afterwards, so the files never depend on scheduling.

void run_parallel(std::uint64_t items, int threads,
                  const std::function<void(std::uint64_t)>& fn) {
  if (threads <= 1 || items <= 1) {
    for (std::uint64_t i = 0; i < items; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::mutex mutex;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      std::uint64_t i = next.fetch_add(1);
      if (i >= items) return;
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int count = std::min<int>(threads, static_cast<int>(std::min<std::uint64_t>(items, 256)));
  pool.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each appends its files into the shared RunOutput; `run`
// chains them so one config can drive a whole experiment.

void cmd_simulate(const ExperimentConfig& cfg, int threads, RunOutput& out) {
  std::vector<std::string> serialized(cfg.replicates);
  run_parallel(cfg.replicates, threads, [&](std::uint64_t r) {
    serialized[r] = obtain_realization(cfg.model, cfg.rep_seed(r)).serialize();
  });
  std::string csv = "replicate,file,seed\n";
  json files = json::array();
  for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
    std::string rel = "realizations/rep-" + std::to_string(r) + ".rlz";
    csv += std::to_string(r) + "," + rel + "," + std::to_string(cfg.rep_seed(r)) + "\n";
    files.push_back(rel);
    out.add(rel, std::move(serialized[r]));
  }
  json meta;
  meta["model"] = json::parse(cfg.model.to_json());
  meta["replicates"] = cfg.replicates;
  meta["files"] = files;
  out.add("simulate.csv", std::move(csv));
  out.add("simulate.json", meta.dump(2) + "\n");
}

void cmd_intersect(const ExperimentConfig& cfg, int threads, RunOutput& out) {
  require(!cfg.families.empty(), "config: 'families' must be nonempty for intersect");
  std::vector<std::vector<MassSequence>> results(cfg.replicates);
  run_parallel(cfg.replicates, threads, [&](std::uint64_t r) {
    Realization real = obtain_realization(cfg.model, cfg.rep_seed(r));
    std::vector<MassSequence> rows;
    rows.reserve(cfg.families.size());
    for (const FamilySpec& fam : cfg.families)
      rows.push_back(mass_sequence(real, fam, cfg.n_max, cfg.mass));
    results[r] = std::move(rows);
  });

  std::string csv = "replicate,family_id,n,Y,increment,method,seed\n";
  json entries = json::array();
  for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
    std::string seed = std::to_string(cfg.rep_seed(r));
    for (const MassSequence& seq : results[r]) {
      for (std::size_t m = 0; m < seq.values.size(); ++m) {
        csv += std::to_string(r) + "," + seq.family_id + "," + std::to_string(m) + ",";
        append_number(csv, seq.values[m]);
        csv += ',';
        if (m > 0) append_number(csv, seq.increments[m - 1]);
        csv += ',';
        csv += mass_method_name(seq.method);
        csv += ',';
        csv += seed;
        csv += '\n';
      }
      json e;
      e["replicate"] = r;
      e["family_id"] = seq.family_id;
      e["method"] = mass_method_name(seq.method);
      e["growth_regime"] = seq.growth_regime;
      e["decay_rate"] = json_number(seq.decay_rate);
      if (seq.growth_regime) e["growth_rate"] = json_number(seq.growth_rate);
      e["limit_value"] = json_number(seq.limit_value());
      e["seed"] = cfg.rep_seed(r);
      entries.push_back(std::move(e));
    }
  }

  json aggregates = json::array();
  for (const FamilySpec& fam : cfg.families) {
    std::vector<double> decays;
    std::vector<double> limits;
    for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
      for (const MassSequence& seq : results[r]) {
        if (seq.family_id != fam.id) continue;
        decays.push_back(seq.decay_rate);
        limits.push_back(seq.limit_value());
      }
    }
    json a;
    a["family_id"] = fam.id;
    a["median_decay_rate"] = json_number(median(decays));
    a["median_limit_value"] = json_number(median(limits));
    aggregates.push_back(std::move(a));
  }
  json report;
  report["sequences"] = entries;
  report["aggregates"] = aggregates;
  out.add("masses.csv", std::move(csv));
  out.add("sequences.json", report.dump(2) + "\n");
}

struct DirectionSpec {
  std::string id;
  PlaneParam line;
};

std::vector<DirectionSpec> projection_directions(const ExperimentConfig& cfg, const json& block) {
  std::vector<DirectionSpec> dirs;
  if (block.contains("directions")) {
    require(block.at("directions").is_array() && !block.at("directions").empty(),
            "config.analysis.projection: 'directions' must be a nonempty array");
    for (const json& d : block.at("directions")) {
      require(d.is_object(), "config.analysis.projection: directions must be objects");
      check_keys(d, {"id", "point", "direction"}, "config.analysis.projection.direction");
      DirectionSpec spec;
      spec.id = get_string(d, "id", "config.analysis.projection.direction");
      VecD point = d.contains("point")
                       ? get_vec(d.at("point"), "config.analysis.projection.direction.point")
                       : VecD(cfg.model.d);
      require(d.contains("direction"),
              "config.analysis.projection.direction: missing 'direction'");
      VecD axis = get_vec(d.at("direction"), "config.analysis.projection.direction.direction");
      require(point.d == cfg.model.d && axis.d == cfg.model.d,
              "config.analysis.projection.direction: dimension mismatch with the model");
      spec.line = PlaneParam::line(point, axis);
      dirs.push_back(std::move(spec));
    }
    return dirs;
  }
  require(cfg.model.d == 2,
          "config.analysis.projection: 'directions' is required unless d = 2");
  const double r = std::sqrt(0.5);
  dirs.push_back({"principal", PlaneParam::line(VecD(0.0, 0.0), VecD(1.0, 0.0))});
  dirs.push_back({"diagonal", PlaneParam::line(VecD(0.0, 0.0), VecD(r, r))});
  return dirs;
}

// Largest and median absolute step between neighbouring profile samples.
void jump_stats(const std::vector<double>& values, double* max_jump, double* median_jump) {
  std::vector<double> jumps;
  jumps.reserve(values.size());
  for (std::size_t i = 1; i < values.size(); ++i)
    jumps.push_back(std::fabs(values[i] - values[i - 1]));
  *max_jump = jumps.empty() ? 0.0 : *std::max_element(jumps.begin(), jumps.end());
  *median_jump = jumps.empty() ? 0.0 : median(jumps);
}

void cmd_project(const ExperimentConfig& cfg, int threads, RunOutput& out) {
  json block = cfg.analysis.contains("projection") ? cfg.analysis.at("projection")
                                                   : json::object();
  std::vector<DirectionSpec> dirs = projection_directions(cfg, block);
  int level = static_cast<int>(
      get_integer_or(block, "level", "config.analysis.projection", cfg.n_max));
  require(level >= 0 && level <= cfg.model.depth,
          "config.analysis.projection: 'level' must lie in [0, model depth]");
  int grid_points = static_cast<int>(
      get_integer_or(block, "grid_points", "config.analysis.projection", 512));
  require(grid_points >= 2 && grid_points <= (1 << 20),
          "config.analysis.projection: 'grid_points' must lie in [2, 2^20]");

  std::vector<std::vector<ProjectionProfile>> results(cfg.replicates);
  run_parallel(cfg.replicates, threads, [&](std::uint64_t r) {
    Realization real = obtain_realization(cfg.model, cfg.rep_seed(r));
    std::vector<ProjectionProfile> rows;
    rows.reserve(dirs.size());
    for (const DirectionSpec& d : dirs)
      rows.push_back(projection_profile(real, d.line, level, grid_points, cfg.mass));
    results[r] = std::move(rows);
  });

  std::string csv = "replicate,direction_id,offset,value,seed\n";
  json entries = json::array();
  for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
    std::string seed = std::to_string(cfg.rep_seed(r));
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const ProjectionProfile& prof = results[r][k];
      for (std::size_t i = 0; i < prof.offsets.size(); ++i) {
        csv += std::to_string(r) + "," + dirs[k].id + ",";
        append_number(csv, prof.offsets[i]);
        csv += ',';
        append_number(csv, prof.values[i]);
        csv += ',';
        csv += seed;
        csv += '\n';
      }
      double max_jump = 0.0;
      double median_jump = 0.0;
      jump_stats(prof.values, &max_jump, &median_jump);
      json e;
      e["replicate"] = r;
      e["direction_id"] = dirs[k].id;
      e["level"] = prof.level;
      e["max_jump"] = max_jump;
      e["median_jump"] = median_jump;
      e["spacing"] = prof.spacing;
      e["riemann_mass"] = prof.riemann_mass;
      e["reference_mass"] = prof.reference_mass;
      e["mass_defect"] = prof.mass_defect;
      e["seed"] = cfg.rep_seed(r);
      entries.push_back(std::move(e));
    }
  }
  json report;
  report["profiles"] = entries;
  out.add("projection.csv", std::move(csv));
  out.add("projection.json", report.dump(2) + "\n");
}

void cmd_dimension(const ExperimentConfig& cfg, int threads, RunOutput& out) {
  json block = cfg.analysis.contains("dimension") ? cfg.analysis.at("dimension") : json::object();
  std::string estimator = block.contains("estimator")
                              ? get_string(block, "estimator", "config.analysis.dimension")
                              : std::string("box");
  require(estimator == "box" || estimator == "correlation",
          "config.analysis.dimension: estimator must be 'box' or 'correlation'");
  bool is_box = estimator == "box";
  bool cutout = cfg.model.kind == ModelSpec::Kind::cutout;
  int default_max = cutout ? std::min(cfg.model.depth, 24 / cfg.model.d) : cfg.model.depth;
  int max_level = static_cast<int>(
      get_integer_or(block, "max_level", "config.analysis.dimension", default_max));
  require(max_level >= 1, "config.analysis.dimension: 'max_level' must be >= 1");
  int window_lo = -1;
  int window_hi = -1;
  if (block.contains("window")) {
    const json& w = block.at("window");
    require(w.is_array() && w.size() == 2 && w.at(0).is_number_integer() &&
                w.at(1).is_number_integer(),
            "config.analysis.dimension: 'window' must be [lo, hi] integers");
    window_lo = w.at(0).get<int>();
    window_hi = w.at(1).get<int>();
  }
  bool surviving_only =
      get_bool_or(block, "surviving_only", "config.analysis.dimension", false);

  struct RepFit {
    bool alive = false;
    DimensionFit fit;
  };
  std::vector<RepFit> results(cfg.replicates);
  run_parallel(cfg.replicates, threads, [&](std::uint64_t r) {
    Realization real = obtain_realization(cfg.model, cfg.rep_seed(r));
    RepFit rep;
    if (is_box) {
      std::vector<std::uint64_t> counts = occupied_cell_counts(real, max_level);
      rep.alive = counts.back() > 0;
      if (rep.alive || !surviving_only)
        rep.fit = box_dimension(counts, window_lo, window_hi);
    } else {
      std::vector<std::vector<double>> masses(static_cast<std::size_t>(max_level) + 1);
      if (const SubdivisionTree* tree = real.subdivision()) {
        require(max_level <= tree->depth(),
                "config.analysis.dimension: 'max_level' exceeds the tree depth");
        for (int m = 0; m <= max_level; ++m) {
          const auto& lv = tree->level(m);
          double cell_vol = std::pow(0.5, cfg.model.d * m);
          std::vector<double> cell_masses;
          cell_masses.reserve(lv.beta.size());
          for (double beta : lv.beta) cell_masses.push_back(beta * cell_vol);
          masses[static_cast<std::size_t>(m)] = std::move(cell_masses);
        }
        rep.alive = !tree->extinct();
      } else {
        require(cfg.model.d * max_level <= 24,
                "config.analysis.dimension: correlation on cutouts needs d * max_level <= 24");
        for (int m = 0; m <= max_level; ++m) {
          Raster field = rasterize_density(real, m, std::max(1, 1 << m));
          double cell_vol = field.cell_volume();
          std::vector<double> cell_masses;
          for (double v : field.v)
            if (v > 0.0) cell_masses.push_back(v * cell_vol);
          masses[static_cast<std::size_t>(m)] = std::move(cell_masses);
        }
        rep.alive = !masses.back().empty();
      }
      if (rep.alive || !surviving_only)
        rep.fit = correlation_dimension(masses, window_lo, window_hi);
    }
    results[r] = std::move(rep);
  });

  std::string csv = "replicate,level,statistic,seed\n";
  json entries = json::array();
  std::vector<double> slopes;
  for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
    const RepFit& rep = results[r];
    if (surviving_only && !rep.alive) continue;
    std::string seed = std::to_string(cfg.rep_seed(r));
    for (std::size_t m = 0; m < rep.fit.per_level.size(); ++m) {
      csv += std::to_string(r) + "," + std::to_string(m) + ",";
      append_number(csv, rep.fit.per_level[m]);
      csv += ',';
      csv += seed;
      csv += '\n';
    }
    json e;
    e["replicate"] = r;
    e["alive"] = rep.alive;
    e["slope"] = json_number(rep.fit.slope);
    e["slope_stderr"] = json_number(rep.fit.slope_stderr);
    e["level_lo"] = rep.fit.level_lo;
    e["level_hi"] = rep.fit.level_hi;
    e["seed"] = cfg.rep_seed(r);
    entries.push_back(std::move(e));
    slopes.push_back(rep.fit.slope);
  }
  require(!slopes.empty(), "dimension: no replicate passed the survival filter");
  json report;
  report["estimator"] = estimator;
  report["max_level"] = max_level;
  report["fits"] = entries;
  report["median_slope"] = json_number(median(slopes));
  report["included_replicates"] = slopes.size();
  out.add("dimension.csv", std::move(csv));
  out.add("dimension.json", report.dump(2) + "\n");
}

void cmd_fourier(const ExperimentConfig& cfg, int threads, RunOutput& out) {
  json block = cfg.analysis.contains("fourier") ? cfg.analysis.at("fourier") : json::object();
  int level =
      static_cast<int>(get_integer_or(block, "level", "config.analysis.fourier", cfg.n_max));
  int k_max = static_cast<int>(get_integer_or(block, "k_max", "config.analysis.fourier", 64));

  std::vector<SpectrumReport> results(cfg.replicates);
  run_parallel(cfg.replicates, threads, [&](std::uint64_t r) {
    Realization real = obtain_realization(cfg.model, cfg.rep_seed(r));
    results[r] = fourier_dimension_estimate(real, level, k_max);
  });

  std::string csv = "replicate,band,peak,seed\n";
  json entries = json::array();
  std::vector<double> estimates;
  for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
    const SpectrumReport& rep = results[r];
    std::string seed = std::to_string(cfg.rep_seed(r));
    for (std::size_t m = 0; m < rep.band_peaks.size(); ++m) {
      csv += std::to_string(r) + "," + std::to_string(m) + ",";
      append_number(csv, rep.band_peaks[m]);
      csv += ',';
      csv += seed;
      csv += '\n';
    }
    json e;
    e["replicate"] = r;
    e["mass"] = rep.mass;
    e["sigma_hat"] = json_number(rep.sigma_hat);
    e["sigma_stderr"] = json_number(rep.sigma_stderr);
    e["fourier_dimension"] = json_number(rep.fourier_dimension);
    e["seed"] = cfg.rep_seed(r);
    entries.push_back(std::move(e));
    estimates.push_back(rep.fourier_dimension);
  }
  json report;
  report["level"] = level;
  report["k_max"] = k_max;
  report["reports"] = entries;
  report["median_fourier_dimension"] = json_number(median(estimates));
  out.add("fourier.csv", std::move(csv));
  out.add("fourier.json", report.dump(2) + "\n");
}

MatD map_from_json(const json& rows, int d) {
  require(rows.is_array() && rows.size() == static_cast<std::size_t>(d),
          "config.analysis.convolve: 'map' must be d rows of d numbers");
  MatD S(d);
  for (int i = 0; i < d; ++i) {
    const json& row = rows.at(static_cast<std::size_t>(i));
    require(row.is_array() && row.size() == static_cast<std::size_t>(d),
            "config.analysis.convolve: 'map' must be d rows of d numbers");
    for (int jx = 0; jx < d; ++jx) {
      require(row.at(static_cast<std::size_t>(jx)).is_number(),
              "config.analysis.convolve: 'map' entries must be numbers");
      S.at(i, jx) = row.at(static_cast<std::size_t>(jx)).get<double>();
    }
  }
  return S;
}

// Input rasterization scale for a convolution: at least four cells per output
// cell and at least 2^(level+2) per axis, inside the per-dimension cap.
int convolve_input_resolution(const ExperimentConfig& cfg, const json& block, int level,
                              int resolution) {
  int cap_log = cfg.model.d == 1 ? 20 : 11;
  require(level <= cap_log,
          "config.analysis.convolve: 'level' too deep to rasterize at this dimension");
  std::int64_t wanted = std::max<std::int64_t>(std::int64_t{1} << std::min(level + 2, cap_log),
                                               std::int64_t{resolution});
  std::int64_t given =
      get_integer_or(block, "input_resolution", "config.analysis.convolve", wanted);
  require(given >= resolution && given <= (std::int64_t{1} << cap_log) &&
              (given & (given - 1)) == 0,
          "config.analysis.convolve: 'input_resolution' must be a power of two in "
          "[resolution, dimension cap]");
  require((std::int64_t{1} << level) <= given || cfg.model.kind == ModelSpec::Kind::cutout,
          "config.analysis.convolve: 'input_resolution' must be at least 2^level for "
          "subdivision models");
  return static_cast<int>(given);
}

void cmd_convolve(const ExperimentConfig& cfg, RunOutput& out) {
  json block = cfg.analysis.contains("convolve") ? cfg.analysis.at("convolve") : json::object();
  int d = cfg.model.d;
  int level =
      static_cast<int>(get_integer_or(block, "level", "config.analysis.convolve", cfg.n_max));
  require(level >= 0 && level <= cfg.model.depth,
          "config.analysis.convolve: 'level' must lie in [0, model depth]");
  int resolution = static_cast<int>(get_integer_or(block, "resolution",
                                                   "config.analysis.convolve",
                                                   d == 1 ? 4096 : 256));
  MatD S = block.contains("map") ? map_from_json(block.at("map"), d) : MatD::identity(d);
  bool self = !block.contains("other_seed");
  double threshold_fraction =
      get_number_or(block, "threshold_fraction", "config.analysis.convolve", 1.0);
  int input_res = convolve_input_resolution(cfg, block, level, resolution);

  std::uint64_t seed_a = cfg.rep_seed(0);
  Realization real_a = obtain_realization(cfg.model, seed_a);
  std::uint64_t seed_b = seed_a;
  Realization real_b;
  if (!self) {
    seed_b = get_u64(block, "other_seed", "config.analysis.convolve");
    real_b = obtain_realization(cfg.model, seed_b);
  }

  auto grid_at = [&](int n) {
    Raster a = rasterize_density(real_a, n, input_res);
    Raster b = self ? a : rasterize_density(real_b, n, input_res);
    return convolve(a, b, S, resolution, self);
  };

  ConvolutionGrid grid = grid_at(level);
  json report;
  report["level"] = level;
  report["input_resolution"] = input_res;
  report["seed_a"] = seed_a;
  report["seed_b"] = seed_b;
  report["self"] = self;
  report["grid"] = json::parse(grid.to_json());

  IntervalReport interval;
  if (block.contains("level_coarse")) {
    int coarse = static_cast<int>(get_integer(block, "level_coarse", "config.analysis.convolve"));
    require(coarse >= 0 && coarse < level,
            "config.analysis.convolve: 'level_coarse' must lie in [0, level)");
    ConvolutionGrid grid_coarse = grid_at(coarse);
    report["level_coarse"] = coarse;
    report["grid_coarse"] = json::parse(grid_coarse.to_json());
    interval = sumset_interior(grid, grid_coarse, threshold_fraction);
  } else {
    interval = sumset_interior(grid, threshold_fraction);
  }
  report["interval"] = json::parse(interval.to_json());

  if (get_bool_or(block, "export_density", "config.analysis.convolve", false)) {
    static_assert(sizeof(double) == 8);
    out.add("convolution_density.bin",
            std::string(reinterpret_cast<const char*>(grid.density.v.data()),
                        grid.density.v.size() * sizeof(double)));
  }
  if (get_bool_or(block, "export_pgm", "config.analysis.convolve", false))
    out.add("convolution_density.pgm", pgm16_bytes(grid.density));
  out.add("convolve.json", report.dump(2) + "\n");
}

void cmd_tail_audit(const ExperimentConfig& cfg, RunOutput& out) {
  require(cfg.analysis.contains("tail_audit"),
          "config: tail-audit needs an 'analysis.tail_audit' block");
  const json& block = cfg.analysis.at("tail_audit");
  require(!cfg.families.empty(), "config: 'families' must be nonempty for tail-audit");
  const FamilySpec& fam =
      block.contains("family_id")
          ? cfg.family_by_id(get_string(block, "family_id", "config.analysis.tail_audit"))
          : cfg.families.front();
  int level = static_cast<int>(get_integer_or(block, "level", "config.analysis.tail_audit",
                                              std::min(cfg.n_max, cfg.model.depth - 1)));
  std::uint64_t replicates =
      get_u64_or(block, "replicates", "config.analysis.tail_audit", 1000);
  require(block.contains("kappas") && block.at("kappas").is_array() &&
              !block.at("kappas").empty(),
          "config.analysis.tail_audit: 'kappas' must be a nonempty array");
  std::vector<double> kappas;
  for (const json& k : block.at("kappas")) {
    require(k.is_number(), "config.analysis.tail_audit: 'kappas' must be numbers");
    kappas.push_back(k.get<double>());
  }

  TailAudit audit = increment_tail_audit(cfg.model, fam, level, kappas, replicates,
                                         SeedPath(cfg.seed_root), cfg.mass);

  std::string csv = "kappa,exceed_count,frequency,seed\n";
  std::string seed = std::to_string(cfg.seed_root);
  for (std::size_t i = 0; i < audit.kappas.size(); ++i) {
    append_number(csv, audit.kappas[i]);
    csv += ',' + std::to_string(audit.exceed_counts[i]) + ',';
    append_number(csv, audit.frequencies[i]);
    csv += ',' + seed + '\n';
  }
  json report = json::parse(audit.to_json());
  report["family_id"] = fam.id;
  report["seed"] = cfg.seed_root;
  out.add("tail_audit.csv", std::move(csv));
  out.add("tail_audit.json", report.dump(2) + "\n");
}

void cmd_render_block(const ExperimentConfig& cfg, RunOutput& out) {
  json block = cfg.analysis.contains("render") ? cfg.analysis.at("render") : json::object();
  if (cfg.model.d != 2) fail_unsupported("render: requires a d = 2 model");
  int level =
      static_cast<int>(get_integer_or(block, "level", "config.analysis.render", cfg.n_max));
  int resolution =
      static_cast<int>(get_integer_or(block, "resolution", "config.analysis.render", 512));
  std::string file = block.contains("file")
                         ? get_string(block, "file", "config.analysis.render")
                         : std::string("render.pgm");
  Realization real = obtain_realization(cfg.model, cfg.rep_seed(0));
  Raster field = rasterize_density(real, level, resolution);
  out.add(file, pgm16_bytes(field));
}

void cmd_run(const ExperimentConfig& cfg, int threads, RunOutput& out) {
  cmd_simulate(cfg, threads, out);
  if (!cfg.families.empty()) cmd_intersect(cfg, threads, out);
  if (cfg.analysis.contains("dimension")) cmd_dimension(cfg, threads, out);
  if (cfg.analysis.contains("fourier")) cmd_fourier(cfg, threads, out);
  if (cfg.analysis.contains("projection")) cmd_project(cfg, threads, out);
  if (cfg.analysis.contains("convolve")) cmd_convolve(cfg, out);
  if (cfg.analysis.contains("tail_audit")) cmd_tail_audit(cfg, out);
  if (cfg.analysis.contains("render")) cmd_render_block(cfg, out);
}

// ---------------------------------------------------------------------------
// Command wiring

struct CommandContext {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  int threads = 1;
};

void add_common_options(CLI::App* cmd, CommandContext& ctx) {
  cmd->add_option("--config", ctx.config_path, "experiment config JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", ctx.out_override, "output directory (defaults to config 'output')");
  cmd->add_option("--seed-override", ctx.seed_override, "replace the config seed root");
  cmd->add_option("--threads", ctx.threads, "worker threads for replicate batches")
      ->check(CLI::Range(1, 256));
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::unsupported:
    case ErrorKind::singularity:
      return 2;
    case ErrorKind::resource:
      return 3;
    case ErrorKind::io:
      return 4;
  }
  return 1;
}

void run_config_command(const CommandContext& ctx,
                        const std::function<void(const ExperimentConfig&, int, RunOutput&)>& body,
                        bool seed_flag_set) {
  auto start = std::chrono::steady_clock::now();
  std::string text = read_file(ctx.config_path);
  ExperimentConfig cfg = load_config(text);
  if (seed_flag_set) cfg.seed_root = ctx.seed_override;
  RunOutput out;
  out.dir = ctx.out_override.empty() ? fs::path(cfg.output) : fs::path(ctx.out_override);
  body(cfg, ctx.threads, out);
  std::string canonical = json::parse(text).dump();
  out.commit(canonical);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
  std::fprintf(stderr, "simart: wrote %zu files to %s (wall time %lld ms)\n",
               out.files.size() + 1, out.dir.string().c_str(),
               static_cast<long long>(ms));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seeded experiments on random fractal measures"};
  app.require_subcommand(1);

  CommandContext ctx;
  struct RenderArgs {
    std::string realization_file;
    int level = 0;
    int resolution = 512;
    std::string out_path;
  } render_args;

  using Body = std::function<void(const ExperimentConfig&, int, RunOutput&)>;
  std::vector<std::pair<CLI::App*, Body>> commands;

  auto add_cmd = [&](const char* name, const char* help, Body body) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common_options(cmd, ctx);
    commands.emplace_back(cmd, std::move(body));
  };

  add_cmd("run", "simulate plus every analysis block in the config",
          [](const ExperimentConfig& c, int t, RunOutput& o) { cmd_run(c, t, o); });
  add_cmd("simulate", "sample and persist model realizations",
          [](const ExperimentConfig& c, int t, RunOutput& o) { cmd_simulate(c, t, o); });
  add_cmd("intersect", "intersection mass sequences for every family",
          [](const ExperimentConfig& c, int t, RunOutput& o) { cmd_intersect(c, t, o); });
  add_cmd("project", "line-projection profiles and jump statistics",
          [](const ExperimentConfig& c, int t, RunOutput& o) { cmd_project(c, t, o); });
  add_cmd("dimension", "box or correlation dimension fits",
          [](const ExperimentConfig& c, int t, RunOutput& o) { cmd_dimension(c, t, o); });
  add_cmd("fourier", "dyadic-band spectrum and Fourier dimension estimate",
          [](const ExperimentConfig& c, int t, RunOutput& o) { cmd_fourier(c, t, o); });
  add_cmd("convolve", "convolution grid and sumset interior report",
          [](const ExperimentConfig& c, int, RunOutput& o) { cmd_convolve(c, o); });
  add_cmd("tail-audit", "increment tail frequencies over fresh replicates",
          [](const ExperimentConfig& c, int, RunOutput& o) { cmd_tail_audit(c, o); });

  CLI::App* render = app.add_subcommand("render", "render a persisted realization to 16-bit PGM");
  render->add_option("realization", render_args.realization_file, "serialized realization file")
      ->required()
      ->check(CLI::ExistingFile);
  render->add_option("level", render_args.level, "approximation level to render")->required();
  render->add_option("resolution", render_args.resolution, "cells per axis (power of two)")
      ->required();
  render->add_option("out", render_args.out_path, "output PGM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (render->parsed()) {
      Realization real = Realization::deserialize(read_file(render_args.realization_file));
      if (real.dim() != 2) fail_unsupported("render: requires a d = 2 realization");
      Raster field = rasterize_density(real, render_args.level, render_args.resolution);
      write_pgm16(field, render_args.out_path);
      return 0;
    }
    bool seed_flag_set = false;
    for (auto& [cmd, body] : commands) {
      if (!cmd->parsed()) continue;
      seed_flag_set = cmd->count("--seed-override") > 0;
      run_config_command(ctx, body, seed_flag_set);
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
