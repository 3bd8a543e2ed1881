#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "simart/cutout.hpp"
#include "simart/families.hpp"
#include "simart/model.hpp"

namespace testsupport {

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// Fresh directory under the system temp root, unique per call.
inline std::filesystem::path fresh_dir(const std::string& tag) {
  static int counter = 0;
  auto base = std::filesystem::temp_directory_path() /
              ("simart_tests_" + std::to_string(::getpid()) + "_" + tag + "_" +
               std::to_string(counter++));
  std::filesystem::create_directories(base);
  return base;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the installed command line binary through the shell, capturing both
// streams. `env_prefix` may hold variable assignments such as
// "SIMART_CACHE=/tmp/c ".
inline CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
#ifdef SIMART_CLI_PATH
  auto dir = fresh_dir("cli_io");
  std::string out_file = (dir / "out.txt").string();
  std::string err_file = (dir / "err.txt").string();
  std::string command = env_prefix + std::string(SIMART_CLI_PATH) + " " + args + " >" + out_file +
                        " 2>" + err_file;
  int status = std::system(command.c_str());
  CliResult result;
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.out = read_text(out_file);
  result.err = read_text(err_file);
  return result;
#else
  (void)args;
  (void)env_prefix;
  throw std::runtime_error("SIMART_CLI_PATH not configured");
#endif
}

inline std::string config_path(const std::string& name) {
#ifdef SIMART_TESTS_CONFIG_DIR
  return (std::filesystem::path(SIMART_TESTS_CONFIG_DIR) / name).string();
#else
  throw std::runtime_error("SIMART_TESTS_CONFIG_DIR not configured");
#endif
}

inline std::string pins_text() {
#ifdef SIMART_TESTS_PINS
  return read_text(SIMART_TESTS_PINS);
#else
  throw std::runtime_error("SIMART_TESTS_PINS not configured");
#endif
}

// Ball-domain cutout model whose ball atoms give decay exponent alpha.
inline simart::ModelSpec ball_cutout_model(double alpha, int depth, int d = 2) {
  simart::ModelSpec m;
  m.kind = simart::ModelSpec::Kind::cutout;
  m.d = d;
  m.depth = depth;
  m.domain.kind = simart::DomainKind::ball;
  m.domain.d = d;
  simart::IntensityAtom atom;
  atom.kind = simart::ShapeKind::ball;
  atom.weight = alpha / simart::shape_volume(simart::ShapeKind::ball, d, 0);
  if (alpha > 0.0) m.intensity.atoms = {atom};
  return m;
}

inline simart::ModelSpec percolation_model(int d, double p, int depth) {
  simart::ModelSpec m;
  m.kind = simart::ModelSpec::Kind::percolation;
  m.d = d;
  m.p = p;
  m.depth = depth;
  return m;
}

inline simart::ModelSpec salem_model(double alpha0, int depth) {
  simart::ModelSpec m;
  m.kind = simart::ModelSpec::Kind::salem_line;
  m.d = 1;
  m.alpha0 = alpha0;
  m.depth = depth;
  return m;
}

inline simart::FamilySpec line_family(const simart::VecD& point, const simart::VecD& direction,
                                      simart::RegimeTag regime = simart::RegimeTag::limit,
                                      const std::string& id = "line") {
  simart::FamilySpec fam;
  fam.id = id;
  fam.regime = regime;
  fam.param = simart::PlaneParam::line(point, direction);
  return fam;
}

// Middle-thirds construction on [0, 1] with natural weights.
inline simart::IFSParam cantor_ifs() {
  simart::SimilarityMap left, right;
  left.ratio = 1.0 / 3.0;
  left.translate = simart::VecD::make1(0.0);
  right.ratio = 1.0 / 3.0;
  right.translate = simart::VecD::make1(2.0 / 3.0);
  return simart::IFSParam::make_natural(1, {left, right});
}

}  // namespace testsupport
