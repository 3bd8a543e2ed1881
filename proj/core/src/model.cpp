#include "simart/model.hpp"

#include <cmath>

#include <json.hpp>

#include "simart/error.hpp"

namespace simart {

namespace {

using nlohmann::json;

json parse_object(const std::string& text, const char* where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail_validation(std::string(where) + ": parse error: " + e.what());
  }
  require(j.is_object(), std::string(where) + ": expected a JSON object");
  return j;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    require(known, std::string(where) + ": unknown key '" + it.key() + "'");
  }
}

double get_number(const json& obj, const char* key, const char* where) {
  require(obj.contains(key) && obj.at(key).is_number(),
          std::string(where) + ": missing numeric field '" + key + "'");
  return obj.at(key).get<double>();
}

int get_integer(const json& obj, const char* key, const char* where) {
  require(obj.contains(key) && obj.at(key).is_number_integer(),
          std::string(where) + ": missing integer field '" + key + "'");
  return obj.at(key).get<int>();
}

std::string get_string(const json& obj, const char* key, const char* where) {
  require(obj.contains(key) && obj.at(key).is_string(),
          std::string(where) + ": missing string field '" + key + "'");
  return obj.at(key).get<std::string>();
}

VecD vec_from_json(const json& arr, const char* where) {
  require(arr.is_array() && arr.size() >= 1 && arr.size() <= 3,
          std::string(where) + ": expected an array of 1 to 3 numbers");
  VecD v(static_cast<int>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    require(arr.at(i).is_number(), std::string(where) + ": expected numbers");
    v[static_cast<int>(i)] = arr.at(i).get<double>();
  }
  return v;
}

}  // namespace

const char* model_kind_name(ModelSpec::Kind kind) {
  switch (kind) {
    case ModelSpec::Kind::cutout: return "cutout";
    case ModelSpec::Kind::percolation: return "percolation";
    case ModelSpec::Kind::cascade: return "cascade";
    case ModelSpec::Kind::salem_line: return "salem_line";
  }
  return "percolation";
}

ModelSpec::Kind model_kind_from_name(const std::string& name) {
  if (name == "cutout") return ModelSpec::Kind::cutout;
  if (name == "percolation") return ModelSpec::Kind::percolation;
  if (name == "cascade") return ModelSpec::Kind::cascade;
  if (name == "salem_line") return ModelSpec::Kind::salem_line;
  fail_validation("model: unknown kind '" + name + "'");
}

void ModelSpec::validate() const {
  require(d >= 1 && d <= 3, "model: dimension must be 1, 2 or 3");
  require(depth >= 0, "model: depth must be nonnegative");
  switch (kind) {
    case Kind::cutout:
      require(domain.d == d, "model: domain dimension mismatch");
      domain.validate();
      intensity.validate(d);
      require(depth <= 254, "model: cutout depth out of range [0, 254]");
      break;
    case Kind::percolation:
      require(p > 0.0 && p <= 1.0, "model: p must lie in (0, 1]");
      require(depth * d <= 20, "model: need depth * d <= 20");
      break;
    case Kind::cascade:
      law.validate();
      require(depth * d <= 20, "model: need depth * d <= 20");
      break;
    case Kind::salem_line:
      require(d == 1, "model: salem_line requires d = 1");
      require(alpha0 > 0.0 && alpha0 <= 1.0, "model: alpha0 must lie in (0, 1]");
      require(depth <= 59, "model: salem_line depth out of range [0, 59]");
      break;
  }
}

double ModelSpec::alpha() const {
  switch (kind) {
    case Kind::cutout: return alpha_of_intensity(intensity, d);
    case Kind::percolation: return -std::log2(p);
    case Kind::cascade: {
      double surviving = 0.0;
      for (const auto& [value, prob] : law.atoms)
        if (value > 0.0) surviving += prob;
      return -std::log2(surviving);
    }
    case Kind::salem_line: return 1.0 - alpha0;
  }
  return 0.0;
}

double ModelSpec::growth_bound() const {
  switch (kind) {
    case Kind::cutout: return std::exp2(alpha());
    case Kind::percolation: return 1.0 / p;
    case Kind::cascade: return law.bound;
    case Kind::salem_line: return 2.0;
  }
  return 1.0;
}

std::string ModelSpec::to_json() const {
  json j;
  j["kind"] = model_kind_name(kind);
  j["d"] = d;
  j["depth"] = depth;
  switch (kind) {
    case Kind::cutout: {
      json dom;
      dom["kind"] = domain.kind == DomainKind::ball ? "ball" : "snowflake";
      if (domain.kind == DomainKind::snowflake)
        dom["snowflake_depth"] = domain.snowflake_depth;
      j["domain"] = std::move(dom);
      json atoms = json::array();
      for (const auto& a : intensity.atoms)
        atoms.push_back({{"kind", shape_kind_name(a.kind)}, {"weight", a.weight}});
      j["intensity"] = {{"atoms", std::move(atoms)},
                        {"snowflake_depth", intensity.snowflake_depth}};
      break;
    }
    case Kind::percolation:
      j["p"] = p;
      break;
    case Kind::cascade: {
      json atoms = json::array();
      for (const auto& [value, prob] : law.atoms) atoms.push_back({value, prob});
      j["law"] = {{"bound", law.bound}, {"atoms", std::move(atoms)}};
      break;
    }
    case Kind::salem_line:
      j["alpha0"] = alpha0;
      break;
  }
  return j.dump();
}

ModelSpec ModelSpec::from_json(const std::string& text) {
  json j = parse_object(text, "model");
  ModelSpec spec;
  spec.kind = model_kind_from_name(get_string(j, "kind", "model"));
  switch (spec.kind) {
    case Kind::cutout: {
      check_keys(j, {"kind", "d", "depth", "domain", "intensity"}, "model");
      spec.d = get_integer(j, "d", "model");
      spec.depth = get_integer(j, "depth", "model");
      require(j.contains("domain") && j.at("domain").is_object(),
              "model: missing 'domain' object");
      const json& dom = j.at("domain");
      check_keys(dom, {"kind", "snowflake_depth"}, "model.domain");
      std::string dom_kind = get_string(dom, "kind", "model.domain");
      if (dom_kind == "ball") {
        spec.domain.kind = DomainKind::ball;
      } else if (dom_kind == "snowflake") {
        spec.domain.kind = DomainKind::snowflake;
      } else {
        fail_validation("model.domain: unknown kind '" + dom_kind + "'");
      }
      spec.domain.d = spec.d;
      if (dom.contains("snowflake_depth"))
        spec.domain.snowflake_depth = get_integer(dom, "snowflake_depth", "model.domain");
      require(j.contains("intensity") && j.at("intensity").is_object(),
              "model: missing 'intensity' object");
      const json& inten = j.at("intensity");
      check_keys(inten, {"atoms", "snowflake_depth"}, "model.intensity");
      require(inten.contains("atoms") && inten.at("atoms").is_array(),
              "model.intensity: missing 'atoms' array");
      for (const json& a : inten.at("atoms")) {
        require(a.is_object(), "model.intensity: atoms must be objects");
        check_keys(a, {"kind", "weight"}, "model.intensity.atom");
        IntensityAtom atom;
        atom.kind = shape_kind_from_name(get_string(a, "kind", "model.intensity.atom"));
        atom.weight = get_number(a, "weight", "model.intensity.atom");
        spec.intensity.atoms.push_back(atom);
      }
      if (inten.contains("snowflake_depth"))
        spec.intensity.snowflake_depth =
            get_integer(inten, "snowflake_depth", "model.intensity");
      break;
    }
    case Kind::percolation:
      check_keys(j, {"kind", "d", "depth", "p"}, "model");
      spec.d = get_integer(j, "d", "model");
      spec.depth = get_integer(j, "depth", "model");
      spec.p = get_number(j, "p", "model");
      break;
    case Kind::cascade: {
      check_keys(j, {"kind", "d", "depth", "law"}, "model");
      spec.d = get_integer(j, "d", "model");
      spec.depth = get_integer(j, "depth", "model");
      require(j.contains("law") && j.at("law").is_object(), "model: missing 'law' object");
      const json& law = j.at("law");
      check_keys(law, {"bound", "atoms"}, "model.law");
      spec.law.bound = get_number(law, "bound", "model.law");
      require(law.contains("atoms") && law.at("atoms").is_array(),
              "model.law: missing 'atoms' array");
      for (const json& a : law.at("atoms")) {
        require(a.is_array() && a.size() == 2 && a.at(0).is_number() && a.at(1).is_number(),
                "model.law: atoms must be [value, probability] pairs");
        spec.law.atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
      }
      break;
    }
    case Kind::salem_line:
      check_keys(j, {"kind", "d", "depth", "alpha0"}, "model");
      spec.d = j.contains("d") ? get_integer(j, "d", "model") : 1;
      spec.depth = get_integer(j, "depth", "model");
      spec.alpha0 = get_number(j, "alpha0", "model");
      break;
  }
  spec.validate();
  return spec;
}

void FamilySpec::validate() const {
  require(!id.empty(), "family: id must be nonempty");
  if (const PlaneParam* pl = plane()) {
    pl->validate();
  } else if (const CurveParam* cv = curve()) {
    cv->validate();
  } else if (const IFSParam* f = ifs()) {
    f->validate();
  }
}

double FamilySpec::frostman_exponent() const {
  if (const PlaneParam* pl = plane()) return pl->frostman_exponent();
  if (const CurveParam* cv = curve()) return cv->frostman_exponent();
  return ifs()->frostman_exponent();
}

double FamilySpec::frostman_constant() const {
  if (const PlaneParam* pl = plane()) return pl->frostman_constant();
  if (const CurveParam* cv = curve()) return cv->frostman_constant();
  const IFSParam* f = ifs();
  return f->frostman_c > 0.0 ? f->frostman_c : 1.0;
}

const char* FamilySpec::kind_name() const {
  if (plane()) return "plane";
  if (curve()) return "curve";
  return "ifs";
}

FamilySpec FamilySpec::from_json(const std::string& text) {
  json j = parse_object(text, "family");
  FamilySpec fam;
  fam.id = get_string(j, "id", "family");
  std::string kind = get_string(j, "kind", "family");
  if (j.contains("regime")) {
    std::string regime = get_string(j, "regime", "family");
    if (regime == "limit") {
      fam.regime = RegimeTag::limit;
    } else if (regime == "growth") {
      fam.regime = RegimeTag::growth;
    } else {
      fail_validation("family: regime must be 'limit' or 'growth'");
    }
  }

  if (kind == "plane") {
    check_keys(j, {"id", "kind", "regime", "point", "basis"}, "family");
    PlaneParam plane;
    require(j.contains("point"), "family: plane needs 'point'");
    plane.basepoint = vec_from_json(j.at("point"), "family.point");
    require(j.contains("basis") && j.at("basis").is_array(), "family: plane needs 'basis'");
    for (const json& b : j.at("basis")) {
      VecD v = vec_from_json(b, "family.basis");
      require(v.d == plane.basepoint.d, "family: basis dimension mismatch");
      plane.basis.push_back(v);
    }
    plane.validate();
    fam.param = std::move(plane);
  } else if (kind == "curve") {
    check_keys(j, {"id", "kind", "regime", "coeffs", "clip_radius"}, "family");
    CurveParam curve;
    require(j.contains("coeffs") && j.at("coeffs").is_array() &&
                j.at("coeffs").size() <= curve_coeff_count,
            "family: curve needs a 'coeffs' array of at most 15 numbers");
    const json& coeffs = j.at("coeffs");
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      require(coeffs.at(i).is_number(), "family.coeffs: expected numbers");
      curve.coeffs[i] = coeffs.at(i).get<double>();
    }
    if (j.contains("clip_radius")) curve.clip_radius = get_number(j, "clip_radius", "family");
    curve.validate();
    fam.param = curve;
  } else if (kind == "ifs") {
    check_keys(j, {"id", "kind", "regime", "d", "maps", "probs", "frostman_c"}, "family");
    int d = j.contains("d") ? get_integer(j, "d", "family") : 1;
    std::vector<SimilarityMap> maps;
    require(j.contains("maps") && j.at("maps").is_array() && !j.at("maps").empty(),
            "family: ifs needs a nonempty 'maps' array");
    for (const json& m : j.at("maps")) {
      require(m.is_object(), "family.maps: expected objects");
      check_keys(m, {"ratio", "angle_degrees", "translate"}, "family.maps");
      SimilarityMap f;
      f.ratio = get_number(m, "ratio", "family.maps");
      if (m.contains("angle_degrees"))
        f.angle = get_number(m, "angle_degrees", "family.maps") *
                  (3.14159265358979323846 / 180.0);
      require(m.contains("translate"), "family.maps: missing 'translate'");
      f.translate = vec_from_json(m.at("translate"), "family.maps.translate");
      require(f.translate.d == d, "family.maps: translate dimension mismatch");
      maps.push_back(f);
    }
    IFSParam ifs;
    require(j.contains("probs"), "family: ifs needs 'probs' (array or \"natural\")");
    if (j.at("probs").is_string()) {
      require(j.at("probs").get<std::string>() == "natural",
              "family: probs must be an array or \"natural\"");
      ifs = IFSParam::make_natural(d, std::move(maps));
    } else {
      require(j.at("probs").is_array(), "family: probs must be an array or \"natural\"");
      std::vector<double> probs;
      for (const json& p : j.at("probs")) {
        require(p.is_number(), "family.probs: expected numbers");
        probs.push_back(p.get<double>());
      }
      ifs = IFSParam::make(d, std::move(maps), std::move(probs));
    }
    if (j.contains("frostman_c")) {
      ifs.frostman_c = get_number(j, "frostman_c", "family");
      ifs.validate();
    }
    fam.param = std::move(ifs);
  } else {
    fail_validation("family: kind must be 'plane', 'curve' or 'ifs'");
  }
  fam.validate();
  return fam;
}

Realization::Realization(CutoutRealization cutout) : impl_(std::move(cutout)) {}
Realization::Realization(SubdivisionTree tree) : impl_(std::move(tree)) {}

Realization Realization::make(const ModelSpec& spec, const SeedPath& seed,
                              const SampleOptions& options) {
  spec.validate();
  switch (spec.kind) {
    case ModelSpec::Kind::cutout:
      return Realization(
          sample_cutouts(spec.intensity, spec.domain, spec.depth, seed, options));
    case ModelSpec::Kind::percolation:
      return Realization(SubdivisionTree::percolation(spec.d, spec.p, spec.depth, seed));
    case ModelSpec::Kind::cascade:
      return Realization(SubdivisionTree::cascade(spec.d, spec.law, spec.depth, seed));
    case ModelSpec::Kind::salem_line:
      return Realization(SubdivisionTree::salem_line(spec.alpha0, spec.depth, seed));
  }
  fail_validation("model: unknown kind");
}

int Realization::dim() const {
  if (const CutoutRealization* c = cutout()) return c->domain().d;
  if (const SubdivisionTree* t = subdivision()) return t->dim();
  fail_validation("realization: empty");
}

int Realization::depth() const {
  if (const CutoutRealization* c = cutout()) return c->depth();
  if (const SubdivisionTree* t = subdivision()) return t->depth();
  fail_validation("realization: empty");
}

double Realization::alpha() const {
  if (const CutoutRealization* c = cutout()) return c->alpha();
  if (const SubdivisionTree* t = subdivision()) return t->alpha();
  fail_validation("realization: empty");
}

double Realization::growth_bound() const {
  if (const CutoutRealization* c = cutout()) return std::exp2(c->alpha());
  if (const SubdivisionTree* t = subdivision()) return t->growth_bound();
  fail_validation("realization: empty");
}

Box Realization::support_box() const {
  if (const CutoutRealization* c = cutout()) return c->domain().bounding_box();
  if (const SubdivisionTree* t = subdivision()) return Box::unit(t->dim());
  fail_validation("realization: empty");
}

double Realization::density(const VecD& x, int n) const {
  if (const CutoutRealization* c = cutout()) return c->density(x, n);
  if (const SubdivisionTree* t = subdivision()) return t->density(x, n);
  fail_validation("realization: empty");
}

std::unique_ptr<DensityEvaluator> Realization::evaluator(int n) const {
  if (const CutoutRealization* c = cutout()) return c->evaluator(n);
  if (const SubdivisionTree* t = subdivision()) return t->evaluator(n);
  fail_validation("realization: empty");
}

std::string Realization::serialize() const {
  if (const CutoutRealization* c = cutout()) return c->to_json();
  if (const SubdivisionTree* t = subdivision()) return t->serialize();
  fail_validation("realization: empty");
}

Realization Realization::deserialize(const std::string& text) {
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') continue;
    if (ch == '{') return Realization(CutoutRealization::from_json(text));
    if (ch == '#') return Realization(SubdivisionTree::deserialize(text));
    break;
  }
  fail_validation("realization: unrecognized serialized form");
}

}  // namespace simart
