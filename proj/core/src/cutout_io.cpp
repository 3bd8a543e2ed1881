#include <json.hpp>

#include "simart/cutout.hpp"

namespace simart {

namespace {

using nlohmann::json;

json seed_to_json(const SeedPath& seed) {
  json j;
  j["root"] = seed.root;
  j["path"] = seed.path;
  return j;
}

SeedPath seed_from_json(const json& j) {
  SeedPath seed;
  seed.root = j.at("root").get<std::uint64_t>();
  if (j.contains("path")) seed.path = j.at("path").get<std::vector<std::uint64_t>>();
  return seed;
}

}  // namespace

std::string CutoutRealization::to_json() const {
  json model;
  model["domain"] = domain_.kind == DomainKind::ball ? "ball" : "snowflake";
  model["d"] = domain_.d;
  model["domain_snowflake_depth"] = domain_.snowflake_depth;
  model["snowflake_depth"] = spec_snowflake_depth_;
  json atoms = json::array();
  for (const auto& a : intensity_.atoms) {
    atoms.push_back({{"kind", shape_kind_name(a.kind)}, {"weight", a.weight}});
  }
  model["atoms"] = std::move(atoms);

  json root;
  root["model"] = std::move(model);
  root["seed"] = seed_to_json(seed_);
  root["depth"] = depth_;
  root["alpha"] = alpha_;
  root["shrink"] = shrink_;
  root["band_counts"] = band_counts_;
  json cuts = json::array();
  for (const auto& cut : cutouts_) {
    json row = json::array();
    for (int i = 0; i < domain_.d; ++i) row.push_back(cut.c[i]);
    row.push_back(cut.s);
    row.push_back(static_cast<int>(cut.kind));
    row.push_back(cut.rot);
    cuts.push_back(std::move(row));
  }
  root["cutouts"] = std::move(cuts);
  return root.dump();
}

CutoutRealization CutoutRealization::from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail_validation(std::string("cutout json: parse error: ") + e.what());
  }

  CutoutRealization real;
  try {
    const json& model = root.at("model");
    std::string dom = model.at("domain").get<std::string>();
    if (dom == "ball") {
      real.domain_.kind = DomainKind::ball;
    } else if (dom == "snowflake") {
      real.domain_.kind = DomainKind::snowflake;
    } else {
      fail_validation("cutout json: unknown domain kind " + dom);
    }
    real.domain_.d = model.at("d").get<int>();
    if (model.contains("domain_snowflake_depth")) {
      real.domain_.snowflake_depth = model.at("domain_snowflake_depth").get<int>();
    }
    real.spec_snowflake_depth_ = model.at("snowflake_depth").get<int>();
    real.intensity_.snowflake_depth = real.spec_snowflake_depth_;
    for (const auto& a : model.at("atoms")) {
      IntensityAtom atom;
      atom.kind = shape_kind_from_name(a.at("kind").get<std::string>());
      atom.weight = a.at("weight").get<double>();
      real.intensity_.atoms.push_back(atom);
    }
    real.domain_.validate();
    real.intensity_.validate(real.domain_.d);

    real.seed_ = seed_from_json(root.at("seed"));
    real.depth_ = root.at("depth").get<int>();
    require(real.depth_ >= 0 && real.depth_ <= 254, "cutout json: depth out of range");
    real.alpha_ = root.at("alpha").get<double>();
    real.shrink_ = root.at("shrink").get<double>();
    require(real.shrink_ > 0.0 && real.shrink_ <= 1.0, "cutout json: shrink out of range");
    real.band_counts_ = root.at("band_counts").get<std::vector<std::uint64_t>>();
    require(real.band_counts_.size() == static_cast<std::size_t>(real.depth_),
            "cutout json: band_counts length must equal depth");

    int d = real.domain_.d;
    for (const auto& row : root.at("cutouts")) {
      require(row.is_array() && row.size() == static_cast<std::size_t>(d) + 3,
              "cutout json: bad cutout row");
      Cutout cut;
      for (int i = 0; i < d; ++i) cut.c[i] = row.at(static_cast<std::size_t>(i)).get<double>();
      cut.s = row.at(static_cast<std::size_t>(d)).get<double>();
      int kind = row.at(static_cast<std::size_t>(d) + 1).get<int>();
      require(kind >= 0 && kind <= 2, "cutout json: bad shape kind");
      cut.kind = static_cast<ShapeKind>(kind);
      cut.rot = row.at(static_cast<std::size_t>(d) + 2).get<double>();
      require(cut.s > 0.0 && cut.s < 1.0, "cutout json: scale out of range");
      real.cutouts_.push_back(cut);
    }
  } catch (const json::exception& e) {
    fail_validation(std::string("cutout json: missing or mistyped field: ") + e.what());
  }
  return real;
}

}  // namespace simart
