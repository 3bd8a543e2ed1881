#pragma once

#include <memory>
#include <string>
#include <variant>

#include "simart/cutout.hpp"
#include "simart/families.hpp"
#include "simart/subdivision.hpp"

namespace simart {

// Complete description of a random-measure model, as written in experiment
// configs. One realization is drawn per (spec, seed).
struct ModelSpec {
  enum class Kind { cutout, percolation, cascade, salem_line };

  Kind kind = Kind::percolation;
  int d = 2;
  int depth = 8;

  Domain domain;           // cutout
  IntensitySpec intensity; // cutout
  double p = 0.5;          // percolation
  WeightLaw law;           // cascade
  double alpha0 = 1.0;     // salem_line

  void validate() const;
  // Decay exponent of the survival probability: P(density > 0 at x) = 2^-(alpha n).
  double alpha() const;
  // Pointwise growth constant: density_{n+1} <= growth * density_n.
  double growth_bound() const;

  std::string to_json() const;
  static ModelSpec from_json(const std::string& text);
};

const char* model_kind_name(ModelSpec::Kind kind);
ModelSpec::Kind model_kind_from_name(const std::string& name);

// Which regime a family is declared for: "limit" requires the family exponent
// s to exceed the model's alpha so that the intersection masses converge;
// "growth" runs the same computations but reports a growth exponent instead.
enum class RegimeTag { limit, growth };

// One measure family instance from a config, tagged with an id for output
// rows.
struct FamilySpec {
  std::string id;
  RegimeTag regime = RegimeTag::limit;
  std::variant<PlaneParam, CurveParam, IFSParam> param;

  const PlaneParam* plane() const { return std::get_if<PlaneParam>(&param); }
  const CurveParam* curve() const { return std::get_if<CurveParam>(&param); }
  const IFSParam* ifs() const { return std::get_if<IFSParam>(&param); }

  void validate() const;
  double frostman_exponent() const;
  double frostman_constant() const;
  const char* kind_name() const;

  static FamilySpec from_json(const std::string& text);
};

// A sampled model: cutout realization or subdivision tree behind one query
// interface.
class Realization {
 public:
  Realization() = default;
  explicit Realization(CutoutRealization cutout);
  explicit Realization(SubdivisionTree tree);

  static Realization make(const ModelSpec& spec, const SeedPath& seed,
                          const SampleOptions& options = {});

  const CutoutRealization* cutout() const { return std::get_if<CutoutRealization>(&impl_); }
  const SubdivisionTree* subdivision() const { return std::get_if<SubdivisionTree>(&impl_); }
  bool empty() const { return std::holds_alternative<std::monostate>(impl_); }

  int dim() const;
  int depth() const;
  double alpha() const;
  double growth_bound() const;
  Box support_box() const;
  double density(const VecD& x, int n) const;
  std::unique_ptr<DensityEvaluator> evaluator(int n) const;

  // Cutout realizations persist as JSON, subdivision trees as their record
  // text; deserialize sniffs the leading byte.
  std::string serialize() const;
  static Realization deserialize(const std::string& text);

 private:
  std::variant<std::monostate, CutoutRealization, SubdivisionTree> impl_;
};

}  // namespace simart
