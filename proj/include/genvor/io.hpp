#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "genvor/families.hpp"
#include "genvor/search.hpp"

namespace genvor {

// Malformed instance, batch or artifact input (CLI exit 2).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A site the family refuses, e.g. a body that is not fat (CLI exit 3).
class SiteRejected : public std::runtime_error {
 public:
  SiteRejected(int site, const std::string& what) : std::runtime_error(what), site_(site) {}
  int site() const { return site_; }

 private:
  int site_;
};

enum class FamilyKind { MultOffset, Scaling2D, NearestFurthest };

std::string family_tag(FamilyKind k);
std::optional<FamilyKind> family_from_tag(const std::string& tag);

struct BodySpec {
  Point center;
  std::vector<Point> polygon;
};

struct Instance {
  FamilyKind family = FamilyKind::MultOffset;
  int dim = 2;
  double epsilon = 0.5;
  uint64_t seed = 0;
  std::vector<MultOffsetSite> weighted;    // mult_offset
  std::vector<BodySpec> bodies;            // scaling2d
  std::vector<std::vector<Point>> sets;    // nearest_furthest

  int size() const;
};

// Schema: {family, dim, epsilon, seed, sites}. Ellipse sites become 64-gons here.
Instance parse_instance(const nlohmann::json& j);
Instance load_instance(const std::string& path);
nlohmann::json instance_to_json(const Instance& inst);

// y = scale * x + shift, one scale for every axis.
struct Similarity {
  double scale = 1;
  Point shift;

  Point apply(const Point& x) const;
  Point invert(const Point& y) const;
};

// Maps the bounding box of all site coordinates into [1/4, 3/4]^d, centered at 1/2.
Similarity fit_similarity(const Instance& inst);
Instance transform_instance(const Instance& inst, const Similarity& s);
// A value computed on the normalized instance, expressed in input units.
double denormalize_value(FamilyKind k, const Similarity& s, double v);

std::unique_ptr<DistanceFamily> make_family(const Instance& inst);

std::vector<Point> parse_query_batch(const nlohmann::json& j, int dim);

constexpr uint32_t kArtifactVersion = 1;

struct Artifact {
  Instance instance;  // normalized
  Similarity transform;
  SearchTree tree;
  Avd avd;
  std::unique_ptr<DistanceFamily> family;

  static Artifact build(const Instance& input, const BuildHooks& hooks = {});
  std::vector<uint8_t> serialize() const;
  static Artifact deserialize(const std::vector<uint8_t>& bytes);
};

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace genvor
