#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "landseg/error.hpp"
#include "landseg/geovec/geometry.hpp"

namespace landseg::geo {

enum class UnknownPolicy { error, nodata };

/// Thrown by apply_class_map for an unmapped source class under UnknownPolicy::error.
class UnknownClassError : public DataError {
 public:
  explicit UnknownClassError(std::string source_class);
  const std::string& source_class() const { return source_class_; }

 private:
  std::string source_class_;
};

struct ClassMap {
  std::map<std::string, ClassId> entries;
  UnknownPolicy unknown_policy = UnknownPolicy::error;

  void validate() const;
};

/// Reads `source_class<TAB>target_id` lines; `#` starts a comment.
ClassMap parse_class_map(std::string_view text, UnknownPolicy policy = UnknownPolicy::error);
ClassMap load_class_map(const std::filesystem::path& path, UnknownPolicy policy = UnknownPolicy::error);

/// Illustrative merge table from forest/topographic layer names to the six classes.
ClassMap default_class_map();

/// Returns a copy of `features` with class_id resolved for every feature.
FeatureCollection apply_class_map(const FeatureCollection& features, const ClassMap& map);

}  // namespace landseg::geo
