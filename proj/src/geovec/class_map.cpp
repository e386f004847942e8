#include "landseg/geovec/class_map.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace landseg::geo {

UnknownClassError::UnknownClassError(std::string source_class)
    : DataError("unknown source class '" + source_class + "'"), source_class_(std::move(source_class)) {}

void ClassMap::validate() const {
  if (entries.empty()) throw UsageError("class map is empty");
  for (const auto& [name, id] : entries) {
    if (!is_valid_class(id)) throw UsageError("class map entry '" + name + "' has invalid id");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

ClassMap parse_class_map(std::string_view text, UnknownPolicy policy) {
  ClassMap map;
  map.unknown_policy = policy;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string_view::npos) {
      throw DataError("class map line " + std::to_string(line_no) + ": expected source_class<TAB>target_id");
    }
    const std::string_view name = trim(line.substr(0, tab));
    const std::string_view id_text = trim(line.substr(tab + 1));
    int id = -1;
    const auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (name.empty() || ec != std::errc() || ptr != id_text.data() + id_text.size() || !is_valid_class(id)) {
      throw DataError("class map line " + std::to_string(line_no) + ": invalid entry");
    }
    map.entries[std::string(name)] = static_cast<ClassId>(id);
  }
  if (map.entries.empty()) throw DataError("class map has no entries");
  return map;
}

ClassMap load_class_map(const std::filesystem::path& path, UnknownPolicy policy) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open class map '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_class_map(buffer.str(), policy);
}

ClassMap default_class_map() {
  ClassMap map;
  map.entries = {
      {"feuillus", 0},
      {"foret_fermee_feuillus", 0},
      {"foret_fermee_coniferes", 0},
      {"foret_fermee_mixte", 0},
      {"foret_ouverte_feuillus", 1},
      {"foret_ouverte_coniferes", 1},
      {"foret_ouverte_mixte", 1},
      {"lande_ligneuse", 2},
      {"formation_herbacee", 3},
      {"batiment", 4},
      {"route", 5},
      {"non_renseigne", kNodata},
  };
  return map;
}

FeatureCollection apply_class_map(const FeatureCollection& features, const ClassMap& map) {
  map.validate();
  FeatureCollection out = features;
  for (auto& f : out) {
    auto it = map.entries.find(f.source_class);
    if (it != map.entries.end()) {
      f.class_id = it->second;
    } else if (map.unknown_policy == UnknownPolicy::nodata) {
      f.class_id = kNodata;
    } else {
      throw UnknownClassError(f.source_class);
    }
  }
  return out;
}

}  // namespace landseg::geo
