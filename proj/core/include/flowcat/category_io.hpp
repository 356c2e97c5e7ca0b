#pragma once

#include <map>
#include <optional>
#include <string>

#include "flowcat/comparison.hpp"
#include "flowcat/flow_category.hpp"

namespace flowcat::io {

struct Metadata {
  std::string producer;
  std::string sign_convention;
  std::map<std::string, double> tolerances;
  unsigned seed = 0;
};

struct ComparisonPayload {
  FlowCategory target;
  std::vector<comparison::MixedModuliZero> mixed0;
  std::vector<comparison::MixedModuliOne> mixed1;
  bool has_mixed1 = false;
};

// One category file: the category, an optional comparison block (second
// category plus mixed moduli), and producer metadata.
struct CategoryDocument {
  FlowCategory category;
  std::optional<ComparisonPayload> comparison;
  Metadata meta;

  comparison::ComparisonData comparison_data() const;  // ParseError when absent
};

// Canonical serialization: fixed key order, objects sorted by (index, id),
// moduli tables sorted by (from, to).  format(parse(format(d))) == format(d).
std::string format(const CategoryDocument& doc);
CategoryDocument parse(const std::string& text);  // ParseError on bad input

CategoryDocument load_file(const std::string& path);
void save_file(const CategoryDocument& doc, const std::string& path);

}  // namespace flowcat::io
