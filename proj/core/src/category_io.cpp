#include "flowcat/category_io.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "flowcat/errors.hpp"

namespace flowcat::io {

using json = nlohmann::ordered_json;

comparison::ComparisonData CategoryDocument::comparison_data() const {
  if (!comparison) throw ParseError("file carries no comparison block");
  comparison::ComparisonData d;
  d.source = category;
  d.target = comparison->target;
  d.mixed0 = comparison->mixed0;
  d.mixed1 = comparison->mixed1;
  d.has_mixed1 = comparison->has_mixed1;
  return d;
}

namespace {

json objects_json(const FlowCategory& f) {
  std::vector<FlowObject> objs = f.objects;
  std::sort(objs.begin(), objs.end(), [](const FlowObject& a, const FlowObject& b) {
    if (a.index != b.index) return a.index < b.index;
    return a.id < b.id;
  });
  json arr = json::array();
  for (const auto& o : objs) {
    json j;
    j["id"] = o.id;
    j["index"] = o.index;
    if (!o.label.empty()) j["label"] = o.label;
    arr.push_back(j);
  }
  return arr;
}

json moduli0_json(const FlowCategory& f) {
  std::vector<ModuliZero> tables = f.moduli0;
  std::sort(tables.begin(), tables.end(), [](const ModuliZero& a, const ModuliZero& b) {
    if (a.from != b.from) return a.from < b.from;
    return a.to < b.to;
  });
  json arr = json::array();
  for (const auto& m : tables) {
    json j;
    j["from"] = m.from;
    j["to"] = m.to;
    j["signs"] = m.signs;
    arr.push_back(j);
  }
  return arr;
}

json moduli1_json(const FlowCategory& f) {
  std::vector<ModuliOne> tables = f.moduli1;
  std::sort(tables.begin(), tables.end(), [](const ModuliOne& a, const ModuliOne& b) {
    if (a.from != b.from) return a.from < b.from;
    return a.to < b.to;
  });
  json arr = json::array();
  for (const auto& m : tables) {
    json j;
    j["from"] = m.from;
    j["to"] = m.to;
    json comps = json::array();
    for (const auto& c : m.components) {
      if (const Interval* iv = std::get_if<Interval>(&c)) {
        json e0{{"mid", iv->end0.mid}, {"p", iv->end0.p}, {"q", iv->end0.q}};
        json e1{{"mid", iv->end1.mid}, {"p", iv->end1.p}, {"q", iv->end1.q}};
        comps.push_back(json{{"type", "interval"}, {"ends", json::array({e0, e1})}});
      } else {
        comps.push_back(json{{"type", "circle"}});
      }
    }
    j["components"] = comps;
    arr.push_back(j);
  }
  return arr;
}

json category_json(const FlowCategory& f) {
  json j;
  j["mod2"] = f.mod2;
  j["objects"] = objects_json(f);
  j["moduli0"] = moduli0_json(f);
  if (f.has_moduli1) j["moduli1"] = moduli1_json(f);
  return j;
}

FlowCategory category_from_json(const json& j) {
  FlowCategory f;
  f.mod2 = j.value("mod2", false);
  if (!j.contains("objects") || !j["objects"].is_array())
    throw ParseError("missing objects array");
  for (const auto& o : j["objects"]) {
    FlowObject obj;
    obj.id = o.at("id").get<std::string>();
    obj.index = o.at("index").get<int>();
    obj.label = o.value("label", std::string{});
    f.objects.push_back(std::move(obj));
  }
  for (const auto& m : j.value("moduli0", json::array())) {
    ModuliZero mz;
    mz.from = m.at("from").get<std::string>();
    mz.to = m.at("to").get<std::string>();
    for (const auto& s : m.at("signs")) mz.signs.push_back(s.get<int>());
    f.moduli0.push_back(std::move(mz));
  }
  if (j.contains("moduli1")) {
    f.has_moduli1 = true;
    for (const auto& m : j["moduli1"]) {
      ModuliOne mo;
      mo.from = m.at("from").get<std::string>();
      mo.to = m.at("to").get<std::string>();
      for (const auto& c : m.value("components", json::array())) {
        std::string type = c.at("type").get<std::string>();
        if (type == "interval") {
          const auto& ends = c.at("ends");
          if (ends.size() != 2) throw ParseError("interval needs exactly two ends");
          Interval iv;
          iv.end0 = {ends[0].at("mid").get<std::string>(), ends[0].at("p").get<int>(),
                     ends[0].at("q").get<int>()};
          iv.end1 = {ends[1].at("mid").get<std::string>(), ends[1].at("p").get<int>(),
                     ends[1].at("q").get<int>()};
          mo.components.emplace_back(iv);
        } else if (type == "circle") {
          mo.components.emplace_back(Circle{});
        } else {
          throw ParseError("unknown component type '" + type + "'");
        }
      }
      f.moduli1.push_back(std::move(mo));
    }
  }
  return f;
}

json mixed0_json(const std::vector<comparison::MixedModuliZero>& mixed) {
  auto sorted = mixed;
  std::sort(sorted.begin(), sorted.end(),
            [](const comparison::MixedModuliZero& a, const comparison::MixedModuliZero& b) {
              if (a.source != b.source) return a.source < b.source;
              return a.target < b.target;
            });
  json arr = json::array();
  for (const auto& m : sorted)
    arr.push_back(json{{"from", m.source}, {"to", m.target}, {"signs", m.signs}});
  return arr;
}

json mixed1_json(const std::vector<comparison::MixedModuliOne>& mixed) {
  auto sorted = mixed;
  std::sort(sorted.begin(), sorted.end(),
            [](const comparison::MixedModuliOne& a, const comparison::MixedModuliOne& b) {
              if (a.source != b.source) return a.source < b.source;
              return a.target < b.target;
            });
  auto end_json = [](const comparison::MixedEnd& e) {
    return json{{"break", e.kind == comparison::MixedEnd::Kind::SourceBreak ? "source" : "target"},
                {"mid", e.mid},
                {"flow", e.flow_pt},
                {"mixed", e.mixed_pt}};
  };
  json arr = json::array();
  for (const auto& m : sorted) {
    json comps = json::array();
    for (const auto& c : m.components) {
      if (const auto* iv = std::get_if<comparison::MixedInterval>(&c))
        comps.push_back(json{{"type", "interval"},
                             {"ends", json::array({end_json(iv->end0), end_json(iv->end1)})}});
      else
        comps.push_back(json{{"type", "circle"}});
    }
    arr.push_back(json{{"from", m.source}, {"to", m.target}, {"components", comps}});
  }
  return arr;
}

comparison::MixedEnd end_from_json(const json& j) {
  comparison::MixedEnd e;
  std::string kind = j.at("break").get<std::string>();
  if (kind == "source")
    e.kind = comparison::MixedEnd::Kind::SourceBreak;
  else if (kind == "target")
    e.kind = comparison::MixedEnd::Kind::TargetBreak;
  else
    throw ParseError("unknown break kind '" + kind + "'");
  e.mid = j.at("mid").get<std::string>();
  e.flow_pt = j.at("flow").get<int>();
  e.mixed_pt = j.at("mixed").get<int>();
  return e;
}

}  // namespace

std::string format(const CategoryDocument& doc) {
  json root;
  root["format"] = "flowcat-category/1";
  json meta;
  meta["producer"] = doc.meta.producer;
  meta["seed"] = doc.meta.seed;
  meta["sign_convention"] = doc.meta.sign_convention;
  json tol;
  for (const auto& [k, v] : doc.meta.tolerances) tol[k] = v;
  meta["tolerances"] = tol;
  root["metadata"] = meta;

  json cat = category_json(doc.category);
  root["mod2"] = cat["mod2"];
  root["objects"] = cat["objects"];
  root["moduli0"] = cat["moduli0"];
  if (cat.contains("moduli1")) root["moduli1"] = cat["moduli1"];

  if (doc.comparison) {
    json cmp;
    cmp["target"] = category_json(doc.comparison->target);
    cmp["mixed0"] = mixed0_json(doc.comparison->mixed0);
    if (doc.comparison->has_mixed1) cmp["mixed1"] = mixed1_json(doc.comparison->mixed1);
    root["comparison"] = cmp;
  }
  return root.dump(2) + "\n";
}

CategoryDocument parse(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (root.value("format", std::string{}) != "flowcat-category/1")
      throw ParseError("unknown or missing format tag");
    CategoryDocument doc;
    doc.category = category_from_json(root);
    if (root.contains("metadata")) {
      const auto& m = root["metadata"];
      doc.meta.producer = m.value("producer", std::string{});
      doc.meta.sign_convention = m.value("sign_convention", std::string{});
      doc.meta.seed = m.value("seed", 0u);
      const json tol = m.value("tolerances", json::object());
      for (const auto& [k, v] : tol.items()) doc.meta.tolerances[k] = v.get<double>();
    }
    if (root.contains("comparison")) {
      ComparisonPayload payload;
      const auto& cmp = root["comparison"];
      payload.target = category_from_json(cmp.at("target"));
      for (const auto& m : cmp.value("mixed0", json::array())) {
        comparison::MixedModuliZero mz;
        mz.source = m.at("from").get<std::string>();
        mz.target = m.at("to").get<std::string>();
        for (const auto& s : m.at("signs")) mz.signs.push_back(s.get<int>());
        payload.mixed0.push_back(std::move(mz));
      }
      if (cmp.contains("mixed1")) {
        payload.has_mixed1 = true;
        for (const auto& m : cmp["mixed1"]) {
          comparison::MixedModuliOne mo;
          mo.source = m.at("from").get<std::string>();
          mo.target = m.at("to").get<std::string>();
          for (const auto& c : m.value("components", json::array())) {
            std::string type = c.at("type").get<std::string>();
            if (type == "interval") {
              comparison::MixedInterval iv;
              iv.end0 = end_from_json(c.at("ends").at(0));
              iv.end1 = end_from_json(c.at("ends").at(1));
              mo.components.emplace_back(iv);
            } else if (type == "circle") {
              mo.components.emplace_back(comparison::MixedCircle{});
            } else {
              throw ParseError("unknown component type '" + type + "'");
            }
          }
          payload.mixed1.push_back(std::move(mo));
        }
      }
      doc.comparison = std::move(payload);
    }
    return doc;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(e.what());
  }
}

CategoryDocument load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

void save_file(const CategoryDocument& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << format(doc);
}

}  // namespace flowcat::io
