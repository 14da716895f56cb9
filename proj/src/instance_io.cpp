#include "reuse/instance_io.hpp"

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace reuse {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ParseError(where + ": unknown field '" + key + "'");
  }
  for (const auto& key : allowed) {
    if (!obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  }
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<int>();
}

UsageDistribution parse_dist(const json& d, const std::string& where) {
  if (!d.is_object() || !d.contains("type") || !d["type"].is_string()) {
    throw ParseError(where + ": expected an object with a string 'type'");
  }
  const auto type = d["type"].get<std::string>();
  if (type == "geometric") {
    only_keys(d, {"type", "p"}, where);
    return UsageDistribution::geometric(number(d["p"], where + ".p"));
  }
  if (type == "finite") {
    only_keys(d, {"type", "pmf"}, where);
    if (!d["pmf"].is_array()) throw ParseError(where + ".pmf: expected an array");
    std::vector<DurationMass> pmf;
    for (std::size_t k = 0; k < d["pmf"].size(); ++k) {
      const auto& e = d["pmf"][k];
      const std::string at = where + ".pmf[" + std::to_string(k) + "]";
      if (!e.is_array() || e.size() != 2) throw ParseError(at + ": expected [duration, prob]");
      pmf.push_back({integer(e[0], at), number(e[1], at)});
    }
    return UsageDistribution::finite(std::move(pmf));
  }
  throw ParseError(where + ": unknown distribution type '" + type + "'");
}

}  // namespace

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " +
                     e.what());
  }
  only_keys(doc, {"version", "T", "resources", "arrivals"}, "instance");
  const int version = integer(doc["version"], "version");
  if (version != kInstanceFileVersion) {
    throw ParseError("unsupported version " + std::to_string(version) + " (expected 1)");
  }
  const int horizon = integer(doc["T"], "T");
  if (!doc["resources"].is_array()) throw ParseError("resources: expected an array");
  if (!doc["arrivals"].is_array()) throw ParseError("arrivals: expected an array");
  if (static_cast<int>(doc["arrivals"].size()) != horizon) {
    throw ParseError("arrivals: expected " + std::to_string(horizon) + " entries, found " +
                     std::to_string(doc["arrivals"].size()));
  }

  Instance inst;
  for (std::size_t i = 0; i < doc["resources"].size(); ++i) {
    const auto& r = doc["resources"][i];
    const std::string where = "resources[" + std::to_string(i) + "]";
    only_keys(r, {"reward", "dist"}, where);
    inst.resources.push_back({number(r["reward"], where + ".reward"),
                              parse_dist(r["dist"], where + ".dist")});
  }
  for (std::size_t t = 0; t < doc["arrivals"].size(); ++t) {
    const auto& a = doc["arrivals"][t];
    const std::string where = "arrivals[" + std::to_string(t) + "]";
    if (!a.is_array()) throw ParseError(where + ": expected an array");
    std::vector<int> set;
    for (const auto& idx : a) set.push_back(integer(idx, where));
    inst.arrivals.push_back(std::move(set));
  }
  inst.original_index.resize(inst.resources.size());
  std::iota(inst.original_index.begin(), inst.original_index.end(), 0);
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string instance_to_json(const Instance& instance) {
  json doc;
  doc["version"] = kInstanceFileVersion;
  doc["T"] = instance.horizon();
  json resources = json::array();
  for (const auto& r : instance.resources) {
    json dist;
    if (r.dist.is_geometric()) {
      dist = {{"type", "geometric"}, {"p", r.dist.as_geometric().p}};
    } else {
      json pmf = json::array();
      for (const auto& m : r.dist.as_finite().pmf) pmf.push_back({m.duration, m.prob});
      dist = {{"type", "finite"}, {"pmf", pmf}};
    }
    resources.push_back({{"reward", r.reward}, {"dist", dist}});
  }
  doc["resources"] = resources;
  doc["arrivals"] = instance.arrivals;
  return doc.dump(2) + '\n';
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << instance_to_json(instance);
}

}  // namespace reuse
