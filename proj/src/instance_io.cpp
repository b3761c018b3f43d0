#include "dflow/instance_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dflow/errors.hpp"

namespace dflow {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ParseError("unknown field '" + it.key() + "' in " + where);
    }
  }
}

const json& field(const json& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + name + "' in " + where);
  return *it;
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_string()) throw ParseError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

double number_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number()) throw ParseError(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

}  // namespace

Network parse_network(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance must be a JSON object");
  reject_unknown(doc, {"vertices", "edges", "source", "sink", "inflow_rate", "deadline", "meta"},
                 "instance");
  if (doc.contains("meta") && !doc["meta"].is_object()) {
    throw ParseError("field 'meta' must be an object");
  }

  Network net;
  const json& vertices = field(doc, "vertices", "instance");
  if (!vertices.is_array()) throw ParseError("field 'vertices' must be a list");
  for (const json& v : vertices) {
    if (!v.is_string()) throw ParseError("vertex ids must be strings");
    net.vertices.push_back(v.get<std::string>());
  }
  const json& edges = field(doc, "edges", "instance");
  if (!edges.is_array()) throw ParseError("field 'edges' must be a list");
  for (const json& e : edges) {
    if (!e.is_object()) throw ParseError("edges must be objects");
    reject_unknown(e, {"id", "tail", "head", "transit", "capacity", "cost"}, "edge");
    Edge edge;
    edge.id = string_field(e, "id", "edge");
    const std::string where = "edge '" + edge.id + "'";
    edge.tail = string_field(e, "tail", where);
    edge.head = string_field(e, "head", where);
    edge.transit = number_field(e, "transit", where);
    edge.capacity = number_field(e, "capacity", where);
    edge.cost = number_field(e, "cost", where);
    net.edges.push_back(std::move(edge));
  }
  net.source = string_field(doc, "source", "instance");
  net.sink = string_field(doc, "sink", "instance");
  net.inflow_rate = number_field(doc, "inflow_rate", "instance");
  net.deadline = number_field(doc, "deadline", "instance");
  return net;
}

Network read_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

std::string dump_network(const Network& net, const std::string& meta_json) {
  json doc = json::object();
  doc["vertices"] = net.vertices;
  json edges = json::array();
  for (const Edge& e : net.edges) {
    edges.push_back({{"id", e.id},
                     {"tail", e.tail},
                     {"head", e.head},
                     {"transit", e.transit},
                     {"capacity", e.capacity},
                     {"cost", e.cost}});
  }
  doc["edges"] = std::move(edges);
  doc["source"] = net.source;
  doc["sink"] = net.sink;
  doc["inflow_rate"] = net.inflow_rate;
  doc["deadline"] = net.deadline;
  if (!meta_json.empty()) doc["meta"] = json::parse(meta_json);
  return doc.dump(2) + "\n";
}

void write_network(const std::string& path, const Network& net, const std::string& meta_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write instance file '" + path + "'");
  out << dump_network(net, meta_json);
}

}  // namespace dflow
