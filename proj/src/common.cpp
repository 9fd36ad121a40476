#include "pdts/common.hpp"

namespace pdts {

std::string ProcessRef::str() const {
  if (is_client()) return "C" + std::to_string(index + 1);
  return "N" + std::to_string(*node + 1) + ".p" + std::to_string(index);
}

void to_json(json& j, const ProcessRef& p) {
  if (p.is_client()) {
    j = json{{"kind", "client"}, {"node", nullptr}, {"idx", p.index}};
  } else {
    j = json{{"kind", "node"}, {"node", *p.node}, {"idx", p.index}};
  }
}

void from_json(const json& j, ProcessRef& p) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "client") {
    p = ProcessRef::client(j.at("idx").get<int>());
  } else if (kind == "node") {
    p = ProcessRef::node_process(j.at("node").get<int>(), j.at("idx").get<int>());
  } else {
    throw ConfigError("unknown process kind '" + kind + "'");
  }
}

}  // namespace pdts
