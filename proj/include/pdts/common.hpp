#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace pdts {

using json = nlohmann::json;

/// Contents of a base object. Item values are strings, sequence numbers are
/// integers and ⊥ / None are JSON null.
using Word = json;

using NodeId = int;
using ItemId = std::string;
using TxnId = std::string;

/// Root of every error the library reports. `code()` is a stable short tag
/// (e.g. "ScheduleStuck") used by the CLI and the Python bindings.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define PDTS_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  }

PDTS_DEFINE_ERROR(ScheduleStuck);
PDTS_DEFINE_ERROR(PlacementError);
PDTS_DEFINE_ERROR(AlreadyCrashed);
PDTS_DEFINE_ERROR(CrossNodeAccess);
PDTS_DEFINE_ERROR(OrphanStep);
PDTS_DEFINE_ERROR(Undecided);
PDTS_DEFINE_ERROR(MalformedResponse);
PDTS_DEFINE_ERROR(TooLarge);
PDTS_DEFINE_ERROR(BudgetExceeded);
PDTS_DEFINE_ERROR(ConfigError);
PDTS_DEFINE_ERROR(ScheduleIncompatible);

#undef PDTS_DEFINE_ERROR

enum class ProcessKind { Client, NodeProcess };

/// A client (`node` empty) or the `index`-th process of a node.
struct ProcessRef {
  ProcessKind kind = ProcessKind::Client;
  std::optional<NodeId> node;
  int index = 0;

  static ProcessRef client(int idx) { return {ProcessKind::Client, std::nullopt, idx}; }
  static ProcessRef node_process(NodeId n, int idx) { return {ProcessKind::NodeProcess, n, idx}; }

  bool is_client() const { return kind == ProcessKind::Client; }
  auto operator<=>(const ProcessRef&) const = default;
  std::string str() const;
};

void to_json(json& j, const ProcessRef& p);
void from_json(const json& j, ProcessRef& p);

}  // namespace pdts
