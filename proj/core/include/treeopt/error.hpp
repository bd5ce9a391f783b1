#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treeopt {

/// Classes of failure surfaced by the library. Loader codes are distinct per
/// malformed-document class so callers (and golden tests) can tell them apart.
enum class ErrorCode {
  kStructure = 1,        // malformed tree: missing child, cycle, shared node
  kDomain,               // input value outside a variable's domain
  kSchema,               // schema invariant broken (unsorted split points, K_i)
  kEncoding,             // bit vector violates ladder / one-hot structure
  kConfiguration,        // inconsistent options
  kEnumerationCap,       // brute-force cell count above the cap
  kParse,                // not JSON / not parseable text
  kSchemaVersion,        // unknown schema_version
  kMissingField,         // required member absent or of the wrong JSON type
  kBadVariableKind,      // kind is neither numeric nor categorical
  kNonFinite,            // NaN / inf threshold, weight or leaf value
  kUnknownVariable,      // node references a variable index out of range
  kThresholdNotInSchema, // threshold missing from the variable's split_points
  kBadLevelSet,          // empty, full, duplicated or out-of-range level set
  kBadNodeReference,     // child id that does not exist / duplicate node id
  kNoTrees,              // ensemble with zero trees
  kInternal,             // solver invariant broken
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace treeopt
