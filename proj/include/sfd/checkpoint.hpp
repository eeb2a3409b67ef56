#pragma once

#include <string>

#include "sfd/train.hpp"

namespace sfd {

// Canonical JSON checkpoint: fixed key order, floats at 17 significant
// digits, so save -> load -> save is byte-identical.
void save_bundle(const ModelBundle& bundle, const std::string& path);

// Exact inverse of save_bundle; re-validates every invariant and throws
// VersionMismatch / SchemaViolation on bad files.
ModelBundle load_bundle(const std::string& path);

}  // namespace sfd
