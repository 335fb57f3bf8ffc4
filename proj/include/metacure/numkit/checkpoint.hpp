#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "metacure/numkit/params.hpp"

namespace metacure::numkit {

// Binary checkpoint: a version header followed by flat
// (name, shape, little-endian float64 payload) records. Group prefixes are
// prepended to the entry names, so one file can hold several stores.
// Round-trips are bit-exact.

using StoreGroup = std::vector<std::pair<std::string, const ParamStore*>>;
using MutableStoreGroup = std::vector<std::pair<std::string, ParamStore*>>;

void save_checkpoint(const std::filesystem::path& path, const StoreGroup& groups);

// Every record in the file must match an existing entry (same name under the
// group prefix, same shape); values are overwritten, optimizer state is not
// touched. Missing or extra entries are errors.
void load_checkpoint(const std::filesystem::path& path, const MutableStoreGroup& groups);

}  // namespace metacure::numkit
