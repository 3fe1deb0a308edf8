#pragma once

#include <string>

#include "dqm/network.hpp"

namespace dqm {

/// Loads a feeder file (.csv or .json; see README for the schema), validates
/// it, and converts all quantities to per-unit. Errors name the offending
/// record.
NetworkModel load_network(const std::string& path);

}  // namespace dqm
