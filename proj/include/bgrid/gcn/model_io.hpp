#pragma once

#include "bgrid/gcn/model.hpp"

#include <string>

namespace bgrid::gcn {

// Versioned binary container with named tensors, explicit shapes, feature
// stats and training metadata. Round-trips bit-exactly.
void save_model(const GcnModel& model, const std::string& path);
GcnModel load_model(const std::string& path);

}  // namespace bgrid::gcn
