#pragma once

#include <string>

#include "alphadrop/network.hpp"

namespace alphadrop {

// Versioned text checkpoint: run alpha, layer dims, variant and activation
// tags, theta, bias, log a. Doubles are written in shortest round-trip form;
// load(save(net)) reproduces the network exactly.
void save_checkpoint(const std::string& path, const Network& net, double alpha);

struct Checkpoint {
    Network net;
    double alpha = 0.0;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace alphadrop
