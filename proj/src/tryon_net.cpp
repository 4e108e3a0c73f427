// SPDX-License-Identifier: Apache-2.0
#include "tryonlab/tryon_net.hpp"

namespace tryonlab {

void validate_config(const TryonConfig& cfg) {
    if (cfg.in_channels < 1)
        raise(ErrorCode::ConfigInvalid, "in_channels must be positive",
              std::to_string(cfg.in_channels));
    if (cfg.base_width < 8)
        raise(ErrorCode::ConfigInvalid, "base_width must be at least 8",
              std::to_string(cfg.base_width));
    if (cfg.depth < 2)
        raise(ErrorCode::ConfigInvalid, "depth must be at least 2",
              std::to_string(cfg.depth));
}

} // namespace tryonlab
