// SPDX-License-Identifier: Apache-2.0
#include "tryonlab/nn.hpp"

namespace tryonlab {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::gelu: return "gelu";
        case Activation::swish: return "swish";
        case Activation::sine: return "sine";
    }
    raise(ErrorCode::UnknownActivation, "bad activation enum value");
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "gelu") return Activation::gelu;
    if (name == "swish") return Activation::swish;
    if (name == "sine") return Activation::sine;
    raise(ErrorCode::UnknownActivation, "unknown activation", name);
}

} // namespace tryonlab
