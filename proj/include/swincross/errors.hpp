#pragma once

#include <stdexcept>

namespace swincross {

// Shape or rank contract violated by an operator's inputs.
class DimensionError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

// Invalid SwinCrossConfig or option value.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

// Malformed, truncated or mismatched file (volumes, checkpoints, manifests).
class FormatError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// NaN/Inf encountered where finite values are required.
class NumericError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Misuse of the autograd graph (non-scalar loss, consumed graph).
class GraphError : public std::logic_error {
   public:
    using std::logic_error::logic_error;
};

}  // namespace swincross
