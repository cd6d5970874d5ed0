#pragma once

#include <stdexcept>
#include <string>

namespace focal {

// Error taxonomy shared across modules. Each maps to a CLI exit code in
// tools/focal_main.cpp: input problems (format/parameter/data) exit 2,
// run-time aborts (state/training) exit 3.

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// aggregation across runs with mismatched step grids (CLI exit 4)
struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace focal
