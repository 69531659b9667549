#pragma once

#include <stdexcept>
#include <string>

namespace epr {

// Base class for everything this library throws on purpose.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parameter_error : error {
    using error::error;
};
struct mode_error : error {
    using error::error;
};
struct input_error : error {
    using error::error;
};
struct normalization_error : error {
    using error::error;
};
struct fit_error : error {
    using error::error;
};
struct insufficient_data_error : error {
    using error::error;
};
struct simulation_error : error {
    using error::error;
};
struct size_error : error {
    using error::error;
};
struct ordering_error : error {
    ordering_error(const std::string& what, std::size_t index)
        : error(what), offending_index(index) {}
    std::size_t offending_index;
};
struct resolution_error : error {
    using error::error;
};

} // namespace epr
