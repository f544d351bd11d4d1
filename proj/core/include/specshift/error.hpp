#pragma once

#include <stdexcept>
#include <string>

namespace specshift {

// Single exception type for every recoverable failure in the library.
// Messages are meant to be shown to the user as-is.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace specshift
