#pragma once

#include <stdexcept>
#include <string>

namespace scaleseg {

// File-system / format failures. The CLI maps these to exit code 2;
// everything else derived from std::exception maps to exit code 1.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scaleseg
