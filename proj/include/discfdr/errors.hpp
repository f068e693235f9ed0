#pragma once

#include <stdexcept>
#include <string>

namespace discfdr {

// Malformed or out-of-range data: bad count rows, impossible table cells.
class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid run parameters: bad tuning values, unknown tags, inconsistent scenarios.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace discfdr
