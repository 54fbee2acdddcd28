#pragma once

#include <stdexcept>
#include <string>

namespace emcopp {

// Bad experiment/scenario configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or insufficient archive data (CLI exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace emcopp
