#pragma once

#include <stdexcept>
#include <string>

namespace plcurate {

// Base class for every typed failure in the library. Commands catch this to
// turn per-entry failures into error-report rows instead of aborting a batch.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace plcurate
