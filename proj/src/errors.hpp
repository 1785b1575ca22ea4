#pragma once

#include <stdexcept>
#include <string>

namespace maskforge {

// Error taxonomy shared by the core and the C API wrapper.
//   IoError         -- filesystem-level failure (open/read/write)
//   FormatError     -- file contents violate the expected format
//   ValidationError -- invalid configuration, parameters, or strategy
//   DataError       -- structurally valid inputs that do not fit together
//                      (dims mismatch, incomplete ranking grid, ...)
struct MaskforgeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : MaskforgeError {
  using MaskforgeError::MaskforgeError;
};

struct FormatError : MaskforgeError {
  using MaskforgeError::MaskforgeError;
};

struct ValidationError : MaskforgeError {
  using MaskforgeError::MaskforgeError;
};

struct DataError : MaskforgeError {
  using MaskforgeError::MaskforgeError;
};

}  // namespace maskforge
