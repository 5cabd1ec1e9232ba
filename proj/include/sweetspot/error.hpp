#pragma once

#include <stdexcept>
#include <string>

namespace sweetspot {

// Input data failed a structural or numeric check.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File content could not be parsed (bad cell, bad JSON).
class ParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A supplied column mapping does not match the file.
class SchemaError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation was invoked outside its documented preconditions.
class ContractError : public std::logic_error {
  using std::logic_error::logic_error;
};

// No feasible solution exists for the given problem sizes.
class InfeasibleError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cross-references between results and their source dataset are broken.
class IntegrityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested model fit has no usable optimum.
class DegenerateFitError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exit-code policy used by the CLI: user-input problems map to 1,
// anything else to 2.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const InfeasibleError*>(&e) ||
      dynamic_cast<const DegenerateFitError*>(&e) || dynamic_cast<const IoError*>(&e)) {
    return 1;
  }
  return 2;
}

}  // namespace sweetspot
