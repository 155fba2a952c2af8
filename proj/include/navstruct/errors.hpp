#pragma once

#include <stdexcept>
#include <string>

namespace navstruct {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  success = 0,
  invalid_input = 2,
  infeasible_structure = 3,
  oracle_refusal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Malformed files, out-of-range parameters, violated preconditions.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(ExitCode::invalid_input, what) {}
};

/// A size lookup hit a pair the table does not define.
class CorruptTable : public Error {
 public:
  explicit CorruptTable(const std::string& what) : Error(ExitCode::invalid_input, what) {}
};

/// Some MDU has no independent reconstruction in the structure.
class InfeasibleStructure : public Error {
 public:
  explicit InfeasibleStructure(const std::string& what)
      : Error(ExitCode::infeasible_structure, what) {}
};

/// An exhaustive oracle refused an instance that is too large.
class OracleRefusal : public Error {
 public:
  explicit OracleRefusal(const std::string& what) : Error(ExitCode::oracle_refusal, what) {}
};

}  // namespace navstruct
