#pragma once

#include <stdexcept>
#include <string>

namespace multrec {

// Error taxonomy shared by all modules. The CLI maps these onto
// machine-readable diagnostics and nonzero exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(std::string what) : std::runtime_error(std::move(what)) {}
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NoSolution : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// A named hypothesis of a theorem-backed construction failed.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An exact identity that a certificate promised did not hold.
class CertificateFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace multrec
