// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace flowcast {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (JSON syntax, missing/ill-typed fields).
class ParseError : public Error {
public:
  using Error::Error;
};

// Structurally well-formed input that violates a domain invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Bad generator/training configuration, including infeasible requests.
class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace flowcast
