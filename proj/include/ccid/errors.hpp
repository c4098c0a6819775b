/*
Copyright 2026 The CCID Workbench Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace ccid {

// Every failure the library reports derives from Error, so callers that only
// care about "it failed" can catch one type. The service maps the concrete
// subclasses onto HTTP status codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameter value (negative sigma, weight outside [0,1], ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two planes (or a plane and a grid) that must agree in size do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An external deep denoiser failed. Carries the tool's stderr when available.
class ExternalToolError : public Error {
 public:
  ExternalToolError(const std::string& what, std::string stderr_excerpt = {})
      : Error(what), stderr_excerpt_(std::move(stderr_excerpt)) {}

  const std::string& stderr_excerpt() const noexcept { return stderr_excerpt_; }

 private:
  std::string stderr_excerpt_;
};

}  // namespace ccid
