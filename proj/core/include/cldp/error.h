// Copyright 2026 The CLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLDP_ERROR_H_
#define CLDP_ERROR_H_

#include <stdexcept>
#include <string>

namespace cldp {

// Raised when an operation's preconditions are violated (bad distribution,
// unsupported channel, regime violation, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed configuration files or command-line input. The CLI
// maps this to exit status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cldp

#endif  // CLDP_ERROR_H_
