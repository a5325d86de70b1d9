// Copyright 2026 The ulab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ulab/errors.h"

namespace ulab {

ParseError::ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line == 0 ? what
                                   : "line " + std::to_string(line) + ": " +
                                         what),
      line_(line) {}

NumericDivergenceError::NumericDivergenceError(const std::string& what,
                                               long epoch)
    : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"),
      epoch_(epoch) {}

}  // namespace ulab
