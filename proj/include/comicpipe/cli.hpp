// Copyright 2026 The comicpipe Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>

namespace comicpipe {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,          // invalid input, not found, internal failure
  kExitDecode = 2,         // image could not be read or decoded
  kExitBackend = 3,        // backend unavailable or misbehaving
  kExitOverflow = 4,       // prompt over budget under --on-overflow fail
};

// Entry point shared by the comicpipe binary and in-process tests. Data goes
// to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace comicpipe
