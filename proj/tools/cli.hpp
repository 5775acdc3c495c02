// Copyright 2026 The Segfuse Authors.
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

#ifndef SEGFUSE_TOOLS_CLI_HPP_
#define SEGFUSE_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace segfuse::tools {

// Exit codes of the segfuse tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInternal = 3;

// Runs `segfuse <args...>` (args excludes the program name). Results go to
// `out`; failures go to `err` as one JSON object per line:
//   {"error": "<kind>", "message": "...", "command": "<subcommand>"}
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace segfuse::tools

#endif  // SEGFUSE_TOOLS_CLI_HPP_
