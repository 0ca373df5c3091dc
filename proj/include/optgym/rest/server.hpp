// Copyright 2026 The optgym Authors
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

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "optgym/rest/sessions.hpp"

namespace httplib {
class Server;
}

namespace optgym::rest {

struct ServerConfig {
  SessionConfig sessions;
  /// Served at "/" when set.
  std::optional<std::filesystem::path> static_dir;
};

/// HTTP/1.1 front end for SessionManager. Bodies are JSON; errors are
/// {code, message} with a matching status.
class RestServer {
 public:
  explicit RestServer(ServerConfig config = {});
  ~RestServer();

  /// Binds to `host`:`port` (0 picks a free port) and returns the port.
  int bind(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves until stop(); call after bind().
  void serve();
  void stop();
  SessionManager& sessions() { return sessions_; }

 private:
  SessionManager sessions_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace optgym::rest
