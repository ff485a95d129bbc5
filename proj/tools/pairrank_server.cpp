// Copyright 2026 The PairRank Authors.
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

// pairrank_server: HTTP annotation service. Flags fall back to the
// PAIRRANK_PORT, PAIRRANK_DATA_DIR and PAIRRANK_UI_DIR environment variables.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pairrank/service.h"

int main(int argc, char** argv) {
  CLI::App app{"pairrank_server: annotation service for paired-comparison lexica"};
  app.name("pairrank_server");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::string ui_dir;
  std::string cors_origin = "*";
  std::uint64_t seed = 0;
  app.add_option("--host", host, "Listen address")->capture_default_str();
  app.add_option("--port", port, "Listen port")->envname("PAIRRANK_PORT")->check(CLI::Range(0, 65535))
      ->capture_default_str();
  app.add_option("--data-dir", data_dir, "Directory for logs and lexicon snapshots (empty: in memory)")
      ->envname("PAIRRANK_DATA_DIR");
  app.add_option("--ui-dir", ui_dir, "Static UI assets served at /")->envname("PAIRRANK_UI_DIR")
      ->check(CLI::ExistingDirectory);
  app.add_option("--cors-origin", cors_origin, "Allowed CORS origin")->capture_default_str();
  app.add_option("--seed", seed, "Seed for session pivots")->envname("PAIRRANK_SEED")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    pairrank::service::AnnotationService service({data_dir, seed});
    httplib::Server server;
    pairrank::service::RegisterRoutes(server, service, {cors_origin, ui_dir});
    if (!server.bind_to_port(host, port)) {
      std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
      return 1;
    }
    std::cerr << "listening on " << host << ":" << port << "\n";
    server.listen_after_bind();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
