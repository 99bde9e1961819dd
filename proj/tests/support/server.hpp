/* Copyright 2026 The envnet Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <httplib.h>

#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "envnet/api.hpp"

namespace envnet::testing {

// API server on a free loopback port, served from a background thread.
class RunningServer {
 public:
  RunningServer(Store store, std::optional<std::string> token = std::nullopt)
      : server_(std::make_unique<api::Server>(std::move(store), std::move(token))) {
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->listen(); });
  }
  ~RunningServer() {
    server_->stop();
    thread_.join();
  }
  RunningServer(const RunningServer&) = delete;
  RunningServer& operator=(const RunningServer&) = delete;

  int port() const { return port_; }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(60, 0);
    return c;
  }

 private:
  std::unique_ptr<api::Server> server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace envnet::testing
