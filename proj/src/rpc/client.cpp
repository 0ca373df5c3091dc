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

#include "optgym/rpc/client.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include "optgym/common/error.hpp"
#include "optgym/rpc/frame.hpp"

namespace optgym::rpc {

Client::Client(int fd) : fd_(fd) {
  reader_ = std::thread([this] { reader_loop(); });
}

Client::~Client() {
  ::shutdown(fd_, SHUT_RDWR);
  reader_.join();
  ::close(fd_);
}

json Client::call(json request, std::chrono::steady_clock::duration timeout) {
  const std::uint64_t id = next_id_++;
  request["id"] = id;
  std::future<json> reply;
  {
    // broken_ is only set under pending_mu_, so a registered promise is
    // always either answered or failed.
    std::lock_guard lock(pending_mu_);
    if (broken_) throw Error(ErrorCode::backend_crash, "connection to service is closed");
    reply = pending_[id].get_future();
  }
  try {
    std::lock_guard lock(write_mu_);
    write_frame(fd_, request.dump());
  } catch (const Error&) {
    fail_all("write failed");
    throw Error(ErrorCode::backend_crash, "connection to service is closed");
  }
  ++round_trips_;
  if (reply.wait_for(timeout) != std::future_status::ready) {
    std::lock_guard lock(pending_mu_);
    pending_.erase(id);
    throw Error(ErrorCode::timeout, std::string(request.value("kind", "")) +
                                        " got no reply before the client deadline");
  }
  return reply.get();
}

void Client::reader_loop() {
  for (;;) {
    std::optional<std::string> frame;
    try {
      frame = read_frame(fd_);
    } catch (const Error& e) {
      fail_all(e.detail());
      return;
    }
    if (!frame) {
      fail_all("service closed the connection");
      return;
    }
    json reply;
    try {
      reply = json::parse(*frame);
    } catch (const json::exception& e) {
      fail_all(std::string("unparseable reply: ") + e.what());
      return;
    }
    const std::uint64_t id = reply.value("id", std::uint64_t{0});
    std::lock_guard lock(pending_mu_);
    if (const auto it = pending_.find(id); it != pending_.end()) {
      it->second.set_value(std::move(reply));
      pending_.erase(it);
    }
  }
}

void Client::fail_all(const std::string& why) {
  std::lock_guard lock(pending_mu_);
  broken_ = true;
  for (auto& [id, promise] : pending_) {
    promise.set_exception(std::make_exception_ptr(Error(ErrorCode::backend_crash, why)));
  }
  pending_.clear();
}

}  // namespace optgym::rpc
