// Copyright 2026 The ClaimLens Authors.
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

// Eigen must come before httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include "claimlens/kgraph.h"

#include <algorithm>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "claimlens/errors.h"

namespace claimlens {

TagMeLinker::TagMeLinker(std::string endpoint, std::string token,
                         int timeout_seconds)
    : endpoint_(std::move(endpoint)),
      token_(std::move(token)),
      timeout_seconds_(timeout_seconds) {}

std::vector<EntityLink> TagMeLinker::Link(const std::string &text,
                                          double threshold) const {
  std::vector<EntityLink> links;
  if (text.empty() || threshold > 1.0) return links;
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(endpoint_, m, kUrl)) {
    throw LinkerError("bad linker endpoint '" + endpoint_ + "'");
  }
  const std::string path = m[2].matched ? m[2].str() : "/";
  httplib::Client client(m[1].str());
  client.set_connection_timeout(timeout_seconds_);
  client.set_read_timeout(timeout_seconds_);
  httplib::Params params = {{"text", text}, {"lang", "en"}};
  if (!token_.empty()) params.emplace("gcube-token", token_);
  auto res = client.Post(path, params);
  if (!res) {
    throw LinkerError("linker request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw LinkerError("linker returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    for (const auto &a : reply.value("annotations", nlohmann::json::array())) {
      if (!a.contains("title") || !a.contains("rho")) continue;
      const double rho = a.at("rho").get<double>();
      if (rho < threshold) continue;
      std::string title = a.at("title").get<std::string>();
      std::replace(title.begin(), title.end(), ' ', '_');
      auto it = std::find_if(links.begin(), links.end(),
                             [&](const EntityLink &l) { return l.entity == title; });
      if (it == links.end()) {
        links.push_back({title, rho});
      } else {
        it->score = std::max(it->score, rho);
      }
    }
  } catch (const nlohmann::json::exception &e) {
    throw LinkerError(std::string("malformed linker reply: ") + e.what());
  }
  std::stable_sort(links.begin(), links.end(),
                   [](const EntityLink &a, const EntityLink &b) {
                     return a.score > b.score;
                   });
  return links;
}

}  // namespace claimlens
