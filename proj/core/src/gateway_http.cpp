/* Copyright 2026 The DAWN Gateway Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <httplib.h>

#include "dawn/error.hpp"
#include "dawn/gateway.hpp"
#include "dawn/verify.hpp"

namespace dawn {
namespace {

using nlohmann::json;

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kUnsupportedDtype:
    case ErrorCode::kParseError:
    case ErrorCode::kBadGeometry: return 400;
    case ErrorCode::kUnknownClient: return 404;
    case ErrorCode::kUnknownInput: return 422;
    case ErrorCode::kModelNotRegistered:
    case ErrorCode::kEmptyBundle: return 409;
    default: return 500;
  }
}

void SendError(httplib::Response& res, const Error& e) {
  res.status = HttpStatusFor(e.code());
  res.set_content(json{{"error", ErrorCodeName(e.code())}, {"message", e.what()}}.dump(),
                  "application/json");
}

void SendJson(httplib::Response& res, const json& body) {
  res.status = 200;
  res.set_content(body.dump(), "application/json");
}

CanonicalInput ParsePredictBody(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
    const std::string dtype = doc.at("dtype").get<std::string>();
    const auto shape = doc.at("shape").get<std::vector<std::uint32_t>>();
    const Bytes bytes = Base64Decode(doc.at("input_b64").get<std::string>());
    return Canonicalize(dtype == "u8" ? std::uint8_t{0x01} : std::uint8_t{0x00}, shape, bytes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("request body: ") + e.what());
  }
}

json EntryJson(const BulletinEntry& e) { return json::parse(e.CanonicalLine()); }

class HttpSuspect : public SuspectEndpoint {
 public:
  HttpSuspect(const std::string& base_url, std::string api_key)
      : client_(base_url), api_key_(std::move(api_key)) {
    client_.set_connection_timeout(5);
    client_.set_read_timeout(30);
  }

  std::size_t QueryClass(const CanonicalInput& x) override {
    const json body = Query(x);
    if (body.contains("class")) return body.at("class").get<std::size_t>();
    const auto probs = body.at("probs").get<std::vector<std::string>>();
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const double p = std::stod(probs[i]);
      if (p > best_p) {
        best_p = p;
        best = i;
      }
    }
    return best;
  }

  std::optional<std::vector<std::string>> QueryWire(const CanonicalInput& x) override {
    const json body = Query(x);
    if (!body.contains("probs")) return std::nullopt;
    return body.at("probs").get<std::vector<std::string>>();
  }

 private:
  json Query(const CanonicalInput& x) {
    const json req = {{"input_b64", Base64Encode(x.bytes())}, {"shape", x.shape()}, {"dtype", "u8"}};
    httplib::Headers headers = {{"X-Api-Key", api_key_}};
    auto res = client_.Post("/v1/predict", headers, req.dump(), "application/json");
    if (!res) {
      throw Error(ErrorCode::kSuspectUnreachable, "no response: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kSuspectUnreachable,
                  "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSuspectUnreachable, std::string("bad response: ") + e.what());
    }
  }

  httplib::Client client_;
  std::string api_key_;
};

}  // namespace

struct GatewayServer::Impl {
  explicit Impl(Gateway& g) : gateway(g) {}

  bool AdminOk(const httplib::Request& req, httplib::Response& res) {
    if (gateway.IsAdmin(req.get_header_value("X-Admin-Key"))) return true;
    SendError(res, Error(ErrorCode::kUnauthorized, "admin key required"));
    return false;
  }

  void Install() {
    server.Post("/v1/predict", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const std::string& client = gateway.Authenticate(req.get_header_value("X-Api-Key"));
        const CanonicalInput x = ParsePredictBody(req.body);
        const PredictResponse out = gateway.HandlePredict(client, x);
        SendJson(res, out.ToWire(gateway.settings().response_mode));
      } catch (const Error& e) {
        SendError(res, e);
      }
    });
    server.Post("/v1/admin/register-model",
                [this](const httplib::Request& req, httplib::Response& res) {
                  if (!AdminOk(req, res)) return;
                  try {
                    SendJson(res, EntryJson(gateway.RegisterModel()));
                  } catch (const Error& e) {
                    SendError(res, e);
                  }
                });
    server.Post(R"(/v1/admin/snapshot/([^/]+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  if (!AdminOk(req, res)) return;
                  try {
                    SendJson(res, EntryJson(gateway.SnapshotRegister(req.matches[1])));
                  } catch (const Error& e) {
                    SendError(res, e);
                  }
                });
    server.Get(R"(/v1/admin/bundle/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 if (!AdminOk(req, res)) return;
                 try {
                   res.status = 200;
                   res.set_content(gateway.Bundle(req.matches[1]).Serialize(), "application/json");
                 } catch (const Error& e) {
                   SendError(res, e);
                 }
               });
    server.Get("/v1/admin/stats", [this](const httplib::Request& req, httplib::Response& res) {
      if (!AdminOk(req, res)) return;
      try {
        SendJson(res, gateway.Stats());
      } catch (const Error& e) {
        SendError(res, e);
      }
    });
  }

  Gateway& gateway;
  httplib::Server server;
};

GatewayServer::GatewayServer(Gateway& gateway) : impl_(std::make_unique<Impl>(gateway)) {
  impl_->Install();
}

GatewayServer::~GatewayServer() { Stop(); }

bool GatewayServer::Listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int GatewayServer::BindToAnyPort(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool GatewayServer::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void GatewayServer::WaitUntilReady() { impl_->server.wait_until_ready(); }

void GatewayServer::Stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

std::unique_ptr<SuspectEndpoint> MakeHttpSuspect(const std::string& base_url,
                                                 const std::string& api_key) {
  return std::make_unique<HttpSuspect>(base_url, api_key);
}

}  // namespace dawn
