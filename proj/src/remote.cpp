#include "scb/remote.hpp"

#include <httplib.h>

#include <json.hpp>
#include <cmath>
#include <thread>

#include "scb/bytes.hpp"
#include "scb/digest.hpp"
#include "scb/errors.hpp"

namespace scb {

using nlohmann::json;

std::string encode_score_request(const ImageBatch& batch) {
  ByteWriter w;
  w.floats(batch.data.subspan(0, batch.count * batch.volume()));
  json body = {
      {"shape", {batch.count, batch.shape.channels, batch.shape.height, batch.shape.width}},
      {"dtype", "f32le"},
      {"data", base64_encode(w.bytes())},
  };
  return body.dump();
}

DecodedBatch decode_score_request(const std::string& text) {
  json body;
  try {
    body = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("request is not JSON: ") + e.what());
  }
  if (!body.is_object() || !body.contains("shape") || !body.contains("data")) {
    throw ValidationError("request needs \"shape\" and \"data\"");
  }
  if (body.value("dtype", std::string("f32le")) != "f32le") {
    throw ValidationError("unsupported dtype");
  }
  const json& shape = body["shape"];
  if (!shape.is_array() || shape.size() != 4) throw ValidationError("shape must be [N,C,H,W]");
  for (const auto& d : shape) {
    if (!d.is_number_unsigned()) throw ValidationError("shape entries must be non-negative integers");
  }
  DecodedBatch out;
  out.count = shape[0].get<std::size_t>();
  out.shape = {shape[1].get<std::size_t>(), shape[2].get<std::size_t>(), shape[3].get<std::size_t>()};
  if (!body["data"].is_string()) throw ValidationError("data must be a base64 string");
  const auto bytes = base64_decode(body["data"].get<std::string>());
  const std::size_t n = out.count * out.shape.channels * out.shape.height * out.shape.width;
  if (bytes.size() != n * sizeof(float)) {
    throw ValidationError("data holds " + std::to_string(bytes.size()) + " bytes, shape needs " +
                          std::to_string(n * sizeof(float)));
  }
  out.data.resize(n);
  ByteReader r(bytes);
  r.floats(out.data, "pixel data");
  return out;
}

namespace {

struct Endpoint {
  std::string host;  // scheme://host:port
  std::string prefix;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ValidationError("endpoint must be a URL: " + url);
  const auto path = url.find('/', scheme + 3);
  Endpoint e;
  e.host = url.substr(0, path);
  if (path != std::string::npos) {
    e.prefix = url.substr(path);
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  }
  return e;
}

class RemoteScorer final : public Scorer {
 public:
  RemoteScorer(std::string url, std::chrono::milliseconds timeout, std::size_t batch_size)
      : url_(std::move(url)), ep_(split_endpoint(url_)), timeout_(timeout), batch_size_(batch_size) {
    auto cli = client();
    auto res = cli.Get(ep_.prefix + "/v1/meta");
    if (!res) transport_failure(res.error());
    if (res->status != 200) {
      throw ProtocolError(url_ + "/v1/meta returned HTTP " + std::to_string(res->status));
    }
    try {
      const json meta = json::parse(res->body);
      n_classes_ = meta.at("n_classes").get<std::size_t>();
      const auto& s = meta.at("input_shape");
      if (!s.is_array() || s.size() != 3) throw ProtocolError("input_shape must be [C,H,W]");
      shape_ = {s[0].get<std::size_t>(), s[1].get<std::size_t>(), s[2].get<std::size_t>()};
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("malformed /v1/meta response: ") + e.what());
    }
    if (n_classes_ == 0) throw ProtocolError("/v1/meta reports zero classes");
  }

  std::size_t n_classes() const override { return n_classes_; }
  ImageShape input_shape() const override { return shape_; }
  std::string identity() const override { return "remote:" + url_; }

  ScoreRows score(const ImageBatch& batch) const override {
    check_input(batch.shape);
    ScoreRows rows;
    rows.reserve(batch.count);
    auto cli = client();
    for (std::size_t first = 0; first < batch.count; first += batch_size_) {
      const std::size_t n = std::min(batch_size_, batch.count - first);
      ImageBatch chunk{batch.shape, n, batch.data.subspan(first * batch.volume(), n * batch.volume())};
      auto res = cli.Post(ep_.prefix + "/v1/score", encode_score_request(chunk), "application/json");
      if (!res) transport_failure(res.error());
      if (res->status != 200) {
        throw ProtocolError(url_ + "/v1/score returned HTTP " + std::to_string(res->status) + ": " +
                            res->body.substr(0, 200));
      }
      ScoreRows part;
      try {
        part = json::parse(res->body).at("probs").get<ScoreRows>();
      } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed /v1/score response: ") + e.what());
      }
      if (part.size() != n) {
        throw ProtocolError("/v1/score returned " + std::to_string(part.size()) + " rows for " +
                            std::to_string(n) + " images");
      }
      try {
        validate_probability_rows(part, n_classes_);
      } catch (const ContractViolation& e) {
        throw ContractViolation(std::string(e.what()) + " (batch row " +
                                    std::to_string(first + e.row()) + ")",
                                first + e.row());
      }
      for (auto& r : part) rows.push_back(std::move(r));
    }
    return rows;
  }

 private:
  httplib::Client client() const {
    httplib::Client cli(ep_.host);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    return cli;
  }

  [[noreturn]] void transport_failure(httplib::Error err) const {
    throw TransportError("cannot reach scorer at " + url_ + ": " + httplib::to_string(err));
  }

  std::string url_;
  Endpoint ep_;
  std::chrono::milliseconds timeout_;
  std::size_t batch_size_;
  std::size_t n_classes_ = 0;
  ImageShape shape_;
};

}  // namespace

ScorerPtr remote_scorer(const std::string& endpoint, std::chrono::milliseconds timeout,
                        std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("remote batch size must be positive");
  return std::make_shared<RemoteScorer>(endpoint, timeout, batch_size);
}

struct ProtocolServer::Impl {
  ScorerPtr scorer;
  std::size_t max_batch;
  std::vector<std::string> labels;
  httplib::Server server;
  std::thread thread;
};

ProtocolServer::ProtocolServer(ScorerPtr scorer, std::size_t max_batch, std::vector<std::string> labels)
    : impl_(std::make_unique<Impl>()) {
  impl_->scorer = std::move(scorer);
  impl_->max_batch = max_batch;
  impl_->labels = std::move(labels);
  Impl* impl = impl_.get();

  impl_->server.Get("/v1/meta", [impl](const httplib::Request&, httplib::Response& res) {
    const ImageShape s = impl->scorer->input_shape();
    json meta = {{"n_classes", impl->scorer->n_classes()},
                 {"input_shape", {s.channels == 0 ? 3 : s.channels, s.height, s.width}}};
    if (!impl->labels.empty()) meta["labels"] = impl->labels;
    res.set_content(meta.dump(), "application/json");
  });

  impl_->server.Post("/v1/score", [impl](const httplib::Request& req, httplib::Response& res) {
    auto fail = [&res](int status, const std::string& msg) {
      res.status = status;
      res.set_content(json{{"error", msg}}.dump(), "application/json");
    };
    try {
      const DecodedBatch batch = decode_score_request(req.body);
      if (batch.count > impl->max_batch) return fail(413, "batch exceeds " + std::to_string(impl->max_batch));
      const ScoreRows rows = impl->scorer->score(batch.view());
      res.set_content(json{{"probs", rows}}.dump(), "application/json");
    } catch (const ValidationError& e) {
      fail(400, e.what());
    } catch (const std::exception& e) {
      fail(500, e.what());
    }
  });
}

ProtocolServer::~ProtocolServer() { stop(); }

int ProtocolServer::start() {
  port_ = impl_->server.bind_to_any_port("127.0.0.1");
  if (port_ < 0) throw TransportError("protocol server could not bind a port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void ProtocolServer::stop() {
  if (impl_ && impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

}  // namespace scb
