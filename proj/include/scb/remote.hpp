#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "scb/scorer.hpp"

namespace scb {

/// Scorer backed by the HTTP scoring protocol:
///   GET  /v1/meta  → {"n_classes", "input_shape": [C,H,W], "labels"?}
///   POST /v1/score ← {"shape": [N,C,H,W], "dtype": "f32le", "data": base64}
///                  → {"probs": [[...] × N]}
/// Batches are split into requests of at most `batch_size` images and the
/// rows are returned in input order. Any failure aborts the whole call.
ScorerPtr remote_scorer(const std::string& endpoint, std::chrono::milliseconds timeout,
                        std::size_t batch_size);

/// Request body for POST /v1/score.
std::string encode_score_request(const ImageBatch& batch);
/// Decodes a request body; throws ValidationError on any malformation.
struct DecodedBatch {
  ImageShape shape;
  std::size_t count = 0;
  std::vector<float> data;
  ImageBatch view() const { return {shape, count, data}; }
};
DecodedBatch decode_score_request(const std::string& body);

/// In-process server speaking the scoring protocol for any Scorer. Used as
/// the protocol stub in tests and for local smoke runs.
class ProtocolServer {
 public:
  explicit ProtocolServer(ScorerPtr scorer, std::size_t max_batch = 256,
                          std::vector<std::string> labels = {});
  ~ProtocolServer();
  ProtocolServer(const ProtocolServer&) = delete;
  ProtocolServer& operator=(const ProtocolServer&) = delete;

  /// Binds an ephemeral port on 127.0.0.1 and serves on a background thread.
  int start();
  void stop();
  int port() const noexcept { return port_; }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = -1;
};

}  // namespace scb
