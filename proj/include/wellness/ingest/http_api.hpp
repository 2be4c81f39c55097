#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wellness/ingest/records.hpp"
#include "wellness/ingest/service.hpp"

namespace wellness::ingest {

/// Request body of POST /api/v1/submissions.
Json envelope_to_json(const SubmissionEnvelope& envelope);
/// Throws RecordFormatError.
SubmissionEnvelope envelope_from_json(const Json& body);

/// Optional live reading for GET /api/v1/sensor/snapshot.
using SnapshotSource = std::function<std::optional<core::SensorSample>()>;

/// HTTP binding of IngestService:
///   POST /api/v1/participants                       201 | 400 | 404
///   POST /api/v1/submissions                        201 | 400 | 401 | 409 | 503
///   GET  /api/v1/experiments/{id}/dataset           200 (one record per line) | 404
///   GET  /api/v1/healthz                            200 | 503
///   GET  /api/v1/question-bank                      200, bank file bytes + X-Question-Bank-Hash
///   GET  /api/v1/sensor/snapshot                    200 | 503
class HttpApi {
 public:
  explicit HttpApi(IngestService& service, SnapshotSource snapshot = {});
  ~HttpApi();

  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool serve();
  /// bind() + serve() on a background thread; returns the bound port.
  int start_background(const std::string& host, int port = 0);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

/// Thin client for the same API. Transport problems throw TransportError;
/// HTTP-level outcomes are returned as values.
class ApiClient {
 public:
  ApiClient(std::string host, int port);
  ~ApiClient();

  struct Response {
    int status = 0;
    Json body;
  };

  struct SubmitResult {
    int status = 0;
    std::optional<std::string> submission_id;
    bool replayed = false;
    std::string error;  ///< rejection code name when not accepted
    std::vector<std::string> question_ids;
  };

  /// Throws Error on a non-201 response.
  Registration register_participant(const std::string& experiment_id);
  Response register_raw(const std::string& experiment_id);
  SubmitResult submit(const std::string& token, const SubmissionEnvelope& envelope);
  /// Raw line-delimited dataset body. Throws Error on non-200.
  std::string dataset(const std::string& experiment_id, bool include_invalid);
  bool healthz();

  struct BankDocument {
    std::string body;  ///< bank file bytes
    std::string hash;  ///< X-Question-Bank-Hash
  };
  BankDocument question_bank();
  std::optional<core::SensorSample> sensor_snapshot();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wellness::ingest
