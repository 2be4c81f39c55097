#include "wellness/ingest/http_api.hpp"

#include <thread>

#include <httplib.h>

namespace wellness::ingest {

namespace {

constexpr const char* kJson = "application/json";
constexpr const char* kNdjson = "application/x-ndjson";

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, int status, std::string_view code, std::string_view detail,
                 const std::vector<std::string>& ids = {}) {
  Json body = Json::object();
  body["error"] = code;
  body["detail"] = detail;
  if (!ids.empty()) body["question_ids"] = ids;
  reply(res, status, body);
}

int status_for(RejectionCode code) {
  switch (code) {
    case RejectionCode::BadToken: return 401;
    case RejectionCode::Incomplete:
    case RejectionCode::WrongSessionKind:
    case RejectionCode::Malformed: return 400;
    case RejectionCode::TooManyToday:
    case RejectionCode::TooSoon:
    case RejectionCode::IdempotencyConflict: return 409;
  }
  return 500;
}

std::string bearer_token(const httplib::Request& req) {
  const std::string header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) return {};
  return header.substr(prefix.size());
}

}  // namespace

Json envelope_to_json(const SubmissionEnvelope& envelope) {
  Json body = Json::object();
  body["idempotency_key"] = envelope.idempotency_key;
  body["session_kind"] = survey::to_string(envelope.response.session_kind);
  body["answers"] = answers_to_json(envelope.response);
  Json samples = Json::array();
  for (const auto& s : envelope.samples) samples.push_back(sample_to_json(s));
  body["samples"] = std::move(samples);
  body["client_session_start_ms"] = envelope.client_session_start_ms;
  body["client_session_end_ms"] = envelope.client_session_end_ms;
  return body;
}

SubmissionEnvelope envelope_from_json(const Json& body) {
  try {
    SubmissionEnvelope envelope;
    envelope.idempotency_key = body.value("idempotency_key", std::string());
    const auto kind = survey::parse_session_kind(body.at("session_kind").get<std::string>());
    if (!kind) throw RecordFormatError("session_kind must be first_of_day or subsequent");
    envelope.response.session_kind = *kind;
    envelope.response.answers = answers_from_json(body.at("answers"));
    for (const auto& s : body.at("samples")) envelope.samples.push_back(sample_from_json(s));
    envelope.client_session_start_ms = body.at("client_session_start_ms").get<std::int64_t>();
    envelope.client_session_end_ms = body.at("client_session_end_ms").get<std::int64_t>();
    return envelope;
  } catch (const Json::exception& e) {
    throw RecordFormatError(std::string("malformed envelope: ") + e.what());
  }
}

struct HttpApi::Impl {
  IngestService& service;
  SnapshotSource snapshot;
  httplib::Server server;
  std::thread thread;

  Impl(IngestService& s, SnapshotSource snap) : service(s), snapshot(std::move(snap)) { routes(); }

  void routes() {
    server.Post("/api/v1/participants", [this](const httplib::Request& req, httplib::Response& res) {
      std::string experiment_id;
      try {
        experiment_id = Json::parse(req.body).at("experiment_id").get<std::string>();
      } catch (const Json::exception& e) {
        return reply_error(res, 400, "Malformed", e.what());
      }
      try {
        const auto registration = service.register_participant(experiment_id);
        Json body = Json::object();
        body["participant_id"] = registration.participant_id;
        body["auth_token"] = registration.auth_token;
        reply(res, 201, body);
      } catch (const UnknownExperiment& e) {
        reply_error(res, 404, "UnknownExperiment", e.what());
      } catch (const StorageFailure& e) {
        reply_error(res, 503, "StorageFailure", e.what());
      }
    });

    server.Post("/api/v1/submissions", [this](const httplib::Request& req, httplib::Response& res) {
      SubmissionEnvelope envelope;
      try {
        envelope = envelope_from_json(Json::parse(req.body));
      } catch (const Json::exception& e) {
        return reply_error(res, 400, "Malformed", e.what());
      } catch (const RecordFormatError& e) {
        return reply_error(res, 400, "Malformed", e.what());
      }
      const std::string header_key = req.get_header_value("Idempotency-Key");
      if (!header_key.empty()) {
        if (!envelope.idempotency_key.empty() && envelope.idempotency_key != header_key) {
          return reply_error(res, 400, "Malformed", "Idempotency-Key header does not match the body");
        }
        envelope.idempotency_key = header_key;
      }

      try {
        const auto outcome = service.submit(bearer_token(req), envelope);
        if (const auto* accepted = std::get_if<Accepted>(&outcome)) {
          Json body = Json::object();
          body["submission_id"] = accepted->submission_id;
          body["replayed"] = accepted->replayed;
          return reply(res, 201, body);
        }
        const auto& rejection = std::get<Rejection>(outcome);
        reply_error(res, status_for(rejection.code), to_string(rejection.code), rejection.detail,
                    rejection.question_ids);
      } catch (const StorageFailure& e) {
        reply_error(res, 503, "StorageFailure", e.what());
      }
    });

    server.Get("/api/v1/experiments/:id/dataset", [this](const httplib::Request& req, httplib::Response& res) {
      const bool include_invalid = req.get_param_value("include_invalid") == "true";
      try {
        std::string body;
        for (const auto& s : service.export_dataset(req.path_params.at("id"), include_invalid)) {
          body += submission_to_line(s);
          body += '\n';
        }
        res.status = 200;
        res.set_content(body, kNdjson);
      } catch (const UnknownExperiment& e) {
        reply_error(res, 404, "UnknownExperiment", e.what());
      }
    });

    server.Get("/api/v1/healthz", [this](const httplib::Request&, httplib::Response& res) {
      const bool ok = service.healthy();
      reply(res, ok ? 200 : 503, Json{{"status", ok ? "ok" : "journals not writable"}});
    });

    // Served byte-for-byte so clients can check the hash themselves.
    server.Get("/api/v1/question-bank", [this](const httplib::Request&, httplib::Response& res) {
      res.set_header("X-Question-Bank-Hash", service.bank().content_hash());
      res.status = 200;
      res.set_content(service.bank().source(), kJson);
    });

    server.Get("/api/v1/sensor/snapshot", [this](const httplib::Request&, httplib::Response& res) {
      std::optional<core::SensorSample> sample;
      if (snapshot) {
        try {
          sample = snapshot();
        } catch (const std::exception&) {
          sample.reset();
        }
      }
      if (!sample) return reply_error(res, 503, "SensorUnavailable", "no sensor connection");
      reply(res, 200, sample_to_json(*sample));
    });
  }
};

HttpApi::HttpApi(IngestService& service, SnapshotSource snapshot)
    : impl_(std::make_unique<Impl>(service, std::move(snapshot))) {}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpApi::serve() { return impl_->server.listen_after_bind(); }

int HttpApi::start_background(const std::string& host, int port) {
  const int bound = bind(host, port);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpApi::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

struct ApiClient::Impl {
  httplib::Client client;
  Impl(const std::string& host, int port) : client(host, port) {
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
  }

  httplib::Result check(httplib::Result result) {
    if (!result) throw TransportError("transport failure: " + httplib::to_string(result.error()));
    return result;
  }
};

ApiClient::ApiClient(std::string host, int port) : impl_(std::make_unique<Impl>(host, port)) {}
ApiClient::~ApiClient() = default;

ApiClient::Response ApiClient::register_raw(const std::string& experiment_id) {
  auto res = impl_->check(
      impl_->client.Post("/api/v1/participants", Json{{"experiment_id", experiment_id}}.dump(), kJson));
  return {res->status, Json::parse(res->body, nullptr, false)};
}

Registration ApiClient::register_participant(const std::string& experiment_id) {
  const auto res = register_raw(experiment_id);
  if (res.status != 201) throw Error("registration failed with HTTP " + std::to_string(res.status));
  return {res.body.at("participant_id").get<std::string>(), res.body.at("auth_token").get<std::string>()};
}

ApiClient::SubmitResult ApiClient::submit(const std::string& token, const SubmissionEnvelope& envelope) {
  httplib::Headers headers{{"Authorization", "Bearer " + token}, {"Idempotency-Key", envelope.idempotency_key}};
  auto res = impl_->check(impl_->client.Post("/api/v1/submissions", headers, envelope_to_json(envelope).dump(), kJson));
  SubmitResult out;
  out.status = res->status;
  const Json body = Json::parse(res->body, nullptr, false);
  if (body.is_discarded()) return out;
  if (res->status == 201) {
    out.submission_id = body.at("submission_id").get<std::string>();
    out.replayed = body.value("replayed", false);
  } else {
    out.error = body.value("error", std::string());
    if (body.contains("question_ids")) out.question_ids = body.at("question_ids").get<std::vector<std::string>>();
  }
  return out;
}

std::string ApiClient::dataset(const std::string& experiment_id, bool include_invalid) {
  const std::string path = "/api/v1/experiments/" + experiment_id +
                           "/dataset?include_invalid=" + (include_invalid ? "true" : "false");
  auto res = impl_->check(impl_->client.Get(path));
  if (res->status != 200) throw Error("dataset export failed with HTTP " + std::to_string(res->status));
  return res->body;
}

bool ApiClient::healthz() {
  auto res = impl_->check(impl_->client.Get("/api/v1/healthz"));
  return res->status == 200;
}

ApiClient::BankDocument ApiClient::question_bank() {
  auto res = impl_->check(impl_->client.Get("/api/v1/question-bank"));
  if (res->status != 200) throw Error("question bank fetch failed with HTTP " + std::to_string(res->status));
  return {res->body, res->get_header_value("X-Question-Bank-Hash")};
}

std::optional<core::SensorSample> ApiClient::sensor_snapshot() {
  auto res = impl_->check(impl_->client.Get("/api/v1/sensor/snapshot"));
  if (res->status != 200) return std::nullopt;
  return sample_from_json(Json::parse(res->body));
}

}  // namespace wellness::ingest
