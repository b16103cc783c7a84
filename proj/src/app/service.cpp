#include "ckd/app/service.hpp"

#include <httplib.h>

#include "ckd/cohort/discretize.hpp"
#include "ckd/cohort/encode.hpp"
#include "ckd/common/error.hpp"

namespace ckd {

using nlohmann::json;

PredictionService::PredictionService(TrainedModel model, CohortSchema schema, ExplainOptions options)
    : model_(std::move(model)), schema_(std::move(schema)), options_(options) {
  model_.require_schema(schema_.hash());
  required_ = features_for_columns(schema_, model_.columns());
}

json PredictionService::health() const {
  return {{"status", "ok"},
          {"model", std::string(model_.spec().kind_name())},
          {"feature_set", model_.feature_set_name()},
          {"schema_hash", schema_.hash()}};
}

json PredictionService::schema_payload() const {
  json feats = json::array();
  for (const auto& name : required_) {
    const auto& f = schema_.feature(name);
    feats.push_back({{"name", f.name},
                     {"group", std::string(to_string(f.group))},
                     {"categories", f.categories},
                     {"description", f.description}});
  }
  return {{"schema_hash", schema_.hash()},
          {"feature_set", model_.feature_set_name()},
          {"columns", model_.columns()},
          {"threshold", model_.threshold()},
          {"features", feats}};
}

FeatureMap PredictionService::features_from(const json& request) const {
  if (!request.is_object()) throw ValidationError("request body must be a JSON object");
  const json& src = request.contains("features") ? request.at("features") : request;
  if (!src.is_object()) throw ValidationError("features must be a JSON object");
  FeatureMap out;
  for (const auto& [k, v] : src.items()) {
    if (!schema_.feature_index(k)) throw FieldError(FieldError::Reason::Invalid, k, "unknown field: " + k);
    if (v.is_string()) {
      out[k] = v.get<std::string>();
    } else if (!v.is_number()) {
      throw FieldError(FieldError::Reason::Invalid, k, "field " + k + " must be a category string or a number");
    }
  }
  // Numeric inputs are discretized after categories so sex is available.
  for (const auto& [k, v] : src.items()) {
    if (!v.is_number()) continue;
    const auto idx = schema_.feature_index(k);
    if (!idx) throw FieldError(FieldError::Reason::Invalid, k, "unknown field: " + k);
    const auto& spec = schema_.features()[*idx];
    if (!spec.discretization)
      throw FieldError(FieldError::Reason::Invalid, k, "field " + k + " takes a category, not a number");
    std::optional<std::string_view> sex;
    if (!spec.discretization->sex_specific.empty()) {
      const auto it = out.find(schema_.sex_feature());
      if (it == out.end())
        throw FieldError(FieldError::Reason::Missing, schema_.sex_feature(),
                         "missing required field: " + schema_.sex_feature() + " (needed to discretize " + k + ")");
      sex = it->second;
    }
    try {
      out[k] = discretize(v.get<double>(), spec.discretization->source_unit, *spec.discretization, sex);
    } catch (const FieldError&) {
      throw;
    } catch (const ValidationError& e) {
      throw FieldError(FieldError::Reason::Invalid, k, "field " + k + ": " + e.what());
    }
  }
  return out;
}

namespace {

json assessment_json(const RiskAssessment& a, const TrainedModel& m) {
  return {{"probability", a.probability},
          {"predicted", a.predicted},
          {"class", a.label()},
          {"threshold", a.threshold},
          {"feature_set", m.feature_set_name()},
          {"model", std::string(m.spec().kind_name())}};
}

}  // namespace

json PredictionService::predict(const json& request) const {
  const auto features = features_from(request);
  return assessment_json(model_.assess(schema_, features), model_);
}

json PredictionService::explain(const json& request) const {
  const auto features = features_from(request);
  const auto x = model_.encode(schema_, features);
  auto out = assessment_json(model_.assess_encoded(x), model_);
  out["explanation"] = explain_local(model_, schema_.hash(), x, options_).to_json(x);
  return out;
}

namespace {

std::string reason_name(FieldError::Reason r) {
  switch (r) {
    case FieldError::Reason::Missing: return "missing";
    case FieldError::Reason::UnknownCategory: return "unknown_category";
    case FieldError::Reason::Invalid: return "invalid";
  }
  return "invalid";
}

HttpReply reply(int status, const json& j) { return {status, j.dump() + "\n"}; }

}  // namespace

HttpReply PredictionService::handle(std::string_view method, std::string_view path, std::string_view body) const {
  try {
    if (path == "/health" || path == "/schema") {
      if (method != "GET") return reply(405, {{"error", "method not allowed"}});
      return reply(200, path == "/health" ? health() : schema_payload());
    }
    if (path == "/predict" || path == "/explain") {
      if (method != "POST") return reply(405, {{"error", "method not allowed"}});
      json request;
      try {
        request = json::parse(body);
      } catch (const json::parse_error& e) {
        return reply(400, {{"error", std::string("malformed JSON: ") + e.what()}});
      }
      if (!request.is_object()) return reply(400, {{"error", "request body must be a JSON object"}});
      return reply(200, path == "/predict" ? predict(request) : explain(request));
    }
    return reply(404, {{"error", "not found"}});
  } catch (const FieldError& e) {
    return reply(422, {{"error", e.what()}, {"field", e.field()}, {"reason", reason_name(e.reason())}});
  } catch (const ValidationError& e) {
    return reply(400, {{"error", e.what()}});
  } catch (const std::exception& e) {
    return reply(500, {{"error", e.what()}});
  }
}

ServiceServer::ServiceServer(std::shared_ptr<const PredictionService> service)
    : service_(std::move(service)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ServiceServer::~ServiceServer() { stop(); }

void ServiceServer::install_routes() {
  auto respond = [svc = service_](const httplib::Request& req, httplib::Response& res) {
    const auto r = svc->handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Get("/health", respond);
  server_->Get("/schema", respond);
  server_->Post("/predict", respond);
  server_->Post("/explain", respond);
}

int ServiceServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void ServiceServer::run(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void ServiceServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace ckd
