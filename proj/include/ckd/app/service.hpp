#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "ckd/cohort/schema.hpp"
#include "ckd/explain/shapley.hpp"
#include "ckd/models/trained_model.hpp"

namespace httplib {
class Server;
}

namespace ckd {

struct HttpReply {
  int status = 200;
  std::string body;
};

// Stateless request handling over a read-only model. Construction refuses a
// model whose schema hash differs from `schema`.
class PredictionService {
 public:
  PredictionService(TrainedModel model, CohortSchema schema, ExplainOptions options = {});

  [[nodiscard]] const TrainedModel& model() const { return model_; }
  // Routes GET /health, GET /schema, POST /predict and POST /explain.
  [[nodiscard]] HttpReply handle(std::string_view method, std::string_view path, std::string_view body) const;

  [[nodiscard]] nlohmann::json health() const;
  [[nodiscard]] nlohmann::json schema_payload() const;
  // Both take {"features": {...}} or the bare feature map. Categories are
  // strings; a number is accepted for a feature with a discretization rule.
  [[nodiscard]] nlohmann::json predict(const nlohmann::json& request) const;
  [[nodiscard]] nlohmann::json explain(const nlohmann::json& request) const;

 private:
  [[nodiscard]] FeatureMap features_from(const nlohmann::json& request) const;

  TrainedModel model_;
  CohortSchema schema_;
  ExplainOptions options_;
  std::vector<std::string> required_;
};

// Serves a PredictionService on a background thread.
class ServiceServer {
 public:
  explicit ServiceServer(std::shared_ptr<const PredictionService> service);
  ~ServiceServer();
  ServiceServer(const ServiceServer&) = delete;
  ServiceServer& operator=(const ServiceServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  void stop();
  // Blocks in the calling thread until stop() is called elsewhere.
  void run(const std::string& host, int port);

 private:
  void install_routes();

  std::shared_ptr<const PredictionService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace ckd
