#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cothinker/common.hpp"
#include "cothinker/gateway.hpp"

namespace cothinker {

inline constexpr size_t kMockEmbeddingDim = 32;
// Longer texts are embedded on their first 8192 characters.
inline constexpr size_t kEmbeddingInputCap = 8192;

struct Embedding {
  std::vector<double> values;

  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
};

inline Embedding normalized(std::vector<double> values) {
  Embedding e{std::move(values)};
  double n = e.norm();
  if (n == 0.0) {
    if (!e.values.empty()) e.values[0] = 1.0;
    return e;
  }
  for (double& v : e.values) v /= n;
  return e;
}

// d = 1 - cos(a, b), in [0, 2]. Symmetric with zero diagonal; no triangle
// inequality is claimed.
inline double cognitive_distance(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size())
    throw Error(Errc::DimensionMismatch,
                "embedding dimensions differ: " + std::to_string(a.values.size()) + " vs " +
                    std::to_string(b.values.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  double denom = std::sqrt(na) * std::sqrt(nb);
  double cosine = denom == 0.0 ? 0.0 : dot / denom;
  if (cosine > 1.0) cosine = 1.0;
  if (cosine < -1.0) cosine = -1.0;
  return 1.0 - cosine;
}

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Embedding embed(std::string_view text) = 0;
};

// Deterministic embeddings: PRNG seeded with FNV-1a-64 of the (capped) text,
// 32 standard-normal draws, L2-normalized.
class MockEmbeddingProvider final : public EmbeddingProvider {
 public:
  Embedding embed(std::string_view text) override {
    if (trim(text).empty())
      throw Error(Errc::EmptyText, "cannot embed empty text");
    if (text.size() > kEmbeddingInputCap) text = text.substr(0, kEmbeddingInputCap);
    Rng rng(fnv1a64(text));
    std::vector<double> values(kMockEmbeddingDim);
    for (double& v : values) v = rng.next_gauss();
    return normalized(std::move(values));
  }
};

class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(BackendDescriptor backend) : backend_(std::move(backend)) {}

  Embedding embed(std::string_view text) override {
    if (trim(text).empty())
      throw Error(Errc::EmptyText, "cannot embed empty text");
    if (text.size() > kEmbeddingInputCap) text = text.substr(0, kEmbeddingInputCap);
    json payload;
    payload["model"] = backend_.model;
    payload["input"] = std::string(text);
    int retries = 0;
    std::string body = http_post_json(backend_, "/embeddings", payload, retries);
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception&) {
      throw Error(Errc::MalformedResponse, "embedding response is not valid JSON");
    }
    if (!j.contains("data") || !j["data"].is_array() || j["data"].empty() ||
        !j["data"][0].contains("embedding"))
      throw Error(Errc::MalformedResponse, "embedding response has no data[0].embedding");
    std::vector<double> values = j["data"][0]["embedding"].get<std::vector<double>>();
    if (values.empty())
      throw Error(Errc::MalformedResponse, "embedding response vector is empty");
    return normalized(std::move(values));
  }

 private:
  BackendDescriptor backend_;
};

inline std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EngineConfig& cfg) {
  if (cfg.embedding_backend.kind == BackendKind::Mock)
    return std::make_unique<MockEmbeddingProvider>();
  return std::make_unique<HttpEmbeddingProvider>(cfg.embedding_backend);
}

struct AgentOutput {
  int agent_id = 0;
  int round = 0;
  std::string text;
  Embedding embedding;
};

using DistanceMatrix = std::vector<std::vector<double>>;

// Pairwise cognitive distances over one round's outputs, indexed by agent id.
inline DistanceMatrix distance_matrix(const std::vector<AgentOutput>& outputs) {
  const size_t m = outputs.size();
  for (const auto& o : outputs) {
    if (o.round != outputs.front().round)
      throw Error(Errc::MixedRounds, "distance_matrix: outputs span multiple rounds");
  }
  DistanceMatrix d(m, std::vector<double>(m, 0.0));
  for (size_t u = 0; u < m; ++u) {
    for (size_t v = u + 1; v < m; ++v) {
      double dist = cognitive_distance(outputs[u].embedding, outputs[v].embedding);
      d[u][v] = dist;
      d[v][u] = dist;
    }
  }
  return d;
}

}  // namespace cothinker
