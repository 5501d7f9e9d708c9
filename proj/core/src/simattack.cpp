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

#include "dawn/simattack.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "dawn/error.hpp"

namespace dawn {
namespace {

using nlohmann::json;

std::uint64_t Load64(const Digest& d, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | d[offset + i];
  return v;
}

// Two independent 64-bit draws tied to (seed, input).
std::pair<double, std::uint64_t> Draw(std::uint64_t seed, const Digest& input_digest) {
  Bytes msg(8);
  for (int i = 0; i < 8; ++i) msg[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
  msg.insert(msg.end(), input_digest.begin(), input_digest.end());
  const Digest h = Sha256(msg);
  const double u = static_cast<double>(Load64(h, 0) >> 11) * 0x1.0p-53;
  return {u, Load64(h, 8)};
}

// Uniform over [0, m) \ {excluded}.
std::size_t OtherClass(std::uint64_t draw, std::size_t m, std::size_t excluded) {
  const std::size_t pick = static_cast<std::size_t>(draw % (m - 1));
  return pick < excluded ? pick : pick + 1;
}

}  // namespace

SimulatedSurrogate::SimulatedSurrogate(SurrogateSim params, const ModelSpec& reference,
                                       const std::vector<Observation>& training)
    : params_(params), reference_(reference) {
  if (params_.retention < 0 || params_.retention > 1 || params_.oracle_acc < 0 ||
      params_.oracle_acc > 1) {
    throw Error(ErrorCode::kBadConfig, "retention and oracle_acc must lie in [0,1]");
  }
  for (const auto& obs : training) memory_.emplace(obs.input.digest(), obs.response_class);
}

std::size_t SimulatedSurrogate::QueryClass(const CanonicalInput& x) {
  const Digest d = x.digest();
  const auto [u, pick] = Draw(params_.seed, d);
  const std::size_t m = reference_.m;
  if (const auto it = memory_.find(d); it != memory_.end()) {
    return u < params_.retention ? it->second : OtherClass(pick, m, it->second);
  }
  const std::size_t honest = Predict(reference_, x).argmax();
  return u < params_.oracle_acc ? honest : OtherClass(pick, m, honest);
}

void AttackScenario::Validate() const {
  if (n_clients < 1) throw Error(ErrorCode::kBadConfig, "n_clients must be >= 1");
  if (n_queries != 0 && n_queries < n_clients) {
    throw Error(ErrorCode::kBadConfig, "n_queries must be >= n_clients");
  }
  for (auto c : colluders) {
    if (c >= n_clients) throw Error(ErrorCode::kBadConfig, "colluder index out of range");
  }
}

AttackScenario AttackScenario::Parse(const std::string& text, const std::string& base_dir) {
  AttackScenario s;
  try {
    const json doc = json::parse(text);
    s.n_queries = doc.at("n_queries").get<std::uint64_t>();
    s.n_clients = doc.value("n_clients", std::uint64_t{1});
    s.input_shape = doc.value("input_shape", s.input_shape);
    s.seed = doc.value("seed", std::uint64_t{1});
    auto as_text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (doc.contains("r_w")) s.r_w = WatermarkRatio::Parse(as_text(doc.at("r_w")));
    if (doc.contains("e")) s.e = ParseRational(as_text(doc.at("e")));
    s.k = doc.value("k", std::size_t{0});
    if (doc.contains("mapping")) s.mapping = doc.at("mapping").get<MappingConfig>();
    if (doc.contains("model_file")) {
      const std::string p = doc.at("model_file").get<std::string>();
      s.model_file = std::filesystem::path(p).is_absolute()
                         ? p
                         : (std::filesystem::path(base_dir) / p).string();
    }
    s.classes = doc.value("classes", std::size_t{10});
    if (doc.contains("surrogate")) {
      const json& sj = doc.at("surrogate");
      s.surrogate.retention = sj.value("retention", 1.0);
      s.surrogate.oracle_acc = sj.value("oracle_acc", 0.0);
      s.surrogate.seed = sj.value("seed", s.seed);
    }
    s.colluders = doc.value("colluders", std::vector<std::uint64_t>{});
    if (doc.contains("n_registered_override")) {
      s.n_registered_override = doc.at("n_registered_override").get<std::uint64_t>();
    }
    if (doc.contains("confidence_target")) {
      s.confidence_target = ParseRational(as_text(doc.at("confidence_target")));
    } else if (doc.contains("confidence_target_bits")) {
      s.confidence_target = 1 - PowerOfTwo(-doc.at("confidence_target_bits").get<int>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadConfig, std::string("scenario: ") + e.what());
  }
  s.Validate();
  return s;
}

AttackScenario AttackScenario::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadConfig, "cannot read scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string ClientName(std::uint64_t index) { return "client-" + std::to_string(index); }

std::vector<CanonicalInput> SampleDistinctInputs(const std::vector<std::uint32_t>& shape,
                                                 std::uint64_t n, std::uint64_t seed) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  std::mt19937_64 rng(seed);
  std::vector<CanonicalInput> out;
  out.reserve(n);
  if (count < 8 && n > (std::uint64_t{1} << (8 * count))) {
    throw Error(ErrorCode::kBadConfig, "input space too small for the requested distinct count");
  }
  std::set<Digest> seen;
  Bytes buf(count);
  std::uint64_t attempts = 0;
  while (out.size() < n) {
    for (std::size_t i = 0; i < count; i += 8) {
      std::uint64_t word = rng();
      for (std::size_t b = 0; b < 8 && i + b < count; ++b) {
        buf[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
      }
    }
    CanonicalInput x = Canonicalize(Dtype::kU8, shape, buf);
    if (seen.insert(x.digest()).second) out.push_back(std::move(x));
    if (++attempts > n * 64 + 1024) {
      throw Error(ErrorCode::kBadConfig, "input space too small for the requested distinct count");
    }
  }
  return out;
}

ModelSpec RandomLinearModel(const std::string& model_id, std::size_t m,
                            const std::vector<std::uint32_t>& input_shape, std::uint64_t seed) {
  std::size_t n = 1;
  for (auto d : input_shape) n *= d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LinearBackend lin;
  lin.weights.assign(m, std::vector<double>(n));
  lin.bias.assign(m, 0.0);
  for (auto& row : lin.weights) {
    for (double& w : row) w = normal(rng) / std::sqrt(static_cast<double>(n)) * 4.0;
  }
  for (double& b : lin.bias) b = normal(rng);
  return BuildModel(model_id, m, input_shape, lin);
}

std::vector<Observation> ExtractionResult::Corpus(const std::vector<std::uint64_t>& indices) const {
  std::vector<Observation> out;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (!indices.empty() && std::find(indices.begin(), indices.end(), i) == indices.end()) continue;
    out.insert(out.end(), clients[i].observations.begin(), clients[i].observations.end());
  }
  return out;
}

ExtractionResult RunExtraction(const std::vector<CanonicalInput>& inputs, std::uint64_t n_clients,
                               Gateway& gateway) {
  if (n_clients == 0) throw Error(ErrorCode::kBadConfig, "n_clients must be >= 1");
  ExtractionResult result;
  result.clients.resize(n_clients);
  const std::uint64_t n = inputs.size();
  for (std::uint64_t c = 0; c < n_clients; ++c) {
    auto& client = result.clients[c];
    client.client_id = ClientName(c);
    gateway.triggers().RegisterClient(client.client_id);
    const std::uint64_t begin = c * n / n_clients;
    const std::uint64_t end = (c + 1) * n / n_clients;
    client.observations.reserve(end - begin);
    for (std::uint64_t i = begin; i < end; ++i) {
      const PredictResponse r = gateway.HandlePredict(client.client_id, inputs[i]);
      client.observations.push_back({inputs[i], r.cls});
    }
  }
  for (auto& client : result.clients) client.bundle = gateway.Bundle(client.client_id);
  return result;
}

ExtractionResult RunExtraction(const AttackScenario& scenario, Gateway& gateway) {
  scenario.Validate();
  return RunExtraction(SampleDistinctInputs(scenario.input_shape, scenario.n_queries, scenario.seed),
                       scenario.n_clients, gateway);
}

Evaluation Evaluate(SuspectEndpoint& surrogate, const WatermarkBundle& bundle, const Rational& e) {
  Evaluation out;
  out.l = ComputeLStatistic(bundle, surrogate);
  out.acc_wm = 1.0 - out.l.value();
  out.passed = out.l.Below(e);
  return out;
}

double TestAccuracy(SuspectEndpoint& surrogate, const ModelSpec& reference,
                    const std::vector<CanonicalInput>& inputs) {
  if (inputs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& x : inputs) {
    if (surrogate.QueryClass(x) == Predict(reference, x).argmax()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(inputs.size());
}

std::vector<ClientVerdict> CollusionReport(Gateway& gateway, const ExtractionResult& extraction,
                                           SuspectEndpoint& surrogate, const Rational& e,
                                           const std::vector<std::uint64_t>& colluders,
                                           const CollusionOptions& options) {
  if (!gateway.bulletin().FirstModelCommitment(gateway.model_digest())) gateway.RegisterModel();
  std::vector<WatermarkBundle> bundles;
  for (const auto& client : extraction.clients) {
    bundles.push_back(gateway.Bundle(client.client_id));
    if (!bundles.back().empty()) gateway.SnapshotRegister(client.client_id);
  }

  std::vector<ClientVerdict> verdicts;
  for (std::size_t i = 0; i < extraction.clients.size(); ++i) {
    ClientVerdict v;
    v.client_id = extraction.clients[i].client_id;
    v.bundle_size = bundles[i].size();
    v.colluder = colluders.empty() ||
                 std::find(colluders.begin(), colluders.end(), i) != colluders.end();
    if (!bundles[i].empty()) {
      JudgeOptions jo;
      jo.n_registered_override = options.n_registered_override;
      VerificationReport report =
          JudgeVerify(gateway.bulletin(), bundles[i], gateway.model(), surrogate, e, jo);
      v.verified = report.passed;
      v.acc_wm = 1.0 - report.l.value();
      if (options.confidence_target) {
        v.meets_confidence_target = report.ConfidenceExceeds(*options.confidence_target);
      }
      v.report = std::move(report);
    }
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

SimulationReport RunScenario(const AttackScenario& scenario) {
  scenario.Validate();
  ModelSpec model = scenario.model_file.empty()
                        ? RandomLinearModel("sim-linear", scenario.classes, scenario.input_shape,
                                            scenario.seed ^ 0x5eedULL)
                        : LoadModelFile(scenario.model_file);

  ModelKeySet keys;
  const std::string key_material = "dawn-sim-key:" + std::to_string(scenario.seed);
  keys.k_w = Sha256(AsBytes(key_material));
  keys.r_w = scenario.r_w;
  keys.mapping = scenario.mapping;

  GatewaySettings settings;
  settings.k = scenario.k;
  settings.auto_register_every = 0;
  // A fixed clock keeps reports reproducible.
  settings.clock = [] { return std::chrono::system_clock::time_point{}; };
  Gateway gateway(model, keys, settings);

  const ExtractionResult extraction = RunExtraction(scenario, gateway);
  const std::vector<Observation> corpus = extraction.Corpus(scenario.colluders);
  SimulatedSurrogate surrogate(scenario.surrogate, gateway.model(), corpus);

  CollusionOptions options;
  options.n_registered_override = scenario.n_registered_override;
  options.confidence_target = scenario.confidence_target;
  const auto verdicts =
      CollusionReport(gateway, extraction, surrogate, scenario.e, scenario.colluders, options);

  const auto test_inputs = SampleDistinctInputs(scenario.input_shape, 1000, scenario.seed + 1);
  const double acc_test = TestAccuracy(surrogate, gateway.model(), test_inputs);

  SimulationReport report;
  json clients = json::array();
  std::ostringstream csv;
  csv << "N,client_id,colluder,bundle_size,acc_wm,passed\n";
  json implicated = json::array();
  for (const auto& v : verdicts) {
    json c = {{"client_id", v.client_id},
              {"colluder", v.colluder},
              {"bundle_size", v.bundle_size},
              {"acc_wm", v.acc_wm},
              {"verified", v.verified}};
    if (v.report) c["verification"] = v.report->ToJson();
    if (scenario.confidence_target) c["meets_confidence_target"] = v.meets_confidence_target;
    clients.push_back(std::move(c));
    if (v.verified) implicated.push_back(v.client_id);
    csv << scenario.n_queries << ',' << v.client_id << ',' << (v.colluder ? 1 : 0) << ','
        << v.bundle_size << ',' << v.acc_wm << ',' << (v.verified ? 1 : 0) << '\n';
  }
  report.json = {{"n_queries", scenario.n_queries},
                 {"n_clients", scenario.n_clients},
                 {"r_w", scenario.r_w.ToString()},
                 {"e", scenario.e.get_str()},
                 {"model_digest", HexEncode(gateway.model_digest())},
                 {"surrogate",
                  {{"retention", scenario.surrogate.retention},
                   {"oracle_acc", scenario.surrogate.oracle_acc},
                   {"seed", scenario.surrogate.seed},
                   {"memorized", surrogate.memorized()}}},
                 {"acc_test", acc_test},
                 {"clients", clients},
                 {"implicated", implicated}};
  report.csv = csv.str();
  return report;
}

}  // namespace dawn
