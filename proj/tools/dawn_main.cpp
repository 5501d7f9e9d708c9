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

// dawn: gateway server, judge and sizing tools.

#include <csignal>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dawn/bulletin.hpp"
#include "dawn/error.hpp"
#include "dawn/gateway.hpp"
#include "dawn/hashcore.hpp"
#include "dawn/model.hpp"
#include "dawn/simattack.hpp"
#include "dawn/stats.hpp"
#include "dawn/triggerstore.hpp"
#include "dawn/verify.hpp"

namespace {

using nlohmann::json;

dawn::GatewayServer* g_server = nullptr;

void HandleSignal(int) {
  if (g_server != nullptr) g_server->Stop();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dawn::Error(dawn::ErrorCode::kBadConfig, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw dawn::Error(dawn::ErrorCode::kStorageFailure, "cannot write " + path);
}

void EmitJson(const json& j, const std::string& path) { WriteText(path, j.dump(2) + "\n"); }

dawn::Rational TargetFrom(const std::string& target, int bits, std::uint64_t clients) {
  if (!target.empty()) return dawn::ParseRational(target);
  return dawn::PowerOfTwo(-bits) / dawn::Rational(std::to_string(clients));
}

std::string SweepCsv(std::uint64_t m, const dawn::Rational& e, std::uint64_t max_size) {
  std::ostringstream csv;
  csv << "size,log10_trivial_prob,trivial_prob\n";
  csv.precision(17);
  for (const auto& [size, log10p] : dawn::TrivialProbSweep(m, e, max_size)) {
    csv << size << ',' << log10p << ',' << std::pow(10.0, log10p) << '\n';
  }
  return csv.str();
}

json ProbJson(const dawn::TrivialProbability& p) {
  return {{"trivial_prob", p.value()},
          {"trivial_prob_log10", p.log10},
          {"trivial_prob_exact", p.exact.get_str()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DAWN watermarking gateway"};
  app.require_subcommand(1);

  // serve
  std::string config_path;
  auto* serve = app.add_subcommand("serve", "Run the prediction gateway");
  serve->add_option("--config", config_path, "Gateway config JSON")->required()->check(CLI::ExistingFile);

  // verify
  std::string bundle_path, board_path, model_path, suspect, api_key, report_path = "-";
  std::string e_text;
  std::uint64_t n_registered = 0;
  auto* verify = app.add_subcommand("verify", "Judge a watermark bundle against a suspect");
  verify->add_option("--bundle", bundle_path, "Bundle JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--board", board_path, "Bulletin JSONL")->required()->check(CLI::ExistingFile);
  verify->add_option("--model", model_path, "Victim model file")->required()->check(CLI::ExistingFile);
  verify->add_option("--suspect", suspect, "Suspect URL (http://...) or model file")->required();
  verify->add_option("--e", e_text, "Tolerated error rate, decimal or p/q")->required();
  verify->add_option("--api-key", api_key, "API key for an HTTP suspect");
  verify->add_option("--n-registered", n_registered,
                     "Override the registered watermark count used for confidence");
  verify->add_option("--out", report_path, "Report path (default stdout)");

  // stats
  auto* stats = app.add_subcommand("stats", "Watermark sizing statistics");
  stats->require_subcommand(1);
  std::uint64_t m = 10, size = 0, queries = 0, colluders = 1, clients = 1000000, sweep_max = 0;
  std::string target_text, csv_path, out_path = "-";
  int bits = 64;
  e_text = "";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--csv", csv_path, "Also write a CSV sweep to this path");
    sub->add_option("--out", out_path, "JSON output path (default stdout)");
  };
  auto* trivial = stats->add_subcommand("trivial-prob", "P(L < e) for a model guessing uniformly");
  trivial->add_option("--m", m, "Number of classes")->required();
  trivial->add_option("--e", e_text, "Tolerated error rate")->required();
  trivial->add_option("--size", size, "Watermark size |T|")->required();
  trivial->add_option("--sweep-max", sweep_max, "Largest |T| in the CSV sweep (default --size)");
  add_common(trivial);

  auto* min_size = stats->add_subcommand("min-size", "Smallest |T| reaching a target probability");
  min_size->add_option("--m", m, "Number of classes")->required();
  min_size->add_option("--e", e_text, "Tolerated error rate")->required();
  min_size->add_option("--target", target_text, "Target probability (default 2^-bits / clients)");
  min_size->add_option("--bits", bits, "Security level in bits")->check(CLI::Range(1, 10000));
  min_size->add_option("--clients", clients, "Registered watermarks to correct for");
  min_size->add_option("--sweep-max", sweep_max, "Largest |T| in the CSV sweep (default 2x result)");
  add_common(min_size);

  auto* ratio = stats->add_subcommand("ratio", "Watermark ratio r_w for a query budget");
  ratio->add_option("--n", queries, "Queries N")->required();
  ratio->add_option("--size", size, "Watermark size |T|")->required();
  ratio->add_option("--colluders", colluders, "Colluding clients");
  add_common(ratio);

  auto* confidence = stats->add_subcommand("confidence", "Effective confidence over n watermarks");
  confidence->add_option("--m", m, "Number of classes")->required();
  confidence->add_option("--e", e_text, "Tolerated error rate")->required();
  confidence->add_option("--size", size, "Watermark size |T|")->required();
  confidence->add_option("--clients", clients, "Registered watermarks");
  confidence->add_option("--sweep-max", sweep_max, "Largest |T| in the CSV sweep (default --size)");
  add_common(confidence);

  // simulate
  std::string scenario_path;
  auto* simulate = app.add_subcommand("simulate", "Run an extraction and verification scenario");
  simulate->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--csv", csv_path, "CSV output path");
  simulate->add_option("--out", out_path, "JSON output path (default stdout)");

  // keygen / digest / export-bundle
  std::string key_out = "-";
  auto* keygen = app.add_subcommand("keygen", "Generate a 256-bit watermark key (64 hex)");
  keygen->add_option("--out", key_out, "Key file path (default stdout)");

  auto* digest = app.add_subcommand("digest", "SHA3-256 digest of a model file");
  digest->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);

  std::string client_id;
  auto* export_bundle = app.add_subcommand("export-bundle", "Write a client's bundle from a gateway's trigger store");
  export_bundle->add_option("--config", config_path, "Gateway config JSON")->required()->check(CLI::ExistingFile);
  export_bundle->add_option("--client", client_id, "Client id")->required();
  export_bundle->add_option("--out", out_path, "Bundle path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      const auto cfg = dawn::GatewayConfig::LoadFile(config_path);
      auto gateway = dawn::Gateway::FromConfig(cfg);
      dawn::GatewayServer server(*gateway);
      g_server = &server;
      std::signal(SIGINT, HandleSignal);
      std::signal(SIGTERM, HandleSignal);
      std::cerr << "dawn: serving model " << gateway->model().model_id << " ("
                << dawn::HexEncode(gateway->model_digest()) << ") on " << cfg.listen_host << ":"
                << cfg.listen_port << std::endl;
      if (!server.Listen(cfg.listen_host, cfg.listen_port)) {
        std::cerr << "dawn: cannot listen on " << cfg.listen_host << ":" << cfg.listen_port << "\n";
        return 2;
      }
      g_server = nullptr;
      return 0;
    }

    if (*verify) {
      const auto bundle = dawn::WatermarkBundle::LoadFile(bundle_path);
      const auto board = dawn::Bulletin::FromText(ReadFile(board_path));
      const auto victim = dawn::LoadModelFile(model_path);
      std::unique_ptr<dawn::SuspectEndpoint> endpoint;
      if (suspect.rfind("http://", 0) == 0 || suspect.rfind("https://", 0) == 0) {
        endpoint = dawn::MakeHttpSuspect(suspect, api_key);
      } else {
        endpoint = std::make_unique<dawn::ModelEndpoint>(dawn::LoadModelFile(suspect));
      }
      dawn::JudgeOptions options;
      if (n_registered != 0) options.n_registered_override = n_registered;
      const auto report = dawn::JudgeVerify(board, bundle, victim, *endpoint,
                                            dawn::ParseRational(e_text), options);
      json j = report.ToJson();
      j["bundle_digest"] = dawn::HexEncode(bundle.digest());
      j["client_id"] = bundle.client_id;
      j["model_digest"] = dawn::HexEncode(dawn::ModelDigest(victim));
      EmitJson(j, report_path);
      return report.passed ? 0 : 1;
    }

    if (*trivial) {
      const auto e = dawn::ParseRational(e_text);
      json j = {{"m", m}, {"e", e.get_str()}, {"size", size}};
      j.update(ProbJson(dawn::TrivialProb(m, e, size)));
      EmitJson(j, out_path);
      if (!csv_path.empty()) WriteText(csv_path, SweepCsv(m, e, sweep_max ? sweep_max : size));
      return 0;
    }

    if (*min_size) {
      const auto e = dawn::ParseRational(e_text);
      const auto target = TargetFrom(target_text, bits, clients);
      const auto result = dawn::MinWatermarkSize(m, e, target);
      json j = {{"m", m},
                {"e", e.get_str()},
                {"target", target.get_d()},
                {"target_log10", dawn::Log10(target)},
                {"min_size", result.size},
                {"first_crossing", result.first_crossing}};
      j.update(ProbJson(dawn::TrivialProb(m, e, result.size)));
      EmitJson(j, out_path);
      if (!csv_path.empty()) {
        WriteText(csv_path, SweepCsv(m, e, sweep_max ? sweep_max : 2 * result.size));
      }
      return 0;
    }

    if (*ratio) {
      const auto r = dawn::RequiredRatio(queries, size, colluders);
      EmitJson({{"n", queries},
                {"size", size},
                {"colluders", colluders},
                {"r_w", r.ToDouble()},
                {"r_w_exact", r.ratio.get_str()},
                {"r_w_percent", r.Percent(3)}},
               out_path);
      if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << "colluders,r_w,r_w_percent\n";
        for (std::uint64_t c = 1; c <= colluders; ++c) {
          const auto rc = dawn::RequiredRatio(queries, size, c);
          csv << c << ',' << rc.ToDouble() << ',' << rc.Percent(3) << '\n';
        }
        WriteText(csv_path, csv.str());
      }
      return 0;
    }

    if (*confidence) {
      const auto e = dawn::ParseRational(e_text);
      const auto p = dawn::TrivialProb(m, e, size);
      const auto bound = dawn::EffectiveConfidence(p.exact, clients);
      json j = {{"m", m}, {"e", e.get_str()}, {"size", size}, {"clients", clients}};
      j.update(ProbJson(p));
      j["effective_trivial_prob"] = bound.trivial_bound.get_d();
      j["effective_trivial_prob_log10"] = dawn::Log10(bound.trivial_bound);
      j["effective_confidence"] = bound.confidence.get_d();
      j["exceeds_1_minus_2^-64"] = bound.confidence > 1 - dawn::PowerOfTwo(-64);
      EmitJson(j, out_path);
      if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << "size,log10_effective_trivial_prob\n";
        csv.precision(17);
        for (std::uint64_t s = 1; s <= (sweep_max ? sweep_max : size); ++s) {
          const auto b = dawn::EffectiveConfidence(dawn::TrivialProb(m, e, s).exact, clients);
          csv << s << ',' << dawn::Log10(b.trivial_bound) << '\n';
        }
        WriteText(csv_path, csv.str());
      }
      return 0;
    }

    if (*simulate) {
      const auto report = dawn::RunScenario(dawn::AttackScenario::LoadFile(scenario_path));
      EmitJson(report.json, out_path);
      if (!csv_path.empty()) WriteText(csv_path, report.csv);
      return 0;
    }

    if (*keygen) {
      WriteText(key_out, dawn::HexEncode(dawn::GenerateSecretKey()) + "\n");
      return 0;
    }

    if (*digest) {
      std::cout << dawn::HexEncode(dawn::ModelDigest(dawn::LoadModelFile(model_path))) << "\n";
      return 0;
    }

    if (*export_bundle) {
      const auto cfg = dawn::GatewayConfig::LoadFile(config_path);
      const auto gateway = dawn::Gateway::FromConfig(cfg);
      WriteText(out_path, gateway->Bundle(client_id).Serialize() + "\n");
      return 0;
    }
  } catch (const dawn::Error& e) {
    std::cerr << "dawn: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dawn: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
