#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "kds/error.hpp"
#include "lab/config.hpp"
#include "lab/output.hpp"
#include "lab/scenarios.hpp"
#include "lab/thresholds.hpp"

#ifndef KDS_VERSION
#define KDS_VERSION "unknown"
#endif
#ifndef KDS_GIT_REVISION
#define KDS_GIT_REVISION "unknown"
#endif

namespace {

using lab::Json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json error_json(std::string_view code, const std::string& message) {
  return {{"error", {{"code", std::string(code)}, {"message", message}}}};
}

int resolve_threads(std::optional<int> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("KDS_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    lab::Json e = error_json("ConfigError", "KDS_LAB_THREADS must be an integer in [1, 1024]");
    std::cerr << e.dump() << '\n';
    std::exit(2);
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kds-lab: Kerr-de Sitter geometry, gauge and wave evolution workflows"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  for (const auto& s : lab::scenarios()) {
    CLI::App* sub = app.add_subcommand(s.name, s.summary);
    sub->add_option("--config", config_path, "JSON scenario config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--threads", threads, "worker threads (default: KDS_LAB_THREADS or 1)")
        ->check(CLI::Range(1, 1024));
    sub->add_option("--seed", seed, "overrides the config seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("UsageError", e.what()).dump() << '\n';
    return 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  const lab::ScenarioEntry* scenario = lab::find_scenario(name);
  const int n_threads = resolve_threads(threads);
#ifdef _OPENMP
  omp_set_num_threads(n_threads);
#endif

  Json manifest;
  manifest["tool"] = "kds-lab";
  manifest["code_version"] = {{"version", KDS_VERSION}, {"revision", KDS_GIT_REVISION}};
  manifest["subcommand"] = name;
  manifest["threads"] = n_threads;
  manifest["thresholds"] = lab::thresholds_json();

  std::optional<lab::Output> out;
  auto finish = [&](int status, const Json* error) {
    if (!out) return status;
    try {
      if (error) out->json("error.json", *error);
      manifest["status"] = error ? "error" : "ok";
      Json files = Json::array();
      for (const auto& a : out->artifacts()) files.push_back({{"name", a.name}, {"bytes", a.bytes}});
      manifest["artifacts"] = files;
      manifest["timestamp"] = utc_timestamp();
      out->json("manifest.json", manifest);
    } catch (const std::exception& e) {
      std::cerr << error_json("IoError", e.what()).dump() << '\n';
      return status == 0 ? 1 : status;
    }
    return status;
  };

  try {
    out.emplace(out_dir);
    lab::ScenarioConfig cfg = lab::load_config(config_path);
    if (seed) cfg.seed = *seed;
    manifest["config"] = lab::to_json(cfg);
    const Json report = scenario->run(cfg, *out);
    std::cout << report.dump(2) << '\n';
    return finish(0, nullptr);
  } catch (const kds::Error& e) {
    const Json err = error_json(kds::to_string(e.code()), e.what());
    std::cerr << err.dump() << '\n';
    const int status = e.code() == kds::ErrorCode::ConfigError ? 2 : 1;
    return finish(status, &err);
  } catch (const std::exception& e) {
    const Json err = error_json("InternalError", e.what());
    std::cerr << err.dump() << '\n';
    return finish(1, &err);
  }
}
