#include "gdg/harness/metrics.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "gdg/errors.hpp"

namespace gdg::harness {

namespace fs = std::filesystem;

std::string git_blob_sha1(const std::string& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw NumericalError("cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw NumericalError("sha1 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string curves_csv(const std::vector<EvalReport>& reports) {
  std::string out = "method,seed,episodes,success_rate,mean_final_distance\n";
  for (const auto& r : reports) {
    for (const auto& p : r.curve) {
      out += fmt::format("{},{},{},{:.6f},{:.6f}\n", r.method, r.seed, p.episodes, p.success_rate,
                         p.mean_final_distance);
    }
  }
  return out;
}

std::string buckets_csv(const std::vector<EvalReport>& reports) {
  std::string out = "method,seed,distance,success_rate\n";
  for (const auto& r : reports) {
    for (const auto& b : r.buckets) {
      if (!b.satisfiable) {
        out += fmt::format("{},{},{},unsatisfiable\n", r.method, r.seed, b.distance);
      } else {
        out += fmt::format("{},{},{},{:.6f}\n", r.method, r.seed, b.distance, b.success_rate);
      }
    }
  }
  return out;
}

std::string trajectory_text(const std::vector<RealVec>& path) {
  std::string out;
  for (const auto& p : path) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (i > 0) out += ' ';
      out += fmt::format("{:.6f}", p[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << bytes;
}

}  // namespace

void emit_metrics(const fs::path& dir, const RunConfig& cfg, const std::vector<EvalReport>& reports) {
  fs::create_directories(dir / "trajectories");
  nlohmann::json files = nlohmann::json::object();
  auto put = [&](const std::string& rel, const std::string& bytes) {
    write_file(dir / rel, bytes);
    files[rel] = git_blob_sha1(bytes);
  };
  put("curves.csv", curves_csv(reports));
  put("buckets.csv", buckets_csv(reports));
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.trajectories.size(); ++i) {
      const std::string stem = fmt::format("trajectories/{}_seed{}_task{}", r.method, r.seed, i);
      put(stem + ".txt", trajectory_text(r.trajectories[i]));
      if (i < r.plans.size() && !r.plans[i].waypoints.empty()) {
        std::ostringstream plan;
        planner::write_plan(plan, r.plans[i]);
        put(stem + "_plan.txt", plan.str());
      }
    }
  }
  const std::string config_text = to_json(cfg).dump(2);
  nlohmann::json manifest;
  manifest["config"] = to_json(cfg);
  manifest["config_sha1"] = git_blob_sha1(config_text);
  manifest["seed"] = cfg.seed;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : reports) {
    runs.push_back({{"method", r.method},
                    {"seed", r.seed},
                    {"aborted", r.aborted},
                    {"episodes", r.telemetry.episodes},
                    {"env_steps", r.telemetry.env_steps},
                    {"train_steps", r.telemetry.train_steps},
                    {"bridge_searches", r.telemetry.bridge_searches},
                    {"bridges_found", r.telemetry.bridges_found},
                    {"training_successes", r.telemetry.training_successes}});
  }
  manifest["runs"] = runs;
  manifest["files"] = files;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace gdg::harness
