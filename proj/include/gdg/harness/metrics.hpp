#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gdg/harness/config.hpp"
#include "gdg/harness/runner.hpp"

namespace gdg::harness {

/// SHA-1 of "blob <size>\0<bytes>", as git computes object ids.
std::string git_blob_sha1(const std::string& bytes);

std::string curves_csv(const std::vector<EvalReport>& reports);
std::string buckets_csv(const std::vector<EvalReport>& reports);
/// One "x y" (or "x y z") line per visited state.
std::string trajectory_text(const std::vector<RealVec>& path);

/// Writes curves.csv, buckets.csv, trajectories/ and manifest.json under `dir`.
/// Output is byte-identical for identical inputs.
void emit_metrics(const std::filesystem::path& dir, const RunConfig& cfg, const std::vector<EvalReport>& reports);

}  // namespace gdg::harness
