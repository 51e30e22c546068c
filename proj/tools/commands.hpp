#pragma once

#include <fluorsep/system_io.hpp>

#include <filesystem>
#include <string>

namespace fluorsep::cli {

/// Runs one command and writes its outputs plus `<out>/manifest.json`
/// (deterministic) and `<out>/timings.json` (wall clock). Throws on error;
/// nothing is reported as written unless the command completes.
void run_command(const std::string &command, const RunConfig &config);

void simulate(const RunConfig &config);
void estimate(const RunConfig &config);
void sweep(const RunConfig &config);
void relight(const RunConfig &config);
void basis(const RunConfig &config);

/// Machine-readable description of an exception, one line of JSON.
std::string error_json(const std::string &command, const std::exception &e);

std::filesystem::path default_fixtures_dir();

} // namespace fluorsep::cli
