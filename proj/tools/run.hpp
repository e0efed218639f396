#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace sta::cli {

/// Column-major header plus rows of doubles; written as CSV or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunResult {
  Table table;
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;
  bool is_check = false;
  bool pass = true;
};

/// 17 significant digits, shortest of fixed/scientific.
std::string format_double(double v);

std::string to_csv(const Table& t);

RunResult compute(const RunConfig& cfg);

/// Full JSON document: schema, resolved config, results, optional table.
nlohmann::ordered_json summary_json(const RunConfig& cfg, const RunResult& r, bool with_table);

/// Computes and writes the artifacts. Returns the process exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// argv-level entry point (args exclude the program name).
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sta::cli
